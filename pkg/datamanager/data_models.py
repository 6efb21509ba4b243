"""
Domain types for the Helmholtz QUBO toolkit.
Immutable dataclasses with `to_dict` for JSON reports and API responses.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from config import HarnessConfig
from exceptions import ValidationError
from utils.validation import as_integer


def _frozen_array(values, dtype=float):
    """Return a read-only numpy copy of values."""
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


class AnsatzKind(str, Enum):
    """Basis-function families"""
    TFA = 'tfa'
    CA = 'ca'
    AA = 'aa'

    @classmethod
    def parse(cls, value):
        """
        Parse a kind from its name, case-insensitively.

        :param value: AnsatzKind or string such as 'tfa'
        :return: AnsatzKind member
        """
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError('ansatz', f"Unknown ansatz '{value}' (expected tfa, ca or aa)")


@dataclass(frozen=True)
class TrigPolynomial:
    """Sum of a_k cos(kx) + b_k sin(kx) over distinct nonnegative k"""
    terms: tuple = ()

    def __post_init__(self):
        cleaned = []
        seen = set()
        for term in self.terms:
            k, a_k, b_k = term
            frequency = as_integer(k)
            if frequency is None or frequency < 0:
                raise ValidationError('driving', f"Frequency {k!r} must be a nonnegative integer")
            k = frequency
            if k in seen:
                raise ValidationError('driving', f"Frequency {k} appears twice")
            if k == 0 and b_k != 0:
                raise ValidationError('driving', "The k=0 term cannot carry a sine amplitude")
            seen.add(k)
            cleaned.append((k, float(a_k), float(b_k)))
        object.__setattr__(self, 'terms', tuple(sorted(cleaned)))

    @classmethod
    def parse(cls, text):
        """
        Parse 'k:a:b;k:a:b' into a polynomial; an empty string is zero.

        :param text: Term list
        :return: TrigPolynomial
        """
        terms = []
        for chunk in (text or '').split(';'):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split(':')
            if len(parts) != 3:
                raise ValidationError('driving', f"Term '{chunk}' must look like k:a:b")
            try:
                terms.append((int(parts[0]), float(parts[1]), float(parts[2])))
            except ValueError:
                raise ValidationError('driving', f"Term '{chunk}' is not numeric")
        return cls(tuple(terms))

    def to_dict(self):
        """Convert polynomial to dictionary"""
        return {'terms': [{'k': k, 'cos': a, 'sin': b} for k, a, b in self.terms]}


@dataclass(frozen=True)
class HelmholtzProblem:
    """u'' + tau^2 u = F on [0, 2pi] with u(0)=alpha, u'(0)=beta"""
    tau: float
    alpha: float
    beta: float
    driving: TrigPolynomial = field(default_factory=TrigPolynomial)
    name: str = 'custom'

    def __post_init__(self):
        if not math.isfinite(self.tau) or self.tau <= 0:
            raise ValidationError('tau', f"Wave number must be positive, got {self.tau}")
        for label, value in (('alpha', self.alpha), ('beta', self.beta)):
            if not math.isfinite(value):
                raise ValidationError(label, "Boundary data must be finite")

    def to_dict(self):
        """Convert problem to dictionary"""
        return {
            'name': self.name,
            'tau': self.tau,
            'alpha': self.alpha,
            'beta': self.beta,
            'driving': self.driving.to_dict()
        }


@dataclass(frozen=True)
class ClosedFormSolution:
    """c1 cos(tau x) + c2 sin(tau x) + particular + secular x-weighted terms"""
    tau: float
    c1: float
    c2: float
    particular: TrigPolynomial
    secular: tuple = ()

    def to_dict(self):
        """Convert solution to dictionary"""
        return {
            'tau': self.tau,
            'homogeneous': {'cos': self.c1, 'sin': self.c2},
            'particular': self.particular.to_dict(),
            'secular': [{'k': k, 'x_cos': c, 'x_sin': s} for k, c, s in self.secular]
        }


@dataclass(frozen=True)
class CollocationGrid:
    """Uniform grid x_m = 2 pi m / N"""
    N: int
    points: np.ndarray


@dataclass(frozen=True, eq=False)
class FourierBasisSet:
    """
    N basis functions stored as complex Fourier coefficients.

    Row n holds g[n][k] for k = -N/2..N/2, column j <-> k = j - N/2.
    """
    N: int
    kind: AnsatzKind
    coeffs: np.ndarray

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValidationError('N', f"Basis size must be even and >= 2, got {self.N}")
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != (self.N, self.N + 1):
            raise ValidationError('coeffs', f"Expected shape {(self.N, self.N + 1)}, got {coeffs.shape}")
        if not np.allclose(coeffs[:, ::-1], coeffs.conj(), rtol=0.0, atol=1e-12):
            raise ValidationError('coeffs', "Coefficients must be conjugate symmetric in k")
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coeffs', coeffs)

    @property
    def wavenumbers(self):
        return np.arange(-self.N // 2, self.N // 2 + 1)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Collocation system a w = b of shape (N+2) x N"""
    a: np.ndarray
    b: np.ndarray
    N: int
    tau: float
    alpha: float
    beta: float
    kind: AnsatzKind


@dataclass(frozen=True, eq=False)
class BinarizedSystem:
    """A omega = b with A = [-a | a/2 | ... | a/2^(n_spin-1)], l-major bits"""
    A: np.ndarray
    b: np.ndarray
    n_spin: int
    N: int

    @property
    def r(self):
        return self.N * self.n_spin


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """omega^T Q omega + L omega + C0 over {0,1}^r"""
    Q: np.ndarray
    L: np.ndarray
    C0: float

    def __post_init__(self):
        object.__setattr__(self, 'Q', _frozen_array(self.Q))
        object.__setattr__(self, 'L', _frozen_array(self.L))
        object.__setattr__(self, 'C0', float(self.C0))

    @property
    def r(self):
        return self.L.shape[0]


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """sigma^T Qtilde sigma + Ltilde sigma + Ctilde0 over {-1,+1}^r"""
    Qtilde: np.ndarray
    Ltilde: np.ndarray
    Ctilde0: float

    def __post_init__(self):
        object.__setattr__(self, 'Qtilde', _frozen_array(self.Qtilde))
        object.__setattr__(self, 'Ltilde', _frozen_array(self.Ltilde))
        object.__setattr__(self, 'Ctilde0', float(self.Ctilde0))

    @property
    def r(self):
        return self.Ltilde.shape[0]


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature ladder, one sweep of r flips per rung"""
    beta_start: float
    beta_end: float
    sweeps: int

    def __post_init__(self):
        if not self.beta_start > 0:
            raise ValidationError('beta_start', "Must be positive")
        if not self.beta_end > self.beta_start:
            raise ValidationError('beta_end', "Must exceed beta_start")
        sweeps = as_integer(self.sweeps)
        if sweeps is None or sweeps <= 0:
            raise ValidationError('sweeps', "Must be a positive integer")
        object.__setattr__(self, 'sweeps', sweeps)

    def betas(self):
        """
        Inverse temperature of every sweep.

        :return: Array of length sweeps
        """
        if self.sweeps == 1:
            return np.array([self.beta_end])
        return np.geomspace(self.beta_start, self.beta_end, int(self.sweeps))


@dataclass(frozen=True)
class Sample:
    """Distinct bitstring returned by a sampler"""
    bits: tuple
    energy: float
    count: int


@dataclass(frozen=True)
class SampleSet:
    """Aggregated sampler output, ascending in energy"""
    samples: tuple
    n_runs: int
    seed: int
    schedule: Optional[AnnealSchedule] = None

    @property
    def lowest(self):
        return self.samples[0]


@dataclass(frozen=True)
class BruteForceResult:
    """
    Exact minimum of a QUBO and the bitstrings attaining it.

    ground_states holds at most SamplerConfig.MAX_GROUND_STATES states in
    index order; degeneracy counts all of them.
    """
    ground_energy: float
    ground_states: tuple
    degeneracy: int


@dataclass(frozen=True, eq=False)
class GapProfile:
    """Two lowest eigenvalues of H(s) over an s-grid, with the refined minimum gap"""
    s_values: np.ndarray
    lambda0: np.ndarray
    lambda1: np.ndarray
    g_min: float
    s_at_min: float
    degenerate_flag: bool

    @property
    def gaps(self):
        return self.lambda1 - self.lambda0


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment configuration"""
    scenario: str
    ansatz: AnsatzKind
    N: int
    n_spin: int
    sampler: str = 'sa'
    runs: int = 1000
    seed: int = 0
    sweeps: Optional[int] = None
    beta_start: Optional[float] = None
    beta_end: Optional[float] = None
    gap: bool = True
    gap_grid: int = 201
    gap_refine: bool = True
    mse_points: int = 100
    aa_params: Optional[tuple] = None
    aa_row_norm: float = 1.0
    problem: Optional[HelmholtzProblem] = None


@dataclass
class ExperimentReport:
    """Metrics of one configuration"""
    scenario: str
    ansatz: str
    N: int
    n_spin: int
    r: int
    rank: int
    DR: float
    g_min: Optional[float] = None
    SR_sa: Optional[float] = None
    MSE_sa: Optional[float] = None
    MSE_best: Optional[float] = None
    degeneracy: Optional[int] = None
    sr_relative: bool = False
    gap_skipped: str = ''
    timing: dict = field(default_factory=dict)

    @staticmethod
    def columns():
        """Report columns in file order"""
        return HarnessConfig.ID_COLUMNS + HarnessConfig.METRIC_COLUMNS + HarnessConfig.EXTRA_COLUMNS

    def to_dict(self, include_timing=False):
        """Convert report to dictionary in column order"""
        data = {column: getattr(self, column) for column in self.columns()}
        if include_timing:
            data['timing'] = dict(self.timing)
        return data

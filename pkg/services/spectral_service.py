"""
Spectral Service - Transverse-field annealing Hamiltonian and its spectrum.
Provides the minimum-gap scan, the gap-maximizing adiabatic ansatz search and
a small-system Schrodinger integrator used as an annealing proxy.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np
import scipy.linalg as la
import scipy.optimize as so
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, expm_multiply

from config import SamplerConfig, SpectralConfig
from datamanager.data_models import GapProfile
from exceptions import (
    CapacityError, EigenSolverError, NumericalError, OptimizationError,
    ValidationError
)
from services.ansatz_service import AnsatzService
from services.encoder_service import EncoderService
from services.sampler_service import index_to_bits
from utils.validation import as_integer

logger = logging.getLogger(__name__)

# Dimension up to which the dynamics stepper diagonalizes in batches
DYNAMICS_DENSE_DIM = 256


@lru_cache(maxsize=8)
def _driver_matrix(r):
    """Sum of sigma_x over r qubits as a CSR matrix (bit flips)."""
    dim = 1 << r
    rows = np.repeat(np.arange(dim, dtype=np.int64), r)
    cols = rows ^ np.tile(1 << np.arange(r, dtype=np.int64), dim)
    data = np.ones(rows.shape[0])
    return sparse.csr_matrix((data, (rows, cols)), shape=(dim, dim))


class _BudgetExhausted(Exception):
    """Raised inside the optimizer objective once the evaluation budget is used"""


class SpectralService:
    """Service class for the annealing Hamiltonian H(s) = (1-s) sum sigma_x + s H_Q"""

    def __init__(self):
        self.ansatz_service = AnsatzService()
        self.encoder_service = EncoderService()

    # ==================== HAMILTONIAN ====================

    def driver_hamiltonian(self, r):
        """
        Transverse-field driver sum_i sigma_x^(i).

        :param r: Number of qubits
        :return: Sparse symmetric matrix of dimension 2^r
        """
        self._check_qubits(r, SpectralConfig.MAX_QUBITS, 'Spectral analysis')
        return _driver_matrix(int(r))

    def problem_diagonal(self, ising):
        """
        Diagonal of H_Q: Ising energy minus its constant for every basis state.

        :param ising: IsingProblem
        :return: Array of length 2^r, index j holds the state with bits (j >> i) & 1
        """
        self._check_qubits(ising.r, SpectralConfig.MAX_QUBITS, 'Spectral analysis')
        spins = 2.0 * index_to_bits(np.arange(1 << ising.r), ising.r) - 1.0
        return ((spins @ ising.Qtilde) * spins).sum(axis=1) + spins @ ising.Ltilde

    def build_hamiltonian(self, ising, s):
        """
        Interpolated Hamiltonian at schedule position s.

        :param ising: IsingProblem
        :param s: Schedule position in [0, 1]
        :return: Sparse symmetric CSR matrix
        """
        s = self._validate_s(s)
        driver = self.driver_hamiltonian(ising.r)
        diagonal = self.problem_diagonal(ising)
        return self._interpolate(driver, diagonal, s)

    def lowest_two_eigenvalues(self, H):
        """
        Two smallest eigenvalues counting multiplicity.

        Dense diagonalization up to the configured dimension, implicitly
        restarted Lanczos (ARPACK) above it. The Lanczos start vector is
        drawn from a fixed seed so repeated calls agree bit for bit.

        :param H: Sparse or dense symmetric matrix
        :return: Tuple (lambda0, lambda1)
        """
        dim = H.shape[0]
        if dim < 2:
            raise ValidationError('H', "Need a matrix of dimension at least 2")

        if dim <= SpectralConfig.DENSE_LIMIT or dim < 4:
            dense = H.toarray() if sparse.issparse(H) else np.asarray(H, dtype=float)
            values = la.eigh(dense, eigvals_only=True, subset_by_index=[0, 1])
            return float(values[0]), float(values[1])

        v0 = np.random.default_rng(SpectralConfig.ARPACK_SEED).standard_normal(dim)
        try:
            values = eigsh(H, k=2, which='SA', v0=v0, ncv=min(dim - 1, SpectralConfig.ARPACK_NCV),
                           maxiter=SpectralConfig.ARPACK_MAXITER,
                           tol=SpectralConfig.ARPACK_TOL, return_eigenvectors=False)
        except ArpackNoConvergence as e:
            raise EigenSolverError(self._arpack_residual(H, e), SpectralConfig.ARPACK_MAXITER)
        values = np.sort(values)
        return float(values[0]), float(values[1])

    # ==================== MINIMUM GAP ====================

    def min_gap(self, ising, grid_points=SpectralConfig.GRID_POINTS, refine=True):
        """
        Scan lambda1 - lambda0 over a uniform s-grid and refine the minimum.

        Grid points are diagonalized on a thread pool; results keep grid
        order. Refinement is a golden-section search on the bracket around
        the grid minimum, falling back to a bounded search at the endpoints.
        g_min is the refined minimum, which can lie strictly between two grid
        points when the gap dips sharply just before s=1.

        :param ising: IsingProblem
        :param grid_points: Number of grid points, at least the configured minimum
        :param refine: Whether to refine the grid minimum
        :return: GapProfile
        """
        count = as_integer(grid_points)
        if count is None or count < SpectralConfig.MIN_GRID_POINTS:
            raise ValidationError('grid_points', f"Need at least {SpectralConfig.MIN_GRID_POINTS} grid points, got {grid_points!r}")
        grid_points = count

        driver = self.driver_hamiltonian(ising.r)
        diagonal = self.problem_diagonal(ising)

        def eigenpair(s):
            return self.lowest_two_eigenvalues(self._interpolate(driver, diagonal, s))

        def gap(s):
            lambda0, lambda1 = eigenpair(min(max(s, 0.0), 1.0))
            return lambda1 - lambda0

        s_values = np.linspace(0.0, 1.0, int(grid_points))
        workers = max(1, min(SpectralConfig.GAP_WORKERS, len(s_values)))
        if workers == 1:
            pairs = np.array([eigenpair(s) for s in s_values])
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                pairs = np.array(list(executor.map(eigenpair, s_values)))
        lambda0, lambda1 = pairs[:, 0], pairs[:, 1]
        gaps = lambda1 - lambda0

        best = int(np.argmin(gaps))
        g_min = float(gaps[best])
        s_at_min = float(s_values[best])
        if refine:
            s_refined, g_refined = self._refine_minimum(gap, s_values, best)
            if g_refined < g_min:
                g_min, s_at_min = g_refined, s_refined

        degenerate = bool(gaps[-1] < SpectralConfig.DEGENERACY_TOL)
        if degenerate:
            logger.warning("Ground manifold at s=1 is degenerate (gap %.3e); g_min is not meaningful", gaps[-1])

        for array in (s_values, lambda0, lambda1):
            array.setflags(write=False)
        return GapProfile(s_values=s_values, lambda0=lambda0, lambda1=lambda1,
                          g_min=max(g_min, 0.0), s_at_min=s_at_min,
                          degenerate_flag=degenerate)

    def _refine_minimum(self, gap, s_values, best):
        """
        Refine a grid minimum to the configured s-resolution.

        :param gap: Callable s -> gap
        :param s_values: Uniform grid
        :param best: Index of the grid minimum
        :return: Tuple (s, gap) of the refined minimum
        """
        last = len(s_values) - 1
        lower = s_values[max(best - 1, 0)]
        upper = s_values[min(best + 1, last)]

        if 0 < best < last:
            try:
                result = so.minimize_scalar(gap, bracket=(lower, s_values[best], upper),
                                            method='golden',
                                            options={'xtol': SpectralConfig.REFINE_TOL})
                if lower <= result.x <= upper:
                    return float(result.x), float(result.fun)
            except ValueError:
                logger.debug("Golden bracket rejected around s=%.4f, using bounded search", s_values[best])

        result = so.minimize_scalar(gap, bounds=(lower, upper), method='bounded',
                                    options={'xatol': SpectralConfig.REFINE_TOL})
        return float(result.x), float(result.fun)

    # ==================== ADIABATIC ANSATZ ====================

    def optimize_adiabatic_ansatz(self, problem, N, n_spin, budget=SpectralConfig.AA_BUDGET,
                                  seed=0, grid_points=SpectralConfig.AA_GRID_POINTS):
        """
        Maximize g_min over the adiabatic ansatz parameters.

        Nelder-Mead restarts from the circulant parameters, then the truncated
        Fourier parameters, then random normal draws. Rows are scaled to the
        circulant row norm so the circulant seed is reproduced exactly.
        Candidates whose collocation matrix is rank deficient score -inf.

        :param problem: HelmholtzProblem
        :param N: Even basis size
        :param n_spin: Bits per weight
        :param budget: Maximum number of objective evaluations
        :param seed: Seed for the random restarts
        :param grid_points: s-grid used by every gap evaluation
        :return: Tuple (FourierBasisSet, GapProfile) of the best candidate
        """
        count = as_integer(budget)
        if count is None or count < 1:
            raise ValidationError('budget', f"Budget must be a positive integer, got {budget!r}")
        budget = count
        n_spin = self.encoder_service.validate_n_spin(n_spin)
        seeds = [self.ansatz_service.ca_basis(N), self.ansatz_service.tfa_basis(N)]
        self._check_qubits(N * n_spin, SpectralConfig.AA_MAX_QUBITS, 'Adiabatic ansatz optimization')

        row_norm = math.sqrt(N - 0.5) / N
        state = {'evaluations': 0, 'value': -np.inf, 'basis': None, 'profile': None}

        def objective(params):
            if state['evaluations'] >= budget:
                raise _BudgetExhausted()
            state['evaluations'] += 1
            try:
                basis = self.ansatz_service.aa_basis(N, params, row_norm=row_norm)
            except ValidationError:
                return np.inf
            system, _, qubo = self.encoder_service.encode(problem, basis, n_spin)
            if self.encoder_service.matrix_rank(system.a) < N:
                return np.inf
            profile = self.min_gap(self.encoder_service.to_ising(qubo),
                                   grid_points=grid_points, refine=True)
            if profile.g_min > state['value']:
                state.update(value=profile.g_min, basis=basis, profile=profile)
                logger.debug("AA evaluation %d: g_min improved to %.6e",
                             state['evaluations'], profile.g_min)
            return -profile.g_min

        rng = np.random.default_rng(seed)
        starts = [self.ansatz_service.basis_to_params(basis) for basis in seeds]
        restart = 0
        while state['evaluations'] < budget:
            if restart < len(starts):
                x0 = starts[restart]
            else:
                x0 = rng.normal(scale=row_norm, size=N * (N + 1))
            restart += 1
            try:
                so.minimize(objective, x0, method='Nelder-Mead',
                            options={'maxfev': budget - state['evaluations'],
                                     'xatol': 1e-8, 'fatol': 1e-10})
            except _BudgetExhausted:
                break

        if state['basis'] is None:
            raise OptimizationError(budget)
        logger.info("AA optimization finished after %d evaluations and %d restarts: g_min=%.6e",
                    state['evaluations'], restart, state['value'])
        return state['basis'], state['profile']

    # ==================== DYNAMICS ====================

    def simulate_anneal_dynamics(self, ising, T, steps=None):
        """
        Integrate i d/dt psi = H(t/T) psi from the ground state of the driver.

        Uses an exponential midpoint stepper, which is unitary for every step
        size; the step count is bounded so that dt * ||H|| stays below the
        configured phase per step.

        :param ising: IsingProblem
        :param T: Total annealing time, nonnegative
        :param steps: Number of time steps, computed from T when omitted
        :return: Probability of ending in the Ising ground manifold
        """
        r = ising.r
        self._check_qubits(r, SpectralConfig.DYNAMICS_MAX_QUBITS, 'Annealing dynamics')
        if not (math.isfinite(T) and T >= 0):
            raise ValidationError('T', f"Annealing time must be finite and nonnegative, got {T}")

        dim = 1 << r
        diagonal = self.problem_diagonal(ising)
        ground = diagonal <= diagonal.min() + SamplerConfig.TIE_TOL
        if T == 0:
            return float(np.count_nonzero(ground)) / dim

        bound = r + float(np.abs(diagonal).max())
        required = max(1, math.ceil(T * bound / SpectralConfig.MAX_STEP_PHASE))
        if steps is None:
            steps = required
        count = as_integer(steps)
        if count is None or count < required:
            raise ValidationError('steps', f"T={T} needs at least {required} steps to keep the phase per step below {SpectralConfig.MAX_STEP_PHASE}, got {steps}")
        steps = count
        dt = T / steps

        popcount = index_to_bits(np.arange(dim), r).sum(axis=1)
        psi = np.where(popcount % 2, -1.0, 1.0).astype(complex) / math.sqrt(dim)
        driver = _driver_matrix(r)
        midpoints = (np.arange(steps) + 0.5) / steps

        if dim <= DYNAMICS_DENSE_DIM:
            psi = self._evolve_dense(driver.toarray(), diagonal, midpoints, dt, psi)
        else:
            for s in midpoints:
                psi = expm_multiply(-1j * dt * self._interpolate(driver, diagonal, s), psi)

        drift = abs(np.linalg.norm(psi) - 1.0)
        if drift > SpectralConfig.NORM_DRIFT_TOL:
            raise NumericalError(f"Norm drift {drift:.3e} exceeds {SpectralConfig.NORM_DRIFT_TOL}")
        probability = float(np.sum(np.abs(psi[ground]) ** 2))
        logger.debug("Dynamics over %d qubits, T=%r, %d steps: success %.6f", r, T, steps, probability)
        return probability

    def _evolve_dense(self, driver, diagonal, midpoints, dt, psi):
        """
        Apply exp(-i dt H(s)) for every midpoint s, diagonalizing in batches.

        :param driver: Dense driver matrix
        :param diagonal: Problem diagonal
        :param midpoints: Schedule positions
        :param dt: Time step
        :param psi: Initial state
        :return: Final state
        """
        dim = driver.shape[0]
        batch = max(1, (1 << 20) // (dim * dim))
        for start in range(0, len(midpoints), batch):
            s = midpoints[start:start + batch, None, None]
            stack = (1.0 - s) * driver + s * np.diag(diagonal)
            energies, vectors = np.linalg.eigh(stack)
            phases = np.exp(-1j * dt * energies)
            for k in range(len(energies)):
                psi = vectors[k] @ (phases[k] * (vectors[k].T @ psi))
        return psi

    # ==================== HELPERS ====================

    def _interpolate(self, driver, diagonal, s):
        """Return (1-s) * driver + s * diag(diagonal) as CSR."""
        return ((1.0 - s) * driver + sparse.diags(s * diagonal)).tocsr()

    def _arpack_residual(self, H, error):
        """
        Largest residual norm of the partially converged eigenpairs.

        :param H: Matrix passed to the solver
        :param error: ArpackNoConvergence instance
        :return: Residual norm, or nan when nothing converged
        """
        values = getattr(error, 'eigenvalues', None)
        vectors = getattr(error, 'eigenvectors', None)
        if values is None or vectors is None or len(values) == 0:
            return float('nan')
        residuals = H @ vectors - vectors * values
        return float(np.linalg.norm(residuals, axis=0).max())

    def _check_qubits(self, r, cap, what):
        if r > cap:
            raise CapacityError(what, r, cap)

    def _validate_s(self, s):
        s = float(s)
        if not 0.0 <= s <= 1.0:
            raise ValidationError('s', f"Schedule position must lie in [0, 1], got {s}")
        return s

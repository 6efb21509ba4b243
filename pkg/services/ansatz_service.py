"""
Ansatz Service - Basis-function families for pseudospectral collocation.
TFA, CA and AA bases share one complex Fourier coefficient representation,
so differentiation is a multiplication by (ik)^order.
"""
import math

import numpy as np

from datamanager.data_models import AnsatzKind, CollocationGrid, FourierBasisSet
from exceptions import ValidationError
from utils.validation import as_integer


class AnsatzService:
    """Service class for building and evaluating basis sets"""

    # ==================== GRID ====================

    def collocation_grid(self, N):
        """
        Uniform collocation grid on [0, 2pi).

        :param N: Even number of points, at least 2
        :return: CollocationGrid with points 2 pi m / N
        """
        N = self._validate_size(N)
        points = 2.0 * math.pi * np.arange(N) / N
        points.setflags(write=False)
        return CollocationGrid(N=N, points=points)

    # ==================== BASIS FAMILIES ====================

    def tfa_basis(self, N):
        """
        Truncated Fourier basis: cos(nx) for n=1..N/2, then sin(nx) for n=1..N/2.

        :param N: Even basis size
        :return: FourierBasisSet of kind TFA
        """
        N = self._validate_size(N)
        half = N // 2
        coeffs = np.zeros((N, N + 1), dtype=complex)
        for n in range(1, half + 1):
            coeffs[n - 1, half + n] = 0.5
            coeffs[n - 1, half - n] = 0.5
            coeffs[half + n - 1, half + n] = -0.5j
            coeffs[half + n - 1, half - n] = 0.5j
        return FourierBasisSet(N=N, kind=AnsatzKind.TFA, coeffs=coeffs)

    def ca_basis(self, N):
        """
        Circulant basis h_n(x) = (1/N) sum_k e^{ik(x - x_n)} / c_k.

        c_k is 2 at |k| = N/2 and 1 otherwise, so h_n(x_m) = delta_nm.

        :param N: Even basis size
        :return: FourierBasisSet of kind CA
        """
        N = self._validate_size(N)
        k = np.arange(-N // 2, N // 2 + 1)
        c = np.where(np.abs(k) == N // 2, 2.0, 1.0)
        x_n = self.collocation_grid(N).points
        coeffs = np.exp(-1j * np.outer(x_n, k)) / (N * c)
        return FourierBasisSet(N=N, kind=AnsatzKind.CA, coeffs=coeffs)

    def aa_basis(self, N, params, row_norm=1.0):
        """
        Adiabatic ansatz built from free real parameters.

        Each row takes N+1 reals: Re g_0, then (Re g_k, Im g_k) for k=1..N/2.
        Negative frequencies are the conjugates, and each row is scaled to
        Euclidean norm row_norm. The default of 1.0 gives unit rows; the gap
        optimizer instead passes sqrt(N - 1/2) / N, the row norm of the
        circulant basis, so AA candidates stay on the same scale as CA.

        :param N: Even basis size
        :param params: Real vector of length N*(N+1)
        :param row_norm: Target norm of every coefficient row
        :return: FourierBasisSet of kind AA
        """
        N = self._validate_size(N)
        params = np.asarray(params, dtype=float).ravel()
        expected = N * (N + 1)
        if params.shape[0] != expected:
            raise ValidationError('params', f"Expected {expected} parameters for N={N}, got {params.shape[0]}")
        if not np.all(np.isfinite(params)):
            raise ValidationError('params', "Parameters must be finite")
        if not row_norm > 0:
            raise ValidationError('row_norm', "Row norm must be positive")

        half = N // 2
        rows = params.reshape(N, N + 1)
        positive = rows[:, 1::2] + 1j * rows[:, 2::2]

        coeffs = np.zeros((N, N + 1), dtype=complex)
        coeffs[:, half] = rows[:, 0]
        coeffs[:, half + 1:] = positive
        coeffs[:, :half] = positive[:, ::-1].conj()

        norms = np.linalg.norm(coeffs, axis=1)
        if np.any(norms == 0.0):
            zero_rows = np.flatnonzero(norms == 0.0).tolist()
            raise ValidationError('params', f"Rows {zero_rows} are all zero and cannot be normalized")
        coeffs *= (row_norm / norms)[:, None]
        return FourierBasisSet(N=N, kind=AnsatzKind.AA, coeffs=coeffs)

    def basis_to_params(self, basis):
        """
        Extract the AA parameter vector of any basis set.

        :param basis: FourierBasisSet
        :return: Real vector of length N*(N+1)
        """
        half = basis.N // 2
        rows = np.empty((basis.N, basis.N + 1))
        rows[:, 0] = basis.coeffs[:, half].real
        rows[:, 1::2] = basis.coeffs[:, half + 1:].real
        rows[:, 2::2] = basis.coeffs[:, half + 1:].imag
        return rows.ravel()

    def build_basis(self, kind, N, params=None, row_norm=1.0):
        """
        Build a basis of the requested family.

        :param kind: AnsatzKind or its name
        :param N: Even basis size
        :param params: AA parameters, required for kind AA
        :param row_norm: AA row norm
        :return: FourierBasisSet
        """
        kind = AnsatzKind.parse(kind)
        if kind == AnsatzKind.TFA:
            return self.tfa_basis(N)
        if kind == AnsatzKind.CA:
            return self.ca_basis(N)
        if params is None:
            raise ValidationError('aa_params', "The adiabatic ansatz needs a parameter vector")
        return self.aa_basis(N, params, row_norm=row_norm)

    # ==================== EVALUATION ====================

    def eval_basis(self, basis, order, x):
        """
        Evaluate every basis function (or a derivative) at x.

        :param basis: FourierBasisSet
        :param order: Derivative order 0, 1 or 2
        :param x: Scalar or array of points
        :return: Vector of length N for scalar x, (len(x), N) matrix otherwise
        """
        if order not in (0, 1, 2):
            raise ValidationError('order', f"Derivative order must be 0, 1 or 2, got {order}")

        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = basis.wavenumbers
        phases = np.exp(1j * np.outer(x, k))
        if order:
            phases = phases * (1j * k) ** order
        values = (phases @ basis.coeffs.T).real
        return values[0] if scalar else values

    def reconstruct_solution(self, basis, weights, x):
        """
        Evaluate u_N(x) = sum_n w_n basis_n(x).

        :param basis: FourierBasisSet
        :param weights: Real vector of length N
        :param x: Scalar or array of points
        :return: Float for scalar x, array otherwise
        """
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (basis.N,):
            raise ValidationError('weights', f"Expected {basis.N} weights, got shape {weights.shape}")
        values = self.eval_basis(basis, 0, x) @ weights
        return float(values) if np.ndim(x) == 0 else values

    def _validate_size(self, N):
        """
        Validate a basis or grid size.

        :param N: Requested size
        :return: Integer size
        """
        size = as_integer(N)
        if size is None:
            raise ValidationError('N', f"Basis size must be an integer, got {N!r}")
        if size < 2 or size % 2:
            raise ValidationError('N', f"Basis size must be even and >= 2, got {size}")
        return size

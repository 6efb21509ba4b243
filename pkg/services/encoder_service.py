"""
Encoder Service - Collocation system, fixed-point binarization and QUBO/Ising construction.
Also computes the algebraic diagnostics reported per experiment (rank, dynamic range).
"""
import logging

import numpy as np

from config import EncoderConfig
from datamanager.data_models import (
    BinarizedSystem, IsingProblem, LinearSystem, QuboProblem
)
from exceptions import ValidationError
from services.ansatz_service import AnsatzService
from services.problem_service import ProblemService
from utils.validation import as_integer

logger = logging.getLogger(__name__)


class EncoderService:
    """Service class turning a Helmholtz problem into a QUBO instance"""

    def __init__(self):
        self.ansatz_service = AnsatzService()
        self.problem_service = ProblemService()

    # ==================== LINEAR SYSTEM ====================

    def assemble_system(self, problem, basis):
        """
        Assemble the (N+2) x N collocation system a w = b.

        Rows 0..N-1 enforce phi'' + tau^2 phi = F at the grid, row N the
        value u(0) and row N+1 the slope u'(0).

        :param problem: HelmholtzProblem
        :param basis: FourierBasisSet
        :return: LinearSystem
        """
        grid = self.ansatz_service.collocation_grid(basis.N).points
        tau_sq = problem.tau ** 2

        operator_rows = (self.ansatz_service.eval_basis(basis, 2, grid)
                         + tau_sq * self.ansatz_service.eval_basis(basis, 0, grid))
        value_row = self.ansatz_service.eval_basis(basis, 0, 0.0)
        slope_row = self.ansatz_service.eval_basis(basis, 1, 0.0)

        a = np.vstack([operator_rows, value_row, slope_row])
        b = np.concatenate([
            np.atleast_1d(self.problem_service.eval_driving(problem.driving, grid)),
            [problem.alpha, problem.beta]
        ])
        a.setflags(write=False)
        b.setflags(write=False)
        return LinearSystem(a=a, b=b, N=basis.N, tau=problem.tau,
                            alpha=problem.alpha, beta=problem.beta, kind=basis.kind)

    # ==================== BINARIZATION ====================

    def binarize_system(self, system, n_spin):
        """
        Expand every weight into n_spin bits, w = -bit0 + sum_l bit_l / 2^l.

        Columns are l-major: all bit-0 columns first, then all bit-1 columns.

        :param system: LinearSystem
        :param n_spin: Bits per weight, at least 2
        :return: BinarizedSystem
        """
        n_spin = self.validate_n_spin(n_spin)
        blocks = [-system.a] + [system.a / 2.0 ** level for level in range(1, n_spin)]
        A = np.hstack(blocks)
        A.setflags(write=False)
        return BinarizedSystem(A=A, b=system.b, n_spin=n_spin, N=system.N)

    def decode_bits(self, bits, n_spin):
        """
        Decode l-major bitstrings into weights.

        :param bits: Bitstring of length r, or an array of bitstrings on the last axis
        :param n_spin: Bits per weight
        :return: Weights of length r / n_spin (same leading shape as bits)
        """
        n_spin = self.validate_n_spin(n_spin)
        bits = np.asarray(bits, dtype=float)
        r = bits.shape[-1]
        if r % n_spin:
            raise ValidationError('bits', f"Length {r} is not a multiple of n_spin={n_spin}")
        if np.any((bits != 0.0) & (bits != 1.0)):
            raise ValidationError('bits', "Bits must be 0 or 1")

        levels = bits.reshape(bits.shape[:-1] + (n_spin, r // n_spin))
        scales = np.array([-1.0] + [2.0 ** -level for level in range(1, n_spin)])
        return np.tensordot(levels, scales, axes=([-2], [0]))

    def encode_weights(self, weights, n_spin):
        """
        Inverse of decode_bits for representable weights.

        :param weights: Real vector with entries in [-1, 1 - 2^(1-n_spin)] on the 2^(1-n_spin) lattice
        :param n_spin: Bits per weight
        :return: Integer bit array of length N * n_spin
        """
        n_spin = self.validate_n_spin(n_spin)
        weights = np.asarray(weights, dtype=float).ravel()
        steps = 2 ** (n_spin - 1)

        sign = (weights < 0).astype(int)
        scaled = (weights + sign) * steps
        levels = np.rint(scaled).astype(int)
        if np.any(np.abs(scaled - levels) > 1e-9) or np.any(levels < 0) or np.any(levels >= steps):
            raise ValidationError('weights', f"Weights {weights.tolist()} are not representable with n_spin={n_spin}")

        bits = [sign] + [(levels >> (n_spin - 1 - level)) & 1 for level in range(1, n_spin)]
        return np.concatenate(bits)

    # ==================== QUBO / ISING ====================

    def build_qubo(self, binarized):
        """
        Least-squares QUBO of A w = b.

        :param binarized: BinarizedSystem
        :return: QuboProblem with Q = A^T A, L = -2 b^T A, C0 = b^T b
        """
        A = binarized.A
        b = binarized.b
        Q = A.T @ A
        Q = 0.5 * (Q + Q.T)
        return QuboProblem(Q=Q, L=-2.0 * (b @ A), C0=float(b @ b))

    def compact_qubo(self, qubo):
        """
        Fold the linear terms onto the diagonal, using w^2 = w for bits.

        :param qubo: QuboProblem
        :return: r x r matrix Q + diag(L)
        """
        return np.array(qubo.Q) + np.diag(qubo.L)

    def to_ising(self, qubo):
        """
        Spin form under sigma = 2w - 1.

        :param qubo: QuboProblem
        :return: IsingProblem with a zero-diagonal coupling matrix
        """
        Q = np.array(qubo.Q)
        diagonal = np.diag(Q).copy()
        Qtilde = Q / 4.0
        np.fill_diagonal(Qtilde, 0.0)
        Ltilde = 0.5 * Q.sum(axis=1) + 0.5 * qubo.L
        Ctilde0 = 0.25 * Q.sum() + 0.25 * diagonal.sum() + 0.5 * qubo.L.sum() + qubo.C0
        return IsingProblem(Qtilde=Qtilde, Ltilde=Ltilde, Ctilde0=Ctilde0)

    def encode(self, problem, basis, n_spin):
        """
        Run the whole encoding chain.

        :param problem: HelmholtzProblem
        :param basis: FourierBasisSet
        :param n_spin: Bits per weight
        :return: Tuple (LinearSystem, BinarizedSystem, QuboProblem)
        """
        system = self.assemble_system(problem, basis)
        binarized = self.binarize_system(system, n_spin)
        qubo = self.build_qubo(binarized)
        logger.debug("Encoded %s with %s basis: N=%d n_spin=%d r=%d",
                     problem.name, basis.kind.value, basis.N, n_spin, qubo.r)
        return system, binarized, qubo

    # ==================== DIAGNOSTICS ====================

    def matrix_rank(self, a, tol=EncoderConfig.RANK_TOL):
        """
        Numerical rank from singular values.

        :param a: Real matrix
        :param tol: Relative cutoff, scaled by the largest singular value and max(dims)
        :return: Number of singular values above the cutoff
        """
        if not tol > 0:
            raise ValidationError('tol', "Rank tolerance must be positive")
        a = np.asarray(a, dtype=float)
        if a.size == 0:
            return 0
        singular = np.linalg.svd(a, compute_uv=False)
        if singular[0] == 0.0:
            return 0
        return int(np.sum(singular > tol * singular[0] * max(a.shape)))

    def dynamic_range(self, matrix, zero_threshold=EncoderConfig.DR_ZERO_THRESHOLD, mode='levels'):
        """
        Dynamic range of a matrix in bits.

        In 'levels' mode the distinct entry values, zero included, are sorted
        and DR = log2(spread / resolution): spread is the largest minus the
        smallest level and resolution the closest pair of neighbouring
        levels. Levels closer than zero_threshold, scaled by the largest
        magnitude once that exceeds 1, count as one level. Reported
        DR values use this mode; for entries {8, 1} it gives log2(8 / 1) = 3.

        'ratio' mode is the plain log2(max |entry| / min nonzero |entry|).

        :param matrix: Real matrix, usually the compact QUBO
        :param zero_threshold: Level merge distance, and the magnitude treated as zero in ratio mode
        :param mode: 'levels' or 'ratio'
        :return: Dynamic range in bits
        """
        values = np.asarray(matrix, dtype=float).ravel()
        if mode == 'ratio':
            magnitudes = np.abs(values)
            nonzero = magnitudes[magnitudes > zero_threshold]
            if nonzero.size == 0:
                raise ValidationError('matrix', f"No entry exceeds the zero threshold {zero_threshold}")
            return float(np.log2(nonzero.max() / nonzero.min()))
        if mode != 'levels':
            raise ValidationError('mode', f"Unknown dynamic range mode '{mode}', expected 'levels' or 'ratio'")

        merge = zero_threshold * max(1.0, float(np.abs(values).max(initial=0.0)))
        levels = np.unique(np.append(values, 0.0))
        levels = levels[np.concatenate(([True], np.diff(levels) > merge))]
        if levels.size < 2:
            raise ValidationError('matrix', f"No entry exceeds the zero threshold {zero_threshold}")
        return float(np.log2((levels[-1] - levels[0]) / np.diff(levels).min()))

    def validate_n_spin(self, n_spin):
        """
        Validate the bit depth.

        :param n_spin: Requested bits per weight
        :return: Integer bit depth
        """
        count = as_integer(n_spin)
        if count is None:
            raise ValidationError('n_spin', f"Bit depth must be an integer, got {n_spin!r}")
        if count < EncoderConfig.MIN_SPINS:
            raise ValidationError('n_spin', f"Bit depth must be at least {EncoderConfig.MIN_SPINS} to carry sign and magnitude, got {count}")
        return count

"""
Sampler Service - Energy evaluation, exhaustive search and Metropolis simulated annealing.
Bitstrings are l-major and bitstring index j maps to bits w_i = (j >> i) & 1.
"""
import logging

import numpy as np

from config import SamplerConfig
from datamanager.data_models import (
    AnnealSchedule, BruteForceResult, Sample, SampleSet
)
from exceptions import CapacityError, ValidationError
from utils.validation import as_integer

logger = logging.getLogger(__name__)


def index_to_bits(indices, r):
    """
    Expand integer state indices into bit rows.

    :param indices: Integer array of state indices
    :param r: Number of bits
    :return: (len(indices), r) array of 0/1 integers
    """
    indices = np.asarray(indices, dtype=np.int64)
    return ((indices[:, None] >> np.arange(r, dtype=np.int64)) & 1).astype(np.int8)


class SamplerService:
    """Service class for solving QUBO instances"""

    # ==================== ENERGIES ====================

    def qubo_energy(self, qubo, bits):
        """
        QUBO energy w^T Q w + L w + C0.

        :param qubo: QuboProblem
        :param bits: Bitstring of length r, or (m, r) array of bitstrings
        :return: Float for one bitstring, array for many
        """
        bits, single = self._as_bits(bits, qubo.r)
        energies = ((bits @ qubo.Q) * bits).sum(axis=1) + bits @ qubo.L + qubo.C0
        return float(energies[0]) if single else energies

    def ising_energy(self, ising, spins):
        """
        Ising energy s^T Qtilde s + Ltilde s + Ctilde0.

        :param ising: IsingProblem
        :param spins: Spin vector of +-1 values, or (m, r) array
        :return: Float for one configuration, array for many
        """
        spins = np.asarray(spins, dtype=float)
        single = spins.ndim == 1
        spins = np.atleast_2d(spins)
        if spins.shape[1] != ising.r:
            raise ValidationError('spins', f"Expected {ising.r} spins, got {spins.shape[1]}")
        energies = (((spins @ ising.Qtilde) * spins).sum(axis=1)
                    + spins @ ising.Ltilde + ising.Ctilde0)
        return float(energies[0]) if single else energies

    # ==================== EXACT SEARCH ====================

    def brute_force(self, qubo, max_qubits=None):
        """
        Exact minimum over all 2^r bitstrings.

        :param qubo: QuboProblem
        :param max_qubits: Size cap, defaults to the configured brute-force cap
        The first pass records the minimum of every chunk; the second revisits
        only chunks reaching the global minimum, counting every tie and
        keeping at most SamplerConfig.MAX_GROUND_STATES of them.

        :return: BruteForceResult with the bitstrings within the tie tolerance
        """
        cap = SamplerConfig.BRUTE_FORCE_MAX_QUBITS if max_qubits is None else max_qubits
        r = qubo.r
        if r > cap:
            raise CapacityError('Brute force', r, cap,
                                hint='use the simulated annealing sampler instead')

        starts = range(0, 1 << r, SamplerConfig.BRUTE_FORCE_CHUNK)
        chunk_mins = np.array([self._chunk_energies(qubo, start)[1].min() for start in starts])
        best = float(chunk_mins.min())
        threshold = best + SamplerConfig.TIE_TOL

        kept = []
        degeneracy = 0
        room = SamplerConfig.MAX_GROUND_STATES
        for start in np.asarray(starts)[chunk_mins <= threshold]:
            indices, energies = self._chunk_energies(qubo, int(start))
            ground = indices[np.flatnonzero(energies <= threshold)]
            degeneracy += ground.size
            if room > 0:
                kept.append(ground[:room])
                room -= kept[-1].size

        ground = np.concatenate(kept)
        states = tuple(tuple(int(bit) for bit in row) for row in index_to_bits(ground, r))
        logger.debug("Brute force over %d qubits: E0=%r, degeneracy %d", r, best, degeneracy)
        return BruteForceResult(ground_energy=best, ground_states=states, degeneracy=degeneracy)

    def _chunk_energies(self, qubo, start):
        """
        Energies of one block of consecutive state indices.

        :param qubo: QuboProblem
        :param start: First index of the block
        :return: Tuple (indices, energies)
        """
        stop = min(start + SamplerConfig.BRUTE_FORCE_CHUNK, 1 << qubo.r)
        indices = np.arange(start, stop, dtype=np.int64)
        energies = np.atleast_1d(self.qubo_energy(qubo, index_to_bits(indices, qubo.r)))
        return indices, energies

    # ==================== SIMULATED ANNEALING ====================

    def default_schedule(self, qubo, sweeps=None):
        """
        Geometric schedule scaled to the mean absolute nonzero entry of the compact QUBO.

        :param qubo: QuboProblem
        :param sweeps: Number of sweeps, defaults to the configured value
        :return: AnnealSchedule
        """
        compact = np.array(qubo.Q) + np.diag(qubo.L)
        magnitudes = np.abs(compact[compact != 0.0])
        scale = float(magnitudes.mean()) if magnitudes.size else 1.0
        return AnnealSchedule(
            beta_start=SamplerConfig.BETA_START_SCALE / scale,
            beta_end=SamplerConfig.BETA_END_SCALE / scale,
            sweeps=SamplerConfig.DEFAULT_SWEEPS if sweeps is None else int(sweeps)
        )

    def simulated_annealing(self, qubo, schedule=None, n_runs=SamplerConfig.DEFAULT_RUNS,
                            seed=SamplerConfig.DEFAULT_SEED):
        """
        Metropolis annealing with single-bit flips, all runs advanced together.

        Each run owns a generator spawned from SeedSequence(seed), so a run's
        trajectory does not depend on how many other runs share the batch.

        :param qubo: QuboProblem
        :param schedule: AnnealSchedule, defaults to default_schedule(qubo)
        :param n_runs: Number of independent runs
        :param seed: Base seed
        :return: SampleSet sorted by ascending energy
        """
        count = as_integer(n_runs)
        if count is None or count < 1:
            raise ValidationError('runs', f"Number of runs must be a positive integer, got {n_runs!r}")
        n_runs = count
        if schedule is None:
            schedule = self.default_schedule(qubo)

        r = qubo.r
        compact = np.array(qubo.Q) + np.diag(qubo.L)
        diagonal = np.diag(compact).copy()
        coupling = compact - np.diag(diagonal)

        generators = [np.random.default_rng(child)
                      for child in np.random.SeedSequence(seed).spawn(n_runs)]
        state = np.array([rng.integers(0, 2, size=r) for rng in generators], dtype=float)
        field = state @ coupling
        runs = np.arange(n_runs)
        betas = schedule.betas()
        block = SamplerConfig.SWEEP_BLOCK

        for block_start in range(0, len(betas), block):
            block_betas = betas[block_start:block_start + block]
            n_block = len(block_betas)
            orders = np.stack([rng.permuted(np.tile(np.arange(r), (n_block, 1)), axis=1)
                               for rng in generators])
            uniforms = np.stack([rng.random((n_block, r)) for rng in generators])

            for sweep, beta in enumerate(block_betas):
                for position in range(r):
                    flip = orders[:, sweep, position]
                    current = state[runs, flip]
                    direction = 1.0 - 2.0 * current
                    delta = direction * (diagonal[flip] + 2.0 * field[runs, flip])
                    accept = uniforms[:, sweep, position] < np.exp(-beta * np.maximum(delta, 0.0))
                    if not accept.any():
                        continue
                    step = np.where(accept, direction, 0.0)
                    state[runs, flip] += step
                    field += step[:, None] * coupling[flip]

        final = state.astype(np.int8)
        unique, counts = np.unique(final, axis=0, return_counts=True)
        energies = np.atleast_1d(self.qubo_energy(qubo, unique))
        order = np.lexsort(tuple(unique[:, ::-1].T) + (energies,))

        samples = tuple(
            Sample(bits=tuple(int(bit) for bit in unique[i]), energy=float(energies[i]),
                   count=int(counts[i]))
            for i in order
        )
        logger.debug("Annealed %d runs over %d qubits: best %r, %d distinct states",
                     n_runs, r, samples[0].energy, len(samples))
        return SampleSet(samples=samples, n_runs=n_runs, seed=seed, schedule=schedule)

    def _as_bits(self, bits, r):
        """
        Validate one or many bitstrings against the problem size.

        :param bits: Bitstring or array of bitstrings
        :param r: Expected length
        :return: Tuple (2-D float array, whether a single bitstring was given)
        """
        bits = np.asarray(bits, dtype=float)
        single = bits.ndim == 1
        bits = np.atleast_2d(bits)
        if bits.shape[1] != r:
            raise ValidationError('bits', f"Expected {r} bits, got {bits.shape[1]}")
        return bits, single

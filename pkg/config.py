"""
Configuration constants for the Helmholtz QUBO toolkit.
Centralizes tolerances, caps and defaults; caps can be overridden from the environment.
"""
import os

from dotenv import load_dotenv

load_dotenv()


def _env_int(name, default):
    """
    Read an integer override from the environment.

    :param name: Environment variable name
    :param default: Value used when the variable is unset
    :return: Integer value
    """
    value = os.getenv(name)
    return int(value) if value else default


class EncoderConfig:
    """Configuration for the collocation system and QUBO diagnostics"""

    # Relative singular value cutoff, scaled by max(dims)
    RANK_TOL = 1e-10

    # Entries at or below this magnitude count as zero in DR
    DR_ZERO_THRESHOLD = 1e-12

    MIN_SPINS = 2


class SamplerConfig:
    """Configuration for simulated annealing and brute force"""

    BRUTE_FORCE_MAX_QUBITS = _env_int('HQ_BRUTE_FORCE_MAX_QUBITS', 26)
    BRUTE_FORCE_CHUNK = 1 << 16
    # Ground states kept per brute-force result; the degeneracy count is exact
    MAX_GROUND_STATES = 1024
    TIE_TOL = 1e-12

    DEFAULT_RUNS = 1000
    DEFAULT_SWEEPS = 1000
    DEFAULT_SEED = 0

    # Inverse temperatures are these factors over the mean |nonzero QUBO entry|
    BETA_START_SCALE = 0.1
    BETA_END_SCALE = 50.0

    # Sweeps drawn per generator call
    SWEEP_BLOCK = 50


class SpectralConfig:
    """Configuration for the annealing Hamiltonian and its spectrum"""

    MAX_QUBITS = _env_int('HQ_SPECTRAL_MAX_QUBITS', 16)
    # Dense eigh up to this dimension, ARPACK above it
    DENSE_LIMIT = _env_int('HQ_DENSE_LIMIT', 512)
    ARPACK_MAXITER = 5000
    ARPACK_TOL = 1e-12
    ARPACK_NCV = 20
    ARPACK_SEED = 0

    # Threads evaluating s-grid points of one scan
    GAP_WORKERS = _env_int('HQ_GAP_WORKERS', min(4, os.cpu_count() or 1))

    GRID_POINTS = 201
    MIN_GRID_POINTS = 11
    REFINE_TOL = 1e-4
    DEGENERACY_TOL = 1e-10

    DYNAMICS_MAX_QUBITS = 10
    NORM_DRIFT_TOL = 1e-8
    MAX_STEP_PHASE = 0.5

    AA_MAX_QUBITS = 14
    AA_GRID_POINTS = 101
    AA_BUDGET = 2000


class HarnessConfig:
    """Configuration for experiments and reports"""

    MSE_POINTS = 100
    SR_TOL = 1e-9

    METRIC_COLUMNS = ['rank', 'DR', 'g_min', 'SR_sa', 'MSE_sa', 'MSE_best']
    ID_COLUMNS = ['scenario', 'ansatz', 'N', 'n_spin']
    EXTRA_COLUMNS = ['r', 'degeneracy', 'sr_relative', 'gap_skipped']

    CONFIG_KEYS = {
        'scenario', 'ansatz', 'n', 'n_spin', 'sampler', 'runs', 'seed',
        'sweeps', 'beta_start', 'beta_end', 'gap', 'gap_grid', 'gap_refine',
        'mse_points', 'aa_params', 'tau', 'alpha', 'beta', 'driving'
    }


class AppConfig:
    """Main application configuration"""

    DEBUG = False
    HOST = "127.0.0.1"
    PORT = _env_int('HQ_PORT', 5002)

"""
Experiment Service - Metrics and orchestration of one or many scenario runs.
Every stage of a run is timed and its failures name the stage.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from config import HarnessConfig, SamplerConfig, SpectralConfig
from datamanager import FileDataManager
from datamanager.data_models import AnnealSchedule, ExperimentReport
from exceptions import ReferenceEnergyError, ValidationError
from services.ansatz_service import AnsatzService
from services.encoder_service import EncoderService
from services.problem_service import ProblemService
from services.sampler_service import SamplerService
from services.scenario_service import ScenarioService
from services.spectral_service import SpectralService
from utils.decorators import pipeline_stage
from utils.validation import as_integer

logger = logging.getLogger(__name__)


@dataclass
class _Run:
    """Working state of one scenario run"""
    config: object
    timing: dict = field(default_factory=dict)
    problem: object = None
    solution: object = None
    basis: object = None
    system: object = None
    qubo: object = None
    brute: object = None
    samples: object = None


class ExperimentService:
    """Service class for running experiments and emitting reports"""

    def __init__(self):
        self.problem_service = ProblemService()
        self.ansatz_service = AnsatzService()
        self.encoder_service = EncoderService()
        self.sampler_service = SamplerService()
        self.spectral_service = SpectralService()
        self.scenario_service = ScenarioService()
        self.data_manager = FileDataManager()

    # ==================== METRICS ====================

    def mse(self, exact, basis, weights, n_points=HarnessConfig.MSE_POINTS):
        """
        Mean squared error between the exact and the reconstructed solution.

        Points are y_i = 2 pi i / (n+1), i = 1..n, strictly inside (0, 2pi).

        :param exact: ClosedFormSolution
        :param basis: FourierBasisSet
        :param weights: Real vector of length N
        :param n_points: Number of sample points, at least 2
        :return: MSE
        """
        count = as_integer(n_points)
        if count is None or count < 2:
            raise ValidationError('mse_points', f"Need at least 2 points, got {n_points!r}")
        n_points = count
        y = 2.0 * math.pi * np.arange(1, n_points + 1) / (n_points + 1)
        exact_values = self.problem_service.eval_exact(exact, y)
        approx_values = self.ansatz_service.reconstruct_solution(basis, weights, y)
        return float(np.mean((exact_values - approx_values) ** 2))

    def success_rate(self, samples, ground_energy, tol=None):
        """
        Fraction of runs that reached the reference ground energy.

        :param samples: SampleSet
        :param ground_energy: Reference energy (brute force or analytic)
        :param tol: Absolute tolerance, defaults to 1e-9 * max(1, |ground_energy|)
        :return: Fraction in [0, 1]
        """
        if ground_energy is None:
            raise ReferenceEnergyError()
        if tol is None:
            tol = HarnessConfig.SR_TOL * max(1.0, abs(ground_energy))
        hits = sum(sample.count for sample in samples.samples
                   if sample.energy <= ground_energy + tol)
        return hits / samples.n_runs

    # ==================== ORCHESTRATION ====================

    def run_scenario(self, config):
        """
        Encode, solve and measure one configuration.

        :param config: ScenarioConfig
        :return: ExperimentReport
        """
        run = _Run(config=config)
        self._prepare_problem(run)
        self._prepare_basis(run)
        self._encode(run)
        rank, dynamic_range = self._diagnose(run)

        report = ExperimentReport(
            scenario=config.scenario, ansatz=config.ansatz.value, N=config.N,
            n_spin=config.n_spin, r=run.qubo.r, rank=rank, DR=dynamic_range
        )
        self._solve_exactly(run, report)
        self._anneal(run, report)
        self._measure_gap(run, report)
        report.timing = dict(run.timing)

        logger.info("Finished %s/%s N=%d n_spin=%d: rank=%d DR=%.3f g_min=%s SR=%s",
                    config.scenario, config.ansatz.value, config.N, config.n_spin,
                    rank, dynamic_range, report.g_min, report.SR_sa)
        return report

    def run_sweep(self, scenario, ansatzes, sizes, n_spins, **options):
        """
        Cartesian product of ansatz x N x n_spin for one scenario.

        :param scenario: Scenario id
        :param ansatzes: Iterable of ansatz names
        :param sizes: Iterable of basis sizes
        :param n_spins: Iterable of bit depths
        :param options: Further config keys shared by every run
        :return: List of ExperimentReport
        """
        reports = []
        for ansatz, N, n_spin in itertools.product(ansatzes, sizes, n_spins):
            values = dict(options, scenario=scenario, ansatz=ansatz, n=N, n_spin=n_spin)
            config = self.scenario_service.build_config(values)
            reports.append(self.run_scenario(config))
        return reports

    def emit_report(self, reports, path, fmt='csv'):
        """
        Write reports as CSV or JSON.

        :param reports: List of ExperimentReport
        :param path: Output path
        :param fmt: 'csv' or 'json'
        :return: Path written
        """
        return self.data_manager.write_reports(reports, path, fmt)

    # ==================== STAGES ====================

    @pipeline_stage('config')
    def _prepare_problem(self, run):
        config = run.config
        if config.N < 2 or config.N % 2:
            raise ValidationError('n', f"Basis size must be even and >= 2, got {config.N}")
        self.encoder_service.validate_n_spin(config.n_spin)
        run.problem = config.problem or self.scenario_service.get_scenario(config.scenario)
        run.solution = self.problem_service.exact_solution(run.problem)

    @pipeline_stage('basis')
    def _prepare_basis(self, run):
        config = run.config
        run.basis = self.ansatz_service.build_basis(config.ansatz, config.N,
                                                    params=config.aa_params,
                                                    row_norm=config.aa_row_norm)

    @pipeline_stage('encode')
    def _encode(self, run):
        run.system, _, run.qubo = self.encoder_service.encode(run.problem, run.basis,
                                                              run.config.n_spin)

    @pipeline_stage('diagnostics')
    def _diagnose(self, run):
        rank = self.encoder_service.matrix_rank(run.system.a)
        dynamic_range = self.encoder_service.dynamic_range(
            self.encoder_service.compact_qubo(run.qubo))
        return rank, dynamic_range

    @pipeline_stage('brute_force')
    def _solve_exactly(self, run, report):
        if run.qubo.r > SamplerConfig.BRUTE_FORCE_MAX_QUBITS:
            logger.warning("r=%d is above the brute-force cap; MSE_best and exact SR are unavailable",
                           run.qubo.r)
            return
        run.brute = self.sampler_service.brute_force(run.qubo)
        report.degeneracy = run.brute.degeneracy
        # degenerate manifolds report the ground state closest to the exact solution
        weights = self.encoder_service.decode_bits(
            np.array(run.brute.ground_states), run.config.n_spin)
        report.MSE_best = min(self.mse(run.solution, run.basis, w, run.config.mse_points)
                              for w in weights)

    @pipeline_stage('sample')
    def _anneal(self, run, report):
        config = run.config
        if config.sampler != 'sa':
            return

        schedule = self.sampler_service.default_schedule(run.qubo, sweeps=config.sweeps)
        if config.beta_start is not None or config.beta_end is not None:
            schedule = AnnealSchedule(
                beta_start=schedule.beta_start if config.beta_start is None else config.beta_start,
                beta_end=schedule.beta_end if config.beta_end is None else config.beta_end,
                sweeps=schedule.sweeps
            )
        run.samples = self.sampler_service.simulated_annealing(
            run.qubo, schedule=schedule, n_runs=config.runs, seed=config.seed)

        if run.brute is not None:
            reference = run.brute.ground_energy
        else:
            reference = run.samples.lowest.energy
            report.sr_relative = True
            logger.warning("SR for r=%d is relative to the best sampled energy", run.qubo.r)
        report.SR_sa = self.success_rate(run.samples, reference)

        weights = self.encoder_service.decode_bits(run.samples.lowest.bits, config.n_spin)
        report.MSE_sa = self.mse(run.solution, run.basis, weights, config.mse_points)

    @pipeline_stage('gap')
    def _measure_gap(self, run, report):
        config = run.config
        if not config.gap:
            report.gap_skipped = 'disabled'
            return
        if run.qubo.r > SpectralConfig.MAX_QUBITS:
            report.gap_skipped = f"r={run.qubo.r} exceeds spectral cap {SpectralConfig.MAX_QUBITS}"
            logger.warning("Skipping g_min: %s", report.gap_skipped)
            return
        profile = self.spectral_service.min_gap(self.encoder_service.to_ising(run.qubo),
                                                grid_points=config.gap_grid,
                                                refine=config.gap_refine)
        report.g_min = profile.g_min
        if profile.degenerate_flag:
            report.gap_skipped = 'degenerate ground manifold'

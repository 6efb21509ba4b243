"""
Command-line surface of the Helmholtz QUBO toolkit.
Exit codes: 0 on success, 2 on precondition errors, 3 on numerical failures.
"""
import logging
from pathlib import Path

import click
import numpy as np
from dotenv import dotenv_values

from app import main as run_server
from config import AppConfig, SpectralConfig
from datamanager import FileDataManager
from services.ansatz_service import AnsatzService
from services.encoder_service import EncoderService
from services.experiment_service import ExperimentService
from services.problem_service import ProblemService
from services.scenario_service import ScenarioService
from services.spectral_service import SpectralService
from utils.decorators import handle_cli_errors
from utils.formatting import format_metric

ansatz_service = AnsatzService()
encoder_service = EncoderService()
experiment_service = ExperimentService()
problem_service = ProblemService()
scenario_service = ScenarioService()
spectral_service = SpectralService()
data_manager = FileDataManager()


def collect_config(config_path, **options):
    """
    Merge a KEY=VALUE config file with explicitly passed options.

    :param config_path: Optional config file
    :param options: Config keys taken from command-line flags (None means unset)
    :return: ScenarioConfig
    """
    values = {}
    base_dir = None
    if config_path:
        values.update({key.lower(): value for key, value in dotenv_values(config_path).items()})
        base_dir = Path(config_path).parent
    values.update({key: value for key, value in options.items() if value is not None})
    if options.get('aa_params'):
        values['aa_params'] = str(Path(options['aa_params']).resolve())
    return scenario_service.build_config(values, base_dir=base_dir)


def build_encoding(config):
    """
    Basis and encoding of a configuration.

    :param config: ScenarioConfig
    :return: Tuple (basis, system, qubo)
    """
    basis = ansatz_service.build_basis(config.ansatz, config.N, params=config.aa_params,
                                       row_norm=config.aa_row_norm)
    system, _, qubo = encoder_service.encode(config.problem, basis, config.n_spin)
    return basis, system, qubo


def echo_report(report):
    """Print one report as a status line."""
    click.echo(f"📊 {report.scenario}/{report.ansatz} N={report.N} n_spin={report.n_spin} "
               f"r={report.r}: rank={report.rank} DR={format_metric(report.DR)} "
               f"g_min={format_metric(report.g_min)} SR_sa={format_metric(report.SR_sa)} "
               f"MSE_sa={format_metric(report.MSE_sa)} MSE_best={format_metric(report.MSE_best)}")
    if report.gap_skipped:
        click.echo(f"⚠️  g_min note: {report.gap_skipped}")
    if report.sr_relative:
        click.echo("⚠️  SR is relative to the best sampled energy")


def encoding_options(f):
    """Shared options selecting a scenario and its encoding."""
    options = [
        click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                     help='KEY=VALUE config file'),
        click.option('--id', 'scenario', help='Scenario id (exp1..exp5 or custom)'),
        click.option('--ansatz', type=click.Choice(['tfa', 'ca', 'aa'], case_sensitive=False)),
        click.option('--n', 'n', type=int, help='Number of basis functions (even)'),
        click.option('--nspin', 'n_spin', type=int, help='Bits per weight'),
        click.option('--aa-params', 'aa_params', type=click.Path(exists=True, dir_okay=False),
                     help='AA parameter JSON file'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Log pipeline progress')
def cli(verbose):
    """Encode 1-D Helmholtz problems as QUBOs and analyse them."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')


# ==================== SCENARIOS ====================

@cli.group()
def scenario():
    """Built-in scenarios and experiment runs."""


@scenario.command('list')
@handle_cli_errors
def scenario_list():
    """List the built-in scenarios."""
    for problem in scenario_service.builtin_scenarios():
        click.echo(f"{problem.name}  tau={problem.tau:g} alpha={problem.alpha:g} "
                   f"beta={problem.beta:g}  {scenario_service.describe(problem)}")


@scenario.command('show')
@click.option('--id', 'scenario_id', required=True, help='Scenario id')
@handle_cli_errors
def scenario_show(scenario_id):
    """Print a scenario and its closed-form solution."""
    problem = scenario_service.get_scenario(scenario_id)
    solution = problem_service.exact_solution(problem)
    click.echo(f"📐 {problem.name}: u'' + {problem.tau ** 2:g} u = F, "
               f"u(0)={problem.alpha!r}, u'(0)={problem.beta!r}")
    for k, a_k, b_k in problem.driving.terms:
        click.echo(f"   F term k={k}: {a_k!r} cos + {b_k!r} sin")
    click.echo(f"✅ u(x) = {solution.c1!r} cos({solution.tau:g}x) + {solution.c2!r} sin({solution.tau:g}x)")
    for k, a_k, b_k in solution.particular.terms:
        click.echo(f"   + {a_k!r} cos({k}x) + {b_k!r} sin({k}x)")
    for k, x_cos, x_sin in solution.secular:
        click.echo(f"   + {x_cos!r} x cos({k}x) + {x_sin!r} x sin({k}x)")


@scenario.command('run')
@encoding_options
@click.option('--sampler', type=click.Choice(['sa', 'brute'], case_sensitive=False))
@click.option('--runs', type=int)
@click.option('--seed', type=int)
@click.option('--sweeps', type=int)
@click.option('--beta-start', 'beta_start', type=float)
@click.option('--beta-end', 'beta_end', type=float)
@click.option('--gap/--no-gap', default=None, help='Compute g_min')
@click.option('--grid', 'gap_grid', type=int, help='s-grid points for g_min')
@click.option('--refine/--no-refine', 'gap_refine', default=None)
@click.option('--mse-points', 'mse_points', type=int)
@click.option('--out', type=click.Path(dir_okay=False), help='Report file')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv')
@handle_cli_errors
def scenario_run(config_path, out, fmt, **options):
    """Run one configuration."""
    config = collect_config(config_path, **options)
    report = experiment_service.run_scenario(config)
    echo_report(report)
    if out:
        path = experiment_service.emit_report([report], out, fmt)
        click.echo(f"💾 Report written to {path}")


@scenario.command('sweep')
@click.option('--id', 'scenario_id', required=True)
@click.option('--ansatz', 'ansatzes', multiple=True, required=True,
              type=click.Choice(['tfa', 'ca'], case_sensitive=False))
@click.option('--n', 'sizes', multiple=True, required=True, type=int)
@click.option('--nspin', 'n_spins', multiple=True, required=True, type=int)
@click.option('--sampler', type=click.Choice(['sa', 'brute'], case_sensitive=False))
@click.option('--runs', type=int)
@click.option('--seed', type=int)
@click.option('--sweeps', type=int)
@click.option('--gap/--no-gap', default=None)
@click.option('--grid', 'gap_grid', type=int)
@click.option('--mse-points', 'mse_points', type=int)
@click.option('--out', required=True, type=click.Path(dir_okay=False))
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv')
@handle_cli_errors
def scenario_sweep(scenario_id, ansatzes, sizes, n_spins, out, fmt, **options):
    """Run every ansatz x N x n_spin combination of one scenario."""
    options = {key: value for key, value in options.items() if value is not None}
    reports = experiment_service.run_sweep(scenario_id, ansatzes, sizes, n_spins, **options)
    for report in reports:
        echo_report(report)
    path = experiment_service.emit_report(reports, out, fmt)
    click.echo(f"💾 {len(reports)} rows written to {path}")


# ==================== QUBO ====================

@cli.group()
def qubo():
    """QUBO instances."""


@qubo.command('export')
@encoding_options
@click.option('--out', required=True, type=click.Path(dir_okay=False))
@handle_cli_errors
def qubo_export(config_path, out, **options):
    """Write the QUBO of a configuration in text form."""
    config = collect_config(config_path, **options)
    _, system, instance = build_encoding(config)
    path = data_manager.export_qubo(instance, out)
    compact = encoder_service.compact_qubo(instance)
    click.echo(f"💾 QUBO with r={instance.r} written to {path} "
               f"(rank {encoder_service.matrix_rank(system.a)}, "
               f"DR {format_metric(encoder_service.dynamic_range(compact))})")


# ==================== SPECTRUM ====================

@cli.command()
@encoding_options
@click.option('--grid', 'grid_points', type=int, default=SpectralConfig.GRID_POINTS, show_default=True)
@click.option('--refine/--no-refine', default=True, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), help='Gap profile CSV (s, lambda0, lambda1)')
@handle_cli_errors
def gap(config_path, grid_points, refine, out, **options):
    """Minimum spectral gap of the annealing Hamiltonian."""
    config = collect_config(config_path, **options)
    _, _, instance = build_encoding(config)
    profile = spectral_service.min_gap(encoder_service.to_ising(instance),
                                       grid_points=grid_points, refine=refine)
    click.echo(f"📉 g_min = {profile.g_min!r} at s = {profile.s_at_min:.6f}")
    if profile.degenerate_flag:
        click.echo("⚠️  Degenerate ground manifold at s=1")
    if out:
        path = data_manager.write_gap_profile(profile, out)
        click.echo(f"💾 Gap profile written to {path}")


@cli.group()
def aa():
    """Adiabatic ansatz."""


@aa.command('optimize')
@click.option('--id', 'scenario_id', required=True)
@click.option('--n', 'size', type=int, required=True)
@click.option('--nspin', 'n_spin', type=int, required=True)
@click.option('--budget', type=int, default=SpectralConfig.AA_BUDGET, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--grid', 'grid_points', type=int, default=SpectralConfig.AA_GRID_POINTS, show_default=True)
@click.option('--out', required=True, type=click.Path(dir_okay=False))
@handle_cli_errors
def aa_optimize(scenario_id, size, n_spin, budget, seed, grid_points, out):
    """Search AA coefficients that maximize g_min."""
    problem = scenario_service.get_scenario(scenario_id)
    basis, profile = spectral_service.optimize_adiabatic_ansatz(
        problem, size, n_spin, budget=budget, seed=seed, grid_points=grid_points)
    row_norm = float(np.linalg.norm(basis.coeffs[0]))
    metadata = {'scenario': problem.name, 'N': size, 'n_spin': n_spin, 'budget': budget,
                'seed': seed, 'row_norm': row_norm, 'g_min': profile.g_min,
                's_at_min': profile.s_at_min}
    path = data_manager.save_aa_params(ansatz_service.basis_to_params(basis), out, metadata)
    click.echo(f"✅ AA g_min = {profile.g_min!r}; parameters written to {path}")


# ==================== SERVER ====================

@cli.command()
@click.option('--host', default=AppConfig.HOST, show_default=True)
@click.option('--port', type=int, default=AppConfig.PORT, show_default=True)
@click.option('--debug', is_flag=True)
def serve(host, port, debug):
    """Start the JSON API."""
    run_server(host=host, port=port, debug=debug)


if __name__ == '__main__':
    cli()

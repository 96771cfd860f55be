"""Command-line interface: solve, enumerate, stability, simulate and sweep."""
import argparse
import logging
import sys

import pandas as pd

from whataboutism import __version__
from whataboutism import analytic
from whataboutism import behavior
from whataboutism import dynamics
from whataboutism import exceptions
from whataboutism import model
from whataboutism import simulate
from whataboutism import sweep
from whataboutism.utils import io_utils
from whataboutism.utils import report_files
from whataboutism.utils import rng_utils

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CHECK_FAILED = 3
EXIT_IO = 4

DEFAULT_EPISODES = 10 ** 6
DEFAULT_Z_BOUND = 3.0


def _derived_dict(derived):
    return {'c': list(derived.c), 'theta': list(derived.theta), 'M': derived.M,
            'boundary_levels': list(derived.boundary_levels)}


def _log_written(paths):
    for path in paths:
        logger.info('Wrote %s', path)


def cmd_solve(config_path, out_dir='.', fmt='both'):
    """Writes the benchmark, derived quantities, stable PSPE and rebuttal
    statistics, plus the stable profile as a reusable profile file.
    """
    params = model.load_params(config_path)
    derived = model.derive(params)
    benchmark = analytic.solve_benchmark(params)
    stable = analytic.stable_profile(params, derived)
    records = analytic.equilibrium_records(params)

    document = {
        'params': params.to_dict(),
        'derived': _derived_dict(derived),
        'benchmark': {'cutoff': list(benchmark.cutoff), 'abstain': list(benchmark.abstain)},
        'stable_profile': stable.to_dict(),
        'records': records,
    }
    written = io_utils.write_report(report_files.ReportFiles(out_dir, 'solve', fmt),
                                    document, pd.DataFrame(records))
    written.append(io_utils.write_json(report_files.ReportFiles(out_dir, 'stable_profile').json_path,
                                       stable.to_dict()))
    _log_written(written)
    return EXIT_OK


def cmd_enumerate(config_path, out_dir='.', fmt='both'):
    """Writes every PSPE with its stability verdict; exactly one is stable."""
    params = model.load_params(config_path)
    family = analytic.enumerate_pspe(params)

    profiles, rows = [], []
    for profile in family.profiles:
        stable = dynamics.check_stability(params, profile).stable
        profiles.append(dict(profile.to_dict(), stable=stable))
        for m in params.levels:
            rows.append({'mstar': profile.mstar, 'm': m, 'cutoff': profile.cutoff_at(m),
                         'abstain': profile.abstain_at(m), 'stable': stable})

    document = {'M': model.derive(params).M, 'stable_mstar': family.stable.mstar,
                'profiles': profiles}
    _log_written(io_utils.write_report(report_files.ReportFiles(out_dir, 'enumerate', fmt),
                                       document, pd.DataFrame(rows)))
    return EXIT_OK


def cmd_stability(config_path, out_dir='.', fmt='both', delta=dynamics.DEFAULT_DELTA,
                  grid_points=dynamics.DEFAULT_GRID_POINTS):
    """Writes the StabilityReport of every PSPE."""
    params = model.load_params(config_path)
    reports = [dynamics.check_stability(params, profile, delta=delta, grid_points=grid_points)
               for profile in analytic.enumerate_pspe(params).profiles]

    rows = [dict(level, mstar=report.mstar, fixed_points=' '.join(map(repr, level['fixed_points'])))
            for report in reports for level in report.to_dict()['levels']]
    document = {'delta': delta, 'grid_points': grid_points,
                'reports': [report.to_dict() for report in reports]}
    _log_written(io_utils.write_report(report_files.ReportFiles(out_dir, 'stability', fmt),
                                       document, pd.DataFrame(rows)))
    return EXIT_OK


def cmd_simulate(config_path, seed, episodes=DEFAULT_EPISODES, states=None, profile_path=None,
                 out_dir='.', fmt='both', workers=None, rival_rule='exogenous',
                 dump_episodes=False, z_bound=DEFAULT_Z_BOUND):
    """Runs every estimator against the stable PSPE (or a profile file).

    Returns EXIT_CHECK_FAILED when any |z| exceeds `z_bound`.
    """
    seed = rng_utils.check_seed(seed)
    if episodes < simulate.MIN_EPISODES:
        raise exceptions.TooFewEpisodes(
            f'--episodes must be at least {simulate.MIN_EPISODES}, got {episodes}.',
            field='episodes',
        )
    params = model.load_params(config_path)
    behavior.get_rival_rule(rival_rule)
    if profile_path is not None:
        profile = analytic.confirm_pspe(
            params, model.profile_from_dict(params, io_utils.read_json(profile_path, what='profile')))
    else:
        profile = analytic.stable_profile(params)
    states = [model.check_state(params, state) for state in (states or model.all_states(params.n))]

    reports = simulate.verify_profile(params, profile, episodes, seed, states=states,
                                      workers=workers, rival_rule=rival_rule)
    failures = [report for report in reports if not report.within(z_bound)]
    for report in failures:
        logger.error('%s in state %s: estimate %.6g vs analytic %.6g (z=%.2f)', report.quantity,
                     report.state, report.estimate, report.analytic, report.z_score)

    document = {'seed': seed, 'episodes': episodes, 'rival_rule': rival_rule,
                'z_bound': z_bound, 'profile': profile.to_dict(),
                'reports': [report.to_dict() for report in reports],
                'passed': not failures}
    written = io_utils.write_report(report_files.ReportFiles(out_dir, 'simulate', fmt), document,
                                    pd.DataFrame([report.to_dict() for report in reports]))
    if dump_episodes:
        for state in states:
            batch = simulate.simulate_episodes(params, profile, state, episodes, seed,
                                               workers=workers, rival_rule=rival_rule)
            path = report_files.ReportFiles(out_dir, f'episodes_{state.camp}_{state.m}').csv_path
            written.append(io_utils.write_csv(path, batch.to_frame()))
    _log_written(written)
    return EXIT_CHECK_FAILED if failures else EXIT_OK


def cmd_sweep(sweep_path, out_dir='.', fmt='both', workers=None):
    """Writes the tidy sweep table; returns EXIT_CHECK_FAILED on monotonicity violations."""
    spec = sweep.load_sweep(sweep_path)
    result = sweep.run_sweep(spec, workers=workers)

    document = {
        'axis': spec.axis,
        'values': list(spec.values),
        'base': spec.base.to_dict(),
        'skipped': [{'axis_value': s.axis_value, 'reason': s.reason} for s in result.skipped],
        'violations': list(result.violations),
    }
    _log_written(io_utils.write_report(report_files.ReportFiles(out_dir, 'sweep', fmt),
                                       document, result.frame))
    return EXIT_CHECK_FAILED if result.violations else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog='whataboutism',
        description='Equilibria of the whataboutism game and their Monte Carlo verification.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--verbose', action='store_true', help='Log debug messages.')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_common(sub, config_help='Parameter file (JSON).'):
        sub.add_argument('--config', required=True, help=config_help)
        sub.add_argument('--out', default='.', help='Output directory.')
        sub.add_argument('--format', default='both', choices=report_files.FORMATS,
                         help='Which report files to write.')

    add_common(subparsers.add_parser('solve', help='Benchmark and stable PSPE.'))
    add_common(subparsers.add_parser('enumerate', help='Every PSPE with its stability verdict.'))

    stability = subparsers.add_parser('stability', help='Dynamic-stability reports.')
    add_common(stability)
    stability.add_argument('--delta', type=float, default=dynamics.DEFAULT_DELTA)
    stability.add_argument('--grid-points', type=int, default=dynamics.DEFAULT_GRID_POINTS)

    sim = subparsers.add_parser('simulate', help='Monte Carlo verification.')
    add_common(sim)
    sim.add_argument('--seed', type=int, default=None, help='Master seed (unsigned 64-bit).')
    sim.add_argument('--episodes', type=int, default=DEFAULT_EPISODES,
                     help='Episodes per state and estimator.')
    sim.add_argument('--state', type=model.StateId.parse, action='append', dest='states',
                     help='Restrict to a state "camp,m"; may be repeated.')
    sim.add_argument('--profile', default=None, help='Profile file written by "solve".')
    sim.add_argument('--workers', type=int, default=None, help='Worker threads.')
    sim.add_argument('--rival-rule', default='exogenous', choices=sorted(behavior.RIVAL_RULES))
    sim.add_argument('--dump-episodes', action='store_true',
                     help='Also write one CSV of episodes per state.')
    sim.add_argument('--z-bound', type=float, default=DEFAULT_Z_BOUND)

    sweep_parser = subparsers.add_parser('sweep', help='Comparative statics over a grid.')
    add_common(sweep_parser, config_help='Sweep file (JSON).')
    sweep_parser.add_argument('--workers', type=int, default=None, help='Worker threads.')
    return parser


def dispatch(args):
    if args.command == 'solve':
        return cmd_solve(args.config, args.out, args.format)
    if args.command == 'enumerate':
        return cmd_enumerate(args.config, args.out, args.format)
    if args.command == 'stability':
        return cmd_stability(args.config, args.out, args.format, args.delta, args.grid_points)
    if args.command == 'simulate':
        return cmd_simulate(args.config, args.seed, args.episodes, args.states, args.profile,
                            args.out, args.format, args.workers, args.rival_rule,
                            args.dump_episodes, args.z_bound)
    return cmd_sweep(args.config, args.out, args.format, args.workers)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(format='%(levelname)-8s %(filename)s: %(message)s',
                        level=logging.DEBUG if args.verbose else logging.INFO,
                        stream=sys.stderr)
    try:
        return dispatch(args)
    except exceptions.ConfigNotFound as e:
        logger.error('%s', e)
        return EXIT_IO
    except exceptions.ValidationError as e:
        logger.error('Invalid %s: %s', e.field or 'input', e)
        return EXIT_VALIDATION
    except exceptions.NotInterior as e:
        logger.error('%s', e)
        return EXIT_VALIDATION
    except OSError as e:
        logger.error('I/O error: %s', e)
        return EXIT_IO

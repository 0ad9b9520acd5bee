"""
Command-line front end: reference curves, violation maps, sweeps, oracle runs and sampling.

Tables go to --out (or stdout) as CSV or JSON; summaries and logs go to stderr.
Exit status: 0 success, 2 invalid arguments, 3 numerical failure.
"""

import argparse
import logging
import sys

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

import bounds
import engine
import shots
import states
import steering
import utils
from errors import InvalidParam, NoCrossing, NumericalFailure, SzilardError
from states import StateFamily

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

FIG3_COLUMNS = ['Eta', 'dW_M1', 'dW_M2']
MAP_COLUMNS = ['Eta', 'Q', 'Effective_Eta', 'Work', 'Bound', 'Violation']


def _pool(threads):
    return Parallel(n_jobs=int(threads), prefer='threads')


def _shot_config(settings, seed):
    return shots.ShotConfig(
        shots_per_setting=int(settings['shots']),
        rng_seed=seed,
        readout_fidelity=float(settings['readout_fidelity']),
        chunk_size=int(settings['chunk_size']),
        correct_readout=bool(settings['correct_readout']),
    )


def _fig3_row(row, eta, mode, settings):
    rho1 = states.pure_entangled(eta)
    rho2 = states.classical_correlated(eta)
    record = {'Eta': float(eta)}
    for i in (1, 2):
        d = engine.make_decomposition(i, eta)
        if mode == 'exact':
            record[f'dW_M{i}'] = engine.run_protocol(rho1, d).average - engine.run_protocol(rho2, d).average
            continue
        quantum = shots.sample_run(rho1, d, _shot_config(settings, utils.row_seed(settings['seed'], row, 1, i)))
        classical = shots.sample_run(rho2, d, _shot_config(settings, utils.row_seed(settings['seed'], row, 2, i)))
        record[f'dW_M{i}'] = quantum.mean - classical.mean
        record[f'Std_Error_M{i}'] = float(np.hypot(quantum.std_error, classical.std_error))
    return record


def cmd_fig3(eta_values, mode='exact', settings=None):
    """
    Work difference W(rho_1, D_i) - W(rho_2, D_i) for the sigma_z and sigma_y measurements.

    Args:
        eta_values: grid of eta
        mode: 'exact' or 'sampled'
        settings: resolved settings (shots, seed, threads, ...)
    """
    settings = settings or utils.initialize_settings()
    if mode not in ('exact', 'sampled'):
        raise InvalidParam(f"unknown mode {mode!r}")
    rows = _pool(settings['threads'])(
        delayed(_fig3_row)(row, eta, mode, settings) for row, eta in enumerate(eta_values)
    )
    columns = FIG3_COLUMNS if mode == 'exact' else FIG3_COLUMNS + ['Std_Error_M1', 'Std_Error_M2']
    return pd.DataFrame(rows, columns=columns)


def _map_row(row, family, eta, q, strategy, mode, settings, with_steering):
    rho = states.family_state(family, eta, q)
    eff = states.effective_eta(rho)
    bound = bounds.lhs_bound_closed(bounds.LhsBoundQuery(eff, strategy))
    record = {'Eta': float(eta), 'Q': float(q), 'Effective_Eta': eff}
    if mode == 'exact':
        work = engine.average_work(rho, strategy)
    else:
        estimate = shots.sample_average_work(
            rho, strategy, _shot_config(settings, utils.row_seed(settings['seed'], row))
        )
        work = estimate.mean
        record['Std_Error'] = estimate.std_error
    record.update({'Work': work, 'Bound': bound, 'Violation': work - bound})
    if with_steering:
        axes = steering.settings_for(strategy)
        record['Steering_Violation'] = steering.linear_steering(rho, len(axes), axes).violation
    return record


def _grid_table(family, strategy, etas, qs, mode, settings, with_steering):
    family = StateFamily.parse(family)
    if family in (StateFamily.PURE_ENTANGLED, StateFamily.CLASSICAL_CORRELATED):
        # q does not enter these families
        qs = [1.0 if family is StateFamily.PURE_ENTANGLED else 0.0]
    points = [(eta, q) for eta in etas for q in qs]
    rows = _pool(settings['threads'])(
        delayed(_map_row)(row, family, eta, q, strategy, mode, settings, with_steering)
        for row, (eta, q) in enumerate(points)
    )
    columns = list(MAP_COLUMNS)
    if mode == 'sampled':
        columns.insert(4, 'Std_Error')
    if with_steering:
        columns.append('Steering_Violation')
    return pd.DataFrame(rows, columns=columns)


def boundary_table(family, strategy, etas):
    """q*(eta) for every eta where the violation changes sign on [0, 1]"""
    rows = []
    for eta in etas:
        if abs(eta) >= 1:
            continue
        try:
            rows.append({'Eta': float(eta), 'Q_Star': bounds.violation_boundary(family, strategy, eta)})
        except NoCrossing as e:
            logger.info("no boundary at eta=%s: %s", eta, e)
    return pd.DataFrame(rows, columns=['Eta', 'Q_Star']).astype(float)


def cmd_fig4_map(family, strategy, etas, qs, settings=None):
    """
    Violation map over (eta, q) plus the boundary curve.

    Returns:
        (map table, boundary table); the boundary is empty for families without q
    """
    settings = settings or utils.initialize_settings()
    strategy = engine.Strategy.of(strategy)
    table = _grid_table(family, strategy, etas, qs, 'exact', settings, with_steering=False)
    family = StateFamily.parse(family)
    if family in (StateFamily.GIBBS_INVARIANT, StateFamily.WERNER):
        boundary = boundary_table(family, strategy, etas)
    else:
        boundary = pd.DataFrame(columns=['Eta', 'Q_Star']).astype(float)
    return table, boundary


def cmd_scatter(family, strategy, etas, qs):
    """Steering violation vs work violation; see steering.correlation_scatter"""
    return steering.correlation_scatter(family, strategy, etas, qs)


def cmd_bound(eta, strategy, resolution):
    """
    Closed form vs LP oracle for one (eta, strategy).

    Returns:
        table with one row per ensemble support point, summary columns repeated
    """
    query = bounds.LhsBoundQuery(eta, strategy)
    closed = bounds.lhs_bound_closed(query)
    oracle, ensemble = bounds.lhs_bound_oracle(query, int(resolution))
    replay = bounds.replay_ensemble(ensemble, query)
    if not bounds.lhs_bound_is_tight(query):
        logger.warning("closed form is not attained at eta=%s, c=%s; expect oracle < closed",
                       eta, tuple(query.strategy))
    rows = []
    for w, v in zip(ensemble.weights, ensemble.vectors):
        rows.append({
            'Eta': query.eta,
            'C1': query.strategy.c1,
            'C2': query.strategy.c2,
            'C3': query.strategy.c3,
            'Resolution': int(resolution),
            'Closed': closed,
            'Oracle': oracle,
            'Gap': closed - oracle,
            'Replay': replay,
            'Weight': float(w),
            'Vx': float(v[0]),
            'Vy': float(v[1]),
            'Vz': float(v[2]),
        })
    return pd.DataFrame(rows)


def cmd_sweep(family, strategy, etas, qs, mode, settings):
    """Generic grid: work, bound, violation and steering violation per (eta, q)"""
    return _grid_table(family, engine.Strategy.of(strategy), etas, qs, mode, settings, with_steering=True)


def cmd_sample(family, eta, q, strategy, settings):
    """One sampled estimate next to its exact value"""
    rho = states.family_state(family, eta, q)
    estimate = shots.sample_average_work(rho, strategy, _shot_config(settings, int(settings['seed'])))
    return pd.DataFrame([{
        'Eta': float(eta),
        'Q': float(q),
        'Exact': engine.average_work(rho, strategy),
        'Mean': estimate.mean,
        'Std_Error': estimate.std_error,
        'Shots': estimate.shots,
    }])


def _summary(line):
    sys.stderr.write(line + '\n')


def _add_common_flags(parser):
    parser.add_argument('--config', help="TOML config file whose keys mirror these flags")
    parser.add_argument('--family', help="pure, classical, gibbs_invariant or werner")
    parser.add_argument('--eta', type=float, help="single eta (bound, sample)")
    parser.add_argument('--q', type=float, help="single q (sample)")
    parser.add_argument('--eta-min', type=float)
    parser.add_argument('--eta-max', type=float)
    parser.add_argument('--eta-steps', type=int)
    parser.add_argument('--q-min', type=float)
    parser.add_argument('--q-max', type=float)
    parser.add_argument('--q-steps', type=int)
    parser.add_argument('--strategy', help="preset w1, w2 or w3")
    parser.add_argument('--c1', type=float)
    parser.add_argument('--c2', type=float)
    parser.add_argument('--c3', type=float)
    parser.add_argument('--mode', choices=['exact', 'sampled'])
    parser.add_argument('--shots', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--readout-fidelity', type=float)
    parser.add_argument('--chunk-size', type=int)
    parser.add_argument('--correct-readout', action='store_true', default=None)
    parser.add_argument('--resolution', type=int)
    parser.add_argument('--format', choices=['csv', 'json'])
    parser.add_argument('--out', metavar='PATH')
    parser.add_argument('--boundary-out', metavar='PATH')
    parser.add_argument('--data-dir', metavar='PATH')
    parser.add_argument('--threads', type=int, metavar='N')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])


def build_parser():
    parser = argparse.ArgumentParser(
        prog='szilard',
        description="Two-qubit quantum Szilard engine: work extraction, LHS bounds and steering",
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, help_text in [
        ('fig3', "work difference between the entangled and the classical state"),
        ('fig4-map', "violation map over (eta, q) with the boundary curve"),
        ('fig4-scatter', "steering violation vs work violation"),
        ('bound', "closed-form LHS bound vs LP oracle"),
        ('sweep', "generic (eta, q) grid, exact or sampled"),
        ('sample', "single shot-sampled estimate"),
        ('init-data', "write the reference tables into the data directory"),
    ]:
        _add_common_flags(subparsers.add_parser(name, help=help_text))
    return parser


def run(args):
    """Dispatch a parsed command; returns the exit status"""
    overrides = {k: v for k, v in vars(args).items() if k not in ('command', 'config')}
    settings = utils.initialize_settings(args.config, overrides)

    logging.basicConfig(
        level=getattr(logging, str(settings['log_level']).upper(), logging.WARNING),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )

    strategy = utils.resolve_strategy(settings)
    fmt = settings['format']
    out = settings['out']

    if args.command == 'fig3':
        utils.export_table(cmd_fig3(utils.eta_grid(settings), settings['mode'], settings), out, fmt)

    elif args.command == 'fig4-map':
        table, boundary = cmd_fig4_map(settings['family'], strategy, utils.eta_grid(settings),
                                       utils.q_grid(settings), settings)
        utils.export_table(table, out, fmt)
        if settings['boundary_out']:
            utils.export_table(boundary, settings['boundary_out'], fmt)
        for eta, q_star in zip(boundary['Eta'], boundary['Q_Star']):
            _summary(f"# boundary eta={utils.format_number(eta)} q*={q_star:.12f}")

    elif args.command == 'fig4-scatter':
        result = cmd_scatter(settings['family'], strategy, utils.eta_grid(settings), utils.q_grid(settings))
        utils.export_table(result.table, out, fmt)
        _summary(f"# rank_correlation={utils.format_number(result.rank_correlation)} "
                 f"points={len(result.table)}")

    elif args.command == 'bound':
        table = cmd_bound(settings['eta'], strategy, settings['resolution'])
        utils.export_table(table, out, fmt)
        first = table.iloc[0]
        _summary(f"# closed={first['Closed']:.12f} oracle={first['Oracle']:.12f} "
                 f"gap={first['Gap']:.3e} support={len(table)}")

    elif args.command == 'sweep':
        table = cmd_sweep(settings['family'], strategy, utils.eta_grid(settings),
                          utils.q_grid(settings), settings['mode'], settings)
        utils.export_table(table, out, fmt)

    elif args.command == 'sample':
        table = cmd_sample(settings['family'], settings['eta'], settings['q'], strategy, settings)
        utils.export_table(table, out, fmt)

    elif args.command == 'init-data':
        import data_init
        for path in data_init.initialize_data_files(settings['data_dir'], settings):
            _summary(f"# wrote {path}")

    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except NumericalFailure as e:
        _summary(f"error: {e}")
        return EXIT_NUMERICAL
    except SzilardError as e:
        _summary(f"error: {e}")
        return EXIT_INVALID
    except OSError as e:
        _summary(f"error: {e}")
        return 1


if __name__ == '__main__':
    sys.exit(main())

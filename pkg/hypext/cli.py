"""
Command line entry point: python -m hypext <subcommand> ...

Exit status is 0 when every certificate passes, 1 when a run completes with
a failed certificate and 2 on bad input or an aborted stage.
"""

import argparse
import logging
import math
import sys
import typing as t
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .bounds import compute_c_star, delta_gap
from .config import PipelineConfig, Settings, SolverOptions, configure_logging
from .covering import build_net
from .errors import HypextError, InstanceFormatError, PipelineError
from .experiments import (circumradius, fit_loglog_slope, lemma_one_trials, loss_curve, scaling_table,
                          theorem_a_trials, triangle_instance)
from .io import read_instance, read_sample, write_csv, write_net
from .pipeline import choose_parameters, run_pipeline, verify_two_center_patch
from .sampling import sample_ball
from .solver import certify_hull, solve_one_point

_log = logging.getLogger('hypext.cli')

DEFAULT_GRID = '0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9'


def _grid(text: str) -> t.List[float]:
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'not a comma-separated list of numbers: {text!r}') from None
    if not values:
        raise argparse.ArgumentTypeError('empty grid')
    return values


def _ok(flag: bool) -> str:
    return '✓' if flag else '✗'


def _solver_options(args) -> SolverOptions:
    overrides = {}
    if getattr(args, 'tol', None) is not None:
        overrides['tol'] = args.tol
    if getattr(args, 'max_iters', None) is not None:
        overrides['max_iters'] = args.max_iters
    return SolverOptions(**overrides)


def _load_config(args, C: float, settings: Settings) -> PipelineConfig:
    if args.config:
        try:
            return PipelineConfig.model_validate_json(Path(args.config).read_text())
        except OSError as error:
            raise InstanceFormatError(f'Cannot read {args.config}: {error}') from error
    return choose_parameters(C, seed=settings.seed, workers=args.workers or settings.workers)


def cmd_solve_one_point(args, settings: Settings) -> int:
    instance = read_instance(args.instance)
    if not instance.queries:
        raise InstanceFormatError(f'{args.instance} has no queries section')
    opts = _solver_options(args)
    all_passed = True
    for k, xi in enumerate(instance.queries):
        sol = solve_one_point(instance.map, xi, opts, strict=args.strict)
        cert = certify_hull(sol, instance.map, opts)
        all_passed &= cert.passed
        print(f'{_ok(cert.passed)} query {k}: c_xi={sol.c_xi:.12g} active={sol.active_indices} '
              f'hull_norm={cert.norm:.3e} iterations={sol.iterations} residual={sol.residual:.3e}'
              + (f' ({cert.reason})' if cert.reason else ''))
        print('  eta ' + ' '.join(format(v, '.17g') for v in sol.eta.coords))
    return 0 if all_passed else 1


def cmd_verify_bounds(args, settings: Settings) -> int:
    rows = [vars(compute_c_star(C)) for C in args.c_grid]
    if args.out:
        write_csv(args.out, rows, ['C', 'r_star', 'c_hat', 'arcsinh_value', 'c_star'])
    else:
        print('C,r_star,c_hat,arcsinh_value,c_star')
        for row in rows:
            print(','.join(format(row[k], '.17g') for k in ('C', 'r_star', 'c_hat', 'arcsinh_value', 'c_star')))

    below_one = all(C < row['c_star'] < 1.0 - 1e-6 for C, row in zip(args.c_grid, rows))
    grid = np.arange(0.0, 20.0 + 1e-9, 0.05)
    gaps = delta_gap(grid[:, None], grid[None, :])
    delta_ok = gaps.max() <= math.log(2.0) + 1e-9 and gaps[-1, -1] >= math.log(2.0) - 1e-3
    print(f'{_ok(below_one)} c_star in (C, 1) on the grid')
    print(f'{_ok(delta_ok)} additive defect max {gaps.max():.12g} vs log 2 = {math.log(2.0):.12g}')
    return 0 if below_one and delta_ok else 1


def cmd_net(args, settings: Settings) -> int:
    net = build_net(read_sample(args.sample), args.epsilon, args.R)
    if args.out:
        write_net(args.out, net)
    print(f'✓ {len(net.centers)} centers in {net.num_bins} bins (volume bound {net.theoretical_N})')
    return 0


def cmd_two_center(args, settings: Settings) -> int:
    instance = read_instance(args.instance)
    if len(instance.queries) != 2:
        raise InstanceFormatError('two-center needs exactly two queries (xi and xi2)')
    cfg = _load_config(args, instance.map.declared_C, settings)
    xi, xi2 = instance.queries
    if args.sample:
        samples = read_sample(args.sample)
    else:
        rng = np.random.default_rng(cfg.seed)
        samples = [p for c in (xi, xi2) for p in sample_ball(xi.dimension, cfg.epsilon, args.per_center, rng, c)]
    report = verify_two_center_patch(instance.map, xi, xi2, cfg, samples)
    for case, value in report.case_maxima.items():
        print(f'{_ok(value <= 1.0 + 1e-6)} case ({case}) max ratio {value:.12g} at {report.case_witness[case]}')
    print(f'{_ok(report.eta_ratio <= report.eta_bound + 1e-6)} d(eta, eta\')/d(xi, xi\') = '
          f'{report.eta_ratio:.12g} <= {report.eta_bound:.12g}')
    return 0 if report.passed else 1


def cmd_pipeline(args, settings: Settings) -> int:
    instance = read_instance(args.instance)
    cfg = _load_config(args, instance.map.declared_C, settings)
    if args.sample:
        samples = read_sample(args.sample)
    else:
        samples = sample_ball(instance.map.dimension, cfg.sample_radius, cfg.sample_size,
                              np.random.default_rng(cfg.seed))
    result = run_pipeline(instance.map, samples, cfg)
    if args.out:
        m1 = result.eval_points.shape[1]
        rows = [dict({'index': i, 'kind': 'source' if i < result.num_sources else 'sample'},
                     **{f'x{k}': x[k] for k in range(m1)}, **{f'F{k}': y[k] for k in range(m1)})
                for i, (x, y) in enumerate(zip(result.eval_points, result.images))]
        write_csv(args.out, rows)
    print(f'{_ok(result.agrees_on_sources)} F agrees with f on {result.num_sources} source points')
    print(f'  net: {len(result.net.centers)} centers, {result.net.num_bins} bins, volume bound {result.net.theoretical_N}')
    print(f'  per-bin constants: max {max(result.per_bin_constants):.12g}')
    print(f'{_ok(result.per_ball_max <= result.c_prime_empirical + 1e-6)} net-ball constant '
          f'{result.per_ball_max:.12g}')
    print(f'{_ok(result.final_constant <= result.c_prime_empirical + 1e-6)} final constant '
          f'{result.final_constant:.12g} <= C\' = {result.c_prime_empirical:.12g} '
          f'(theoretical {result.c_prime_theoretical:.12g})')
    for failure in result.failures:
        print(f'✗ {failure}')
    return 0 if result.passed else 1


def cmd_loss_curve(args, settings: Settings) -> int:
    rows = loss_curve(args.c_grid, args.trials, args.seed if args.seed is not None else settings.seed,
                      args.pipeline_samples)
    columns = ['C', 'lower', 'triangle', 'c_star', 'c_prime_empirical', 'alpha', 'ratio']
    if args.out:
        write_csv(args.out, rows, columns)
    ok = True
    for row in rows:
        passed = row['C'] - 1e-9 <= row['lower'] <= row['c_star'] + 1e-6
        ok &= passed
        print(f'{_ok(passed)} C={row["C"]:.3g} lower={row["lower"]:.9g} c_star={row["c_star"]:.9g} '
              f'alpha={row["alpha"]:.4g} ratio={row["ratio"]:.4g}')
    return 0 if ok else 1


def cmd_reproduce(args, settings: Settings) -> int:
    seed = args.seed if args.seed is not None else settings.seed
    count, trials = (20, 10) if args.quick else (200, 100)
    checks = []

    rows = theorem_a_trials(count, seed)
    checks.append((all(r['passed'] for r in rows),
                   f'{count} random maps with C in [1, 3]: worst c_xi - C = '
                   f'{max(r["c_xi"] - r["C"] for r in rows):.3e}'))

    rows = lemma_one_trials([round(0.1 * k, 1) for k in range(1, 10)], trials, seed)
    checks.append((all(r['passed'] for r in rows),
                   f'{trials} maps per C in 0.1..0.9: worst c_xi - c_star = '
                   f'{max(r["max_c_xi"] - r["c_star"] for r in rows):.3e}'))

    pmap, xi = triangle_instance(2.0, 0.9)
    c_xi = solve_one_point(pmap, xi).c_xi
    oracle = circumradius(1.8) / circumradius(2.0)
    checks.append((abs(c_xi - oracle) <= 1e-5 and c_xi - 0.9 >= 4e-3,
                   f'triangle of side 2 onto side 1.8: c_xi = {c_xi:.9g}, circumradius ratio {oracle:.9g}'))

    table = scaling_table([0.9 + 0.01 * k for k in range(10)])
    slope = fit_loglog_slope([1.0 - r['C'] for r in table], [r['one_minus_c_star'] for r in table])
    checks.append((1.5 <= slope <= 2.5, f'1 - c_star against 1 - C: log-log slope {slope:.4g}'))

    for passed, line in checks:
        print(f'{_ok(passed)} {line}')
    return 0 if all(passed for passed, _ in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='hypext', description='Lipschitz extension certificates in H^m')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('solve-one-point', help='optimal image of each query point')
    p.add_argument('instance')
    p.add_argument('--tol', type=float)
    p.add_argument('--max-iters', type=int)
    p.add_argument('--strict', action='store_true', help='fail on non-convergence')
    p.set_defaults(func=cmd_solve_one_point)

    p = sub.add_parser('verify-bounds', help='c_star table and additive defect check')
    p.add_argument('--c-grid', type=_grid, default=_grid(DEFAULT_GRID))
    p.add_argument('--out')
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser('net', help='epsilon-net and bins of a sample file')
    p.add_argument('sample')
    p.add_argument('--epsilon', type=float, required=True)
    p.add_argument('--R', type=float, required=True)
    p.add_argument('--out')
    p.set_defaults(func=cmd_net)

    for name, func, help_text in (('two-center', cmd_two_center, 'glued two-patch certificate'),
                                  ('pipeline', cmd_pipeline, 'global extension with constant below 1')):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('instance')
        p.add_argument('--config', help='PipelineConfig as JSON')
        p.add_argument('--sample', help='sample file (default: random ball sample)')
        p.add_argument('--workers', type=int)
        p.add_argument('--out')
        p.set_defaults(func=func)
        if name == 'two-center':
            p.add_argument('--per-center', type=int, default=20)

    p = sub.add_parser('loss-curve', help='empirical lower bounds of the loss function')
    p.add_argument('--c-grid', type=_grid, default=_grid(DEFAULT_GRID))
    p.add_argument('--trials', type=int, default=20)
    p.add_argument('--seed', type=int)
    p.add_argument('--pipeline-samples', type=int, default=6, help='sample size of the pipeline run per C (0 skips it)')
    p.add_argument('--out')
    p.set_defaults(func=cmd_loss_curve)

    p = sub.add_parser('reproduce', help='run the reproduction checks')
    p.add_argument('--seed', type=int)
    p.add_argument('--quick', action='store_true')
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    settings = configure_logging()
    args = build_parser().parse_args(argv)
    _log.debug('Running %s', args.command)
    try:
        return args.func(args, settings)
    except PipelineError as error:
        print(f'✗ {error.stage} stage aborted: {error}')
        return 2
    except HypextError as error:
        print(f'✗ {error}')
        return 2
    except ValidationError as error:
        print(f'✗ invalid configuration: {error}')
        return 2
    except ValueError as error:
        print(f'✗ {error}')
        return 2


if __name__ == '__main__':
    sys.exit(main())

#!/usr/bin/env python3
"""Community Spectra - Main entry point."""

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from community_spectra import __version__
from community_spectra.errors import ConfigError, ModelError, SolverError
from community_spectra.logger import RunLogger
from community_spectra.model import rank_structure
from community_spectra.models import RunConfig, SolverOptions
from community_spectra.parsers.graph_file import read_graph, write_columns, write_graph
from community_spectra.parsers.model_config import (
    load_model_config,
    simplex_parameters,
    two_community_kappas,
)
from community_spectra.sampling.empirical import (
    DEFAULT_BINS,
    centered_spectrum,
    compare,
    detect_communities,
    eigen_spectrum,
    interlacing_check,
)
from community_spectra.sampling.generator import degree_stats, sample_graph
from community_spectra.theory.closedform import (
    band_edge_two_value,
    g_max_two_value,
    semicircle_density,
    threshold_constants,
    threshold_two_value,
    two_value_density,
)
from community_spectra.theory.outliers import (
    outlier_eigenvalues,
    simplex_family,
    threshold_from_g_max,
    threshold_sweep,
    transition_sequence,
    two_community_family,
)
from community_spectra.theory.report import spectrum_report
from community_spectra.theory.resolvent import density_curve, find_band_edges
from community_spectra.ui import (
    console,
    print_error,
    print_info,
    print_success,
    print_warning,
    set_logger,
    set_quiet,
    show_band,
    show_banner,
    show_comparison,
    show_constants,
    show_degree_stats,
    show_model,
    show_outliers,
    show_progress,
    show_recovery,
    show_threshold,
    show_transitions,
)
from community_spectra.utils import config_hash, parse_sweep, resolve_threads, to_json

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130

# flags that never change the result
UNHASHED = {'threads', 'out', 'log_dir', 'quiet', 'handler', 'seed', 'format', 'out_dir', 'histogram_out'}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    common.add_argument('--threads', type=int, default=0, help='Worker threads, 0 = all CPUs (default: 0)')
    common.add_argument('--format', choices=['csv', 'json'], help='Output format (default depends on command)')
    common.add_argument('--out', help='Output file (default: stdout)')
    common.add_argument('--log-dir', default='./logs', help='Log directory (default: ./logs)')
    common.add_argument('--quiet', action='store_true', help='No terminal summaries')
    common.add_argument('--tol', type=float, default=SolverOptions.tol, help='Fixed-point tolerance')
    common.add_argument('--max-iter', type=int, default=SolverOptions.max_iter, help='Fixed-point iteration cap')
    return common


def parse_arguments(argv: Optional[list[str]] = None):
    """Parse command-line arguments.

    Returns:
        Parsed arguments
    """
    parser = argparse.ArgumentParser(
        description="Community Spectra - spectra of random graphs with community structure and arbitrary degrees",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s model describe fig1.json
  %(prog)s sample fig1.json --seed 7 --out graph.csv
  %(prog)s theory density fig1.json --lo -25 --hi 25 --points 2001 --out density.csv
  %(prog)s theory outliers fig1.json
  %(prog)s theory threshold fig1.json --sweep 0:60:31
  %(prog)s oracle constants
  %(prog)s empirical eig graph.csv --mode topk:4
  %(prog)s compare fig1.json --n 4000 --seed 1
  %(prog)s reproduce-figure fig1.json --n 4000 --out-dir figure/
        """
    )
    parser.add_argument('-v', '--version', action='version', version=f'%(prog)s {__version__}')
    common = _common_options()
    commands = parser.add_subparsers(dest='command', required=True)

    model = commands.add_parser('model', help='Model files').add_subparsers(dest='action', required=True)
    describe = model.add_parser('describe', parents=[common], help='Print n, q, c, 2m and alphas')
    describe.add_argument('model_file')
    describe.set_defaults(handler=cmd_model_describe)

    sample = commands.add_parser('sample', parents=[common], help='Sample a graph (--out required)')
    sample.add_argument('model_file')
    sample.add_argument('--n', type=int, help='Override the vertex count')
    sample.set_defaults(handler=cmd_sample)

    theory = commands.add_parser('theory', help='Resolvent theory').add_subparsers(dest='action', required=True)
    density = theory.add_parser('density', parents=[common], help='Spectral density curve (x,rho)')
    density.add_argument('model_file')
    density.add_argument('--lo', type=float, help='Grid start (default: band - 10%%)')
    density.add_argument('--hi', type=float, help='Grid end (default: band + 10%%)')
    density.add_argument('--points', type=int, default=2001, help='Grid points (default: 2001)')
    density.add_argument('--epsilon', type=float, help='Broadening (default: 1e-4 x grid width)')
    density.set_defaults(handler=cmd_theory_density)

    band = theory.add_parser('band', parents=[common], help='Band intervals')
    band.add_argument('model_file')
    band.set_defaults(handler=cmd_theory_band)

    outliers = theory.add_parser('outliers', parents=[common], help='Outlying eigenvalues and g_max')
    outliers.add_argument('model_file')
    outliers.set_defaults(handler=cmd_theory_outliers)

    threshold = theory.add_parser('threshold', parents=[common], help='Detectability threshold theta*')
    threshold.add_argument('model_file', help='two_community model file')
    threshold.add_argument('--sweep', help='theta sweep lo:hi:steps')
    threshold.set_defaults(handler=cmd_theory_threshold)

    transitions = theory.add_parser('transitions', parents=[common], help='Detectability transition sequence')
    transitions.add_argument('model_file', help='two_community (theta) or simplex (phi) model file')
    transitions.add_argument('--sweep', required=True, help='strength sweep lo:hi:steps')
    transitions.set_defaults(handler=cmd_theory_transitions)

    oracle = commands.add_parser('oracle', help='Closed forms').add_subparsers(dest='action', required=True)
    constants = oracle.add_parser('constants', parents=[common], help='x, y and the threshold coefficient')
    constants.add_argument('--kappa', type=float, help='Also evaluate edge and threshold of the kappa/2kappa model')
    constants.set_defaults(handler=cmd_oracle_constants)

    oracle_density = oracle.add_parser('density', parents=[common], help='Closed-form density (x,rho)')
    oracle_density.add_argument('--kind', choices=['semicircle', 'two-value'], required=True)
    oracle_density.add_argument('--c', type=float, help='Average degree (semicircle)')
    oracle_density.add_argument('--kappa1', type=float, help='First degree (two-value)')
    oracle_density.add_argument('--kappa2', type=float, help='Second degree (two-value, default 2 x kappa1)')
    oracle_density.add_argument('--lo', type=float)
    oracle_density.add_argument('--hi', type=float)
    oracle_density.add_argument('--points', type=int, default=2001)
    oracle_density.set_defaults(handler=cmd_oracle_density)

    empirical = commands.add_parser('empirical', help='Sampled spectra').add_subparsers(dest='action', required=True)
    eig = empirical.add_parser('eig', parents=[common], help='Adjacency eigenvalues')
    eig.add_argument('graph_file')
    eig.add_argument('--mode', default='full', help='full or topk:K (default: full)')
    eig.set_defaults(handler=cmd_empirical_eig)

    detect = empirical.add_parser('detect', parents=[common], help='Spectral community recovery')
    detect.add_argument('graph_file')
    detect.add_argument('--q', type=int, default=2, help='Number of communities (default: 2)')
    detect.set_defaults(handler=cmd_empirical_detect)

    interlace = empirical.add_parser('interlace', parents=[common], help='Rank-one interlacing check')
    interlace.add_argument('model_file')
    interlace.add_argument('--n-small', type=int, default=100)
    interlace.add_argument('--alpha', type=float, default=5.0)
    interlace.set_defaults(handler=cmd_empirical_interlace)

    for name, handler, helptext in (
        ('compare', cmd_compare, 'Compare a sample with theory'),
        ('reproduce-figure', cmd_reproduce_figure, 'Write every theory and sample artifact'),
    ):
        sub = commands.add_parser(name, parents=[common], help=helptext)
        sub.add_argument('model_file')
        sub.add_argument('--n', type=int, help='Override the vertex count')
        sub.add_argument('--bins', type=int, default=DEFAULT_BINS, help=f'Histogram bins (default: {DEFAULT_BINS})')
        sub.add_argument('--exclude-top', type=int, help='Eigenvalues left out of the histogram (default: q)')
        sub.add_argument('--centered', action='store_true', help='Histogram A - <A> instead of A')
        if name == 'compare':
            sub.add_argument('--histogram-out', help='CSV of histogram vs. theory')
        else:
            sub.add_argument('--out-dir', default='figure', help='Output directory (default: figure)')
        sub.set_defaults(handler=handler)

    return parser.parse_args(argv)


def command_name(args) -> str:
    """Full subcommand name, e.g. 'theory outliers'."""
    action = getattr(args, 'action', None)
    return f"{args.command} {action}" if action else args.command


def solver_options(args) -> SolverOptions:
    """SolverOptions from the --tol/--max-iter flags."""
    if not args.tol > 0 or args.max_iter < 1:
        raise ConfigError("--tol must be positive and --max-iter at least 1")
    return SolverOptions(tol=args.tol, max_iter=args.max_iter)


def build_run_config(args, model_config: Optional[dict]) -> RunConfig:
    """Resolved run configuration; the model file enters by content."""
    flags = {
        key: value for key, value in sorted(vars(args).items())
        if key not in UNHASHED and key not in ('command', 'action', 'model_file')
    }
    if model_config is not None:
        flags['model'] = model_config
    return RunConfig(
        command=command_name(args),
        seed=args.seed,
        threads=args.threads,
        format=args.format or 'default',
        out=args.out,
        log_dir=args.log_dir,
        flags=flags
    )


def metadata(config: RunConfig) -> dict:
    """Reproducibility header attached to every output."""
    return {
        'version': __version__,
        'seed': config.seed,
        'config_hash': config_hash(config.hashable()),
        'command': config.command,
    }


def write_meta(path, meta: dict):
    """Write `<path>.meta.json`."""
    Path(str(path) + '.meta.json').write_text(to_json(meta) + '\n')


def emit(args, meta: dict, document: dict, columns: Optional[dict] = None, default: str = 'json', path=None):
    """Write a command's result as JSON or CSV to --out (or stdout).

    Args:
        args: Parsed arguments
        meta: Reproducibility metadata
        document: JSON form of the result
        columns: Tabular form of the result, when it has one
        default: Format used without --format
        path: Destination overriding --out
    """
    fmt = args.format or default
    path = path if path is not None else args.out
    if fmt == 'csv' and columns is None:
        raise ConfigError(f"{command_name(args)} has no CSV form; use --format json")

    if fmt == 'csv':
        if path in (None, '-'):
            sys.stdout.write(f"# {json.dumps(meta, sort_keys=True)}\n")
        write_columns(path, columns)
    elif path in (None, '-'):
        sys.stdout.write(to_json({**document, 'meta': meta}) + '\n')
    else:
        Path(path).write_text(to_json(document) + '\n')

    if path not in (None, '-'):
        write_meta(path, meta)


def cmd_model_describe(args, model, model_config, meta, opts, logger) -> int:
    """Print n, q, c, 2m and alphas."""
    structure = rank_structure(model)
    show_model(model, structure.alphas)
    document = model.summary()
    document['alphas'] = list(structure.alphas)
    document['gram'] = structure.gram.tolist()
    logger.log_section('model', document)
    emit(args, meta, document)
    return EXIT_OK


def cmd_sample(args, model, model_config, meta, opts, logger) -> int:
    """Sample a graph and write it with its sidecar."""
    if args.out in (None, '-'):
        raise ConfigError("sample needs --out graph.csv")
    with show_progress("Sampling") as progress:
        progress.add_task(f"Sampling n={model.n}...", total=None)
        graph = sample_graph(model, args.seed, args.threads)
    stats = degree_stats(graph)
    show_degree_stats(stats, graph.num_edges)

    write_graph(graph, args.out)
    write_meta(args.out, meta)
    logger.log_section('sample', {
        'n': graph.n,
        'edges': graph.num_edges,
        'distinct_pairs': len(graph.edges),
        'degree_means': {s.label: s.mean for s in stats},
    })
    print_success(f"Graph written to {args.out}")
    return EXIT_OK


def cmd_theory_density(args, model, model_config, meta, opts, logger) -> int:
    """Density curve on a grid."""
    lo, hi = args.lo, args.hi
    if lo is None or hi is None:
        band = find_band_edges(model, threads=args.threads, opts=opts)
        margin = 0.1 * band.width
        lo = band.lower - margin if lo is None else lo
        hi = band.upper + margin if hi is None else hi
    epsilon = args.epsilon if args.epsilon is not None else 1e-4 * (hi - lo)

    with show_progress("Density") as progress:
        progress.add_task(f"Solving {args.points} grid points...", total=None)
        curve = density_curve(model, lo, hi, args.points, epsilon, args.threads, opts)
    if curve.failures:
        print_warning(f"{len(curve.failures)} grid points interpolated after solver failures")
    logger.log_section('density', {
        'lo': lo, 'hi': hi, 'points': args.points, 'epsilon': epsilon,
        'integral': curve.integral(), 'failures': list(curve.failures),
    })
    print_info(f"Integral of rho over the grid: {curve.integral():.6f}")
    document = {'epsilon': epsilon, 'x': curve.xs.tolist(), 'rho': curve.rho.tolist()}
    emit(args, meta, document, {'x': curve.xs, 'rho': curve.rho}, default='csv')
    return EXIT_OK


def cmd_theory_band(args, model, model_config, meta, opts, logger) -> int:
    """Band intervals."""
    band = find_band_edges(model, threads=args.threads, opts=opts)
    show_band(band)
    logger.log_section('band', band.to_dict())
    columns = {
        'lo': [lo for lo, _ in band.intervals],
        'hi': [hi for _, hi in band.intervals],
    }
    emit(args, meta, band.to_dict(), columns)
    return EXIT_OK


def cmd_theory_outliers(args, model, model_config, meta, opts, logger) -> int:
    """Outlier report."""
    report = outlier_eigenvalues(model, opts=opts, threads=args.threads)
    show_outliers(report)
    document = report.to_dict()
    logger.log_section('outliers', document)
    columns = {
        'r': [e.r for e in report.entries],
        'alpha': [e.alpha for e in report.entries],
        'z': [e.z if e.z is not None else math.nan for e in report.entries],
        'visible': [e.visible for e in report.entries],
        'marginal': [e.marginal for e in report.entries],
    }
    emit(args, meta, document, columns)
    return EXIT_OK


def cmd_theory_threshold(args, model, model_config, meta, opts, logger) -> int:
    """theta* and an optional visibility sweep."""
    kappa_atoms = two_community_kappas(model_config)
    thetas = parse_sweep(args.sweep) if args.sweep else []
    gmax, rows = threshold_sweep(kappa_atoms, thetas, model.n, opts, args.threads)
    theta = threshold_from_g_max(model.c, gmax)
    show_threshold(theta, rows)

    document = {'theta_star': theta, 'g_max': gmax, 'c': model.c, 'sweep': rows}
    logger.log_section('threshold', {'theta_star': theta, 'g_max': gmax})
    columns = None
    if rows:
        columns = {
            'theta': [row['theta'] for row in rows],
            'alpha2': [row['alpha2'] for row in rows],
            'visible': [row['visible'] for row in rows],
        }
    emit(args, meta, document, columns, default='csv' if rows else 'json')
    return EXIT_OK


def cmd_theory_transitions(args, model, model_config, meta, opts, logger) -> int:
    """Strengths at which outliers 2..q disappear."""
    if 'two_community' in model_config:
        family = two_community_family(two_community_kappas(model_config), model.n)
        parameter = 'theta'
    elif 'simplex' in model_config:
        q, magnitude_atoms = simplex_parameters(model_config)
        family = simplex_family(q, magnitude_atoms, model.n)
        parameter = 'phi'
    else:
        raise ConfigError("transitions need a two_community or simplex model file")

    sweep = parse_sweep(args.sweep)
    with show_progress("Transitions") as progress:
        progress.add_task(f"Sweeping {parameter} over {len(sweep)} points...", total=None)
        transitions = transition_sequence(family, sweep, args.threads, opts)
    show_transitions(transitions)

    document = {
        'parameter': parameter,
        'transitions': [{'r': t.r, 'strength': t.strength} for t in transitions],
    }
    logger.log_section('transitions', document)
    columns = {'r': [t.r for t in transitions], 'strength': [t.strength for t in transitions]}
    emit(args, meta, document, columns)
    return EXIT_OK


def cmd_oracle_constants(args, model, model_config, meta, opts, logger) -> int:
    """x, y and the threshold coefficient."""
    constants = threshold_constants()
    show_constants(constants)
    document = constants.to_dict()
    if args.kappa is not None:
        document['kappa'] = args.kappa
        document['band_edge'] = band_edge_two_value(args.kappa)
        document['g_max'] = g_max_two_value(args.kappa)
        document['theta_star'] = threshold_two_value(args.kappa)
    logger.log_section('constants', document)
    emit(args, meta, document)
    return EXIT_OK


def cmd_oracle_density(args, model, model_config, meta, opts, logger) -> int:
    """Closed-form density on a grid."""
    if args.points < 2:
        raise ConfigError("--points must be at least 2")
    if args.kind == 'semicircle':
        if args.c is None or args.c <= 0:
            raise ConfigError("semicircle density needs --c > 0")
        half = 1.1 * 2.0 * math.sqrt(args.c)
        evaluate = lambda x: semicircle_density(x, args.c)
    else:
        if args.kappa1 is None or args.kappa1 <= 0:
            raise ConfigError("two-value density needs --kappa1 > 0")
        kappa2 = args.kappa2 if args.kappa2 is not None else 2.0 * args.kappa1
        if kappa2 <= 0:
            raise ConfigError("--kappa2 must be positive")
        half = 2.0 * math.sqrt(args.kappa1 + kappa2)
        evaluate = lambda x: two_value_density(x, args.kappa1, kappa2)

    lo = args.lo if args.lo is not None else -half
    hi = args.hi if args.hi is not None else half
    if not hi > lo:
        raise ConfigError("--hi must exceed --lo")
    xs = np.linspace(lo, hi, args.points)
    rho = np.asarray(evaluate(xs), dtype=float)
    emit(args, meta, {'kind': args.kind, 'x': xs.tolist(), 'rho': rho.tolist()}, {'x': xs, 'rho': rho}, default='csv')
    return EXIT_OK


def cmd_empirical_eig(args, model, model_config, meta, opts, logger) -> int:
    """Eigenvalues of a sampled graph."""
    graph = read_graph(args.graph_file)
    with show_progress("Eigensolve") as progress:
        progress.add_task(f"Diagonalizing n={graph.n} ({args.mode})...", total=None)
        spectrum = eigen_spectrum(graph, args.mode)
    print_info(f"Largest eigenvalue {spectrum.eigenvalues[0]:.8g}")
    logger.log_section('eigenvalues', {'n': graph.n, 'mode': args.mode, 'top': spectrum.eigenvalues[:5].tolist()})
    index = np.arange(len(spectrum.eigenvalues))
    document = {'n': graph.n, 'mode': args.mode, 'eigenvalues': spectrum.eigenvalues.tolist()}
    emit(args, meta, document, {'index': index, 'eigenvalue': spectrum.eigenvalues}, default='csv')
    return EXIT_OK


def cmd_empirical_detect(args, model, model_config, meta, opts, logger) -> int:
    """Community recovery accuracy on a sampled graph."""
    graph = read_graph(args.graph_file)
    result = detect_communities(graph, args.q, args.seed)
    show_recovery(result)
    document = {'accuracy': result.accuracy, 'q': result.q}
    logger.log_section('detect', document)
    emit(args, meta, document)
    return EXIT_OK


def cmd_empirical_interlace(args, model, model_config, meta, opts, logger) -> int:
    """Rank-one interlacing at small n."""
    holds = interlacing_check(args.n_small, model, args.alpha, args.seed)
    if holds:
        print_success("Eigenvalues interlace")
    else:
        print_error("Interlacing violated")
    document = {'n_small': args.n_small, 'alpha': args.alpha, 'holds': holds}
    logger.log_section('interlace', document)
    emit(args, meta, document)
    return EXIT_OK if holds else EXIT_FAILURE


def _sample_and_compare(args, model, opts):
    with show_progress("Compare") as progress:
        # Theory: density, band and outliers
        task = progress.add_task("Theory...", total=None)
        report = spectrum_report(model, threads=args.threads, opts=opts)
        # Sample one graph and diagonalize it
        progress.update(task, description=f"Sampling n={model.n}...")
        graph = sample_graph(model, args.seed, args.threads)
        progress.update(task, description="Diagonalizing...")
        spectrum = eigen_spectrum(graph, 'full')
        source = centered_spectrum(graph, model) if args.centered else None
    # Score empirical against theory
    result, histogram = compare(report, spectrum, args.bins, args.exclude_top, source)
    return report, spectrum, result, histogram


def _histogram_columns(histogram, report) -> dict:
    theory = report.density.interpolate(histogram.centers)
    return {
        'left': histogram.edges[:-1],
        'right': histogram.edges[1:],
        'center': histogram.centers,
        'empirical': histogram.density,
        'theory': theory,
    }


def _report_failures(result) -> int:
    show_comparison(result)
    if result.passed:
        print_success("All acceptance checks passed")
        return EXIT_OK
    for failure in result.failures:
        print_error(failure)
    return EXIT_FAILURE


def cmd_compare(args, model, model_config, meta, opts, logger) -> int:
    """Sample, diagonalize and score against theory."""
    report, spectrum, result, histogram = _sample_and_compare(args, model, opts)
    document = result.to_dict()
    logger.log_section('comparison', document)
    emit(args, meta, document)
    histogram_out = args.histogram_out
    if histogram_out is None and args.out not in (None, '-'):
        histogram_out = str(Path(args.out).with_suffix('')) + '_histogram.csv'
    if histogram_out:
        write_columns(histogram_out, _histogram_columns(histogram, report))
        write_meta(histogram_out, meta)
    return _report_failures(result)


def cmd_reproduce_figure(args, model, model_config, meta, opts, logger) -> int:
    """Write density, outliers, eigenvalues, histogram and comparison."""
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report, spectrum, result, histogram = _sample_and_compare(args, model, opts)

    # Write artifacts, each with its metadata sidecar
    files = {
        'density': out_dir / 'density.csv',
        'outliers': out_dir / 'outliers.json',
        'eigenvalues': out_dir / 'eigenvalues.csv',
        'histogram': out_dir / 'histogram.csv',
        'comparison': out_dir / 'comparison.json',
    }
    write_columns(files['density'], {'x': report.density.xs, 'rho': report.density.rho})
    files['outliers'].write_text(to_json(report.to_dict()) + '\n')
    write_columns(files['eigenvalues'], {
        'index': np.arange(len(spectrum.eigenvalues)),
        'eigenvalue': spectrum.eigenvalues,
    })
    write_columns(files['histogram'], _histogram_columns(histogram, report))
    files['comparison'].write_text(to_json(result.to_dict()) + '\n')
    for path in files.values():
        write_meta(path, meta)

    # Display and log
    show_outliers(report.outliers)
    logger.log_section('reproduce', {
        'files': {name: str(path) for name, path in files.items()},
        'comparison': result.to_dict(),
    })
    print_info(f"Artifacts written to {out_dir}")
    return _report_failures(result)


def main(argv: Optional[list[str]] = None) -> int:
    """Main application entry point."""
    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    # Set up console and run log
    set_quiet(args.quiet)
    command = command_name(args)
    logger = RunLogger(args.log_dir, command)
    set_logger(logger)
    start_time = time.time()

    try:
        # Load configuration
        resolve_threads(args.threads)
        opts = solver_options(args)
        model, model_config = None, None
        if getattr(args, 'model_file', None):
            model, model_config = load_model_config(args.model_file, getattr(args, 'n', None))

        config = build_run_config(args, model_config)
        meta = metadata(config)
        show_banner(command, args.seed, meta['config_hash'])
        logger.start_session(args.seed, args.threads, meta['config_hash'])

        # Run the subcommand
        code = args.handler(args, model, model_config, meta, opts, logger)

        elapsed = time.time() - start_time
        print_info(f"{command} finished in {elapsed:.1f} seconds")
        print_info(f"Log saved to {logger.log_path}")
        return code

    except (ModelError, ConfigError) as e:
        print_error(str(e))
        logger.log_section('error', {'type': type(e).__name__, 'message': str(e)})
        return EXIT_USAGE

    except SolverError as e:
        print_error(str(e))
        logger.log_section('error', {'type': type(e).__name__, 'message': str(e)})
        return EXIT_FAILURE

    except KeyboardInterrupt:
        console.print()
        print_warning("Interrupted by user")
        return EXIT_INTERRUPTED

    except Exception as e:
        console.print()
        print_error(f"Unexpected error: {e}")
        import traceback
        traceback.print_exc()
        return EXIT_FAILURE

    finally:
        logger.close()


if __name__ == "__main__":
    sys.exit(main())

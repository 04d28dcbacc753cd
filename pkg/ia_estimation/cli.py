import argparse
import collections.abc
import dataclasses
import logging
import pathlib
import sys
from typing import Any

import numpy as np

from . import __version__, distributions
from .base import DataError, DomainError, FamilyParams, FloatArray, NumericalError, SampleSet
from .estimators import ShapeMethod, estimate_gpareto, estimate_student_t, hill_estimate, hill_stable_average, mle_fit
from .family import Family, Sided
from .ia_select import DEFAULT_EPSILON, DEFAULT_PERMUTATIONS, OffsetMode, select_pairs, select_triplets_abs
from .manifest import RunManifest, utc_now
from .metrics_eval import CSV_COLUMNS, BenchmarkConfig, avg_loglikelihood, cvm_statistic, ks_statistic, run_benchmark
from .runner import TrialRunner, runner_for_threads
from .seeds import validate_seed
from .standard_map import MapConfig, generate_z
from .utils import dumps_json, read_json, read_values, write_json, write_rows, write_values

logger = logging.getLogger(__package__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

PLOT_DATA_COLUMNS = ("kind", "x", "density")


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class CommandOutcome:
    config: dict[str, Any]
    seed: int | None = None
    output: pathlib.Path | None = None


def _family(value: str) -> Family:
    family = Family.try_parse(value)
    if family is None:
        raise argparse.ArgumentTypeError(f"unknown family {value!r}")
    return family


def _seed(value: str) -> int:
    try:
        return validate_seed(int(value))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _positive_int(value: str) -> int:
    try:
        parsed = int(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"{value!r} is not an integer") from e
    if parsed < 1:
        raise argparse.ArgumentTypeError(f"{value!r} should be >= 1")
    return parsed


def _add_selection_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="tolerance of approximate equality")
    parser.add_argument(
        "--permutations", type=_positive_int, default=DEFAULT_PERMUTATIONS, help="number of random permutations"
    )
    parser.add_argument("--seed", type=_seed, default=0)
    parser.add_argument(
        "--offset-mode", type=OffsetMode, choices=list(OffsetMode), default=OffsetMode.DISJOINT, help="offsets of pairs"
    )
    parser.add_argument(
        "--triplet-offset-mode",
        type=OffsetMode,
        choices=list(OffsetMode),
        default=OffsetMode.OVERLAPPING,
        help="offsets of triplets and quartets",
    )


def _add_params_flags(parser: argparse.ArgumentParser, *, required: bool) -> None:
    parser.add_argument("--mu", type=float, default=0.0)
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--kappa", type=float, required=required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ia-estimate",
        description="Independent approximates estimation of heavy-tailed distributions.",
        epilog="Small samples rarely give approximate tuples: try --epsilon 2 --permutations 1.",
    )
    parser.add_argument("--threads", type=_positive_int, default=1, help="worker threads, outputs do not depend on it")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser("sample", help="draw samples of a distribution")
    sample.add_argument("--family", type=_family, required=True)
    _add_params_flags(sample, required=True)
    sample.add_argument("--n", type=_positive_int, required=True)
    sample.add_argument("--seed", type=_seed, default=0)
    sample.add_argument("--out", type=pathlib.Path, required=True)
    sample.set_defaults(handler=_sample)

    estimate = commands.add_parser("estimate", help="estimate location, scale and shape")
    estimate.add_argument("--in", dest="input", type=pathlib.Path, required=True)
    estimate.add_argument("--family", type=_family, default=Family.STUDENT_T)
    _add_selection_flags(estimate)
    estimate.add_argument(
        "--shape-method", type=ShapeMethod, choices=list(ShapeMethod), default=ShapeMethod.GEOMETRIC_MEAN
    )
    estimate.add_argument("--json-out", type=pathlib.Path)
    estimate.add_argument("--plot-data", type=pathlib.Path, help="histogram and fitted pdf as CSV")
    estimate.add_argument("--bins", type=_positive_int, default=100)
    estimate.set_defaults(handler=_estimate)

    ia_select = commands.add_parser("ia-select", help="select approximate pairs and triplets")
    ia_select.add_argument("--in", dest="input", type=pathlib.Path, required=True)
    _add_selection_flags(ia_select)
    ia_select.add_argument("--out", type=pathlib.Path, required=True, help="representatives CSV")
    ia_select.add_argument("--json-out", type=pathlib.Path, help="selection counts")
    ia_select.set_defaults(handler=_ia_select)

    fit_eval = commands.add_parser("fit-eval", help="score a fit by log-likelihood, Cramer-von Mises and KS")
    fit_eval.add_argument("--in", dest="input", type=pathlib.Path, required=True)
    fit_eval.add_argument("--family", type=_family, default=Family.STUDENT_T)
    _add_params_flags(fit_eval, required=False)
    fit_eval.add_argument("--fit", choices=["ia", "mle"], help="fit the parameters instead of passing them")
    _add_selection_flags(fit_eval)
    fit_eval.add_argument("--json-out", type=pathlib.Path)
    fit_eval.add_argument("--plot-data", type=pathlib.Path, help="histogram and fitted pdf as CSV")
    fit_eval.add_argument("--bins", type=_positive_int, default=100)
    fit_eval.set_defaults(handler=_fit_eval)

    hill = commands.add_parser("hill", help="Hill estimate of the shape")
    hill.add_argument("--in", dest="input", type=pathlib.Path, required=True)
    hill.add_argument("--k", type=_positive_int)
    hill.add_argument("--k-min", type=_positive_int)
    hill.add_argument("--k-max", type=_positive_int)
    hill.add_argument("--shift", type=float, default=0.0, help="location subtracted before taking log ratios")
    hill.add_argument("--json-out", type=pathlib.Path)
    hill.set_defaults(handler=_hill)

    benchmark = commands.add_parser("benchmark", help="Monte Carlo bias and precision of the estimators")
    benchmark.add_argument("--config", type=pathlib.Path, required=True)
    benchmark.add_argument("--out", type=pathlib.Path, required=True, help="CSV of cell and pooled rows")
    benchmark.add_argument("--markdown-out", type=pathlib.Path)
    benchmark.set_defaults(handler=_benchmark)

    stdmap = commands.add_parser("stdmap", help="centered trajectory sums of the standard map")
    stdmap.add_argument("--K", type=float, required=True)
    stdmap.add_argument("--M", type=_positive_int, required=True)
    stdmap.add_argument("--T", type=_positive_int, required=True)
    stdmap.add_argument("--seed", type=_seed, default=0)
    stdmap.add_argument("--no-wrap", dest="wrap", action="store_false")
    stdmap.add_argument("--out", type=pathlib.Path, required=True)
    stdmap.add_argument("--estimate", action="store_true", help="estimate a Student's t from the sums")
    stdmap.add_argument("--json-out", type=pathlib.Path)
    stdmap.set_defaults(handler=_stdmap)

    replay = commands.add_parser("replay", help="re-run a command from its manifest")
    replay.add_argument("manifest", type=pathlib.Path)
    return parser


def _emit_json(document: dict[str, Any], path: pathlib.Path | None) -> None:
    if path is None:
        sys.stdout.write(dumps_json(document))
    else:
        write_json(path, document)


def _read_input(path: pathlib.Path) -> SampleSet:
    try:
        return SampleSet(read_values(path), source=str(path))
    except OSError as e:
        raise DataError(f"Cannot read {path}: {e}") from e


def _estimate_report(args: argparse.Namespace, family: Family, values: SampleSet, runner: TrialRunner):
    if family == Family.STUDENT_T:
        return estimate_student_t(
            values,
            epsilon=args.epsilon,
            permutations=args.permutations,
            seed=args.seed,
            offset_mode=args.offset_mode,
            triplet_offset_mode=args.triplet_offset_mode,
            shape_method=getattr(args, "shape_method", ShapeMethod.GEOMETRIC_MEAN),
            runner=runner,
        )
    return estimate_gpareto(
        values,
        Sided.ONE_SIDED if family == Family.GPARETO_ONE_SIDED else Sided.TWO_SIDED,
        epsilon=args.epsilon,
        permutations=args.permutations,
        seed=args.seed,
        offset_mode=args.offset_mode,
        runner=runner,
    )


def plot_data_rows(values: FloatArray, p: FamilyParams, *, bins: int) -> list[dict[str, Any]]:
    # heavy tails would stretch the histogram over a few extreme samples
    lo, hi = np.quantile(values, [0.005, 0.995])
    if not hi > lo:
        lo, hi = lo - 0.5, hi + 0.5
    density, edges = np.histogram(values, bins=bins, range=(lo, hi))
    density = density / (values.shape[0] * np.diff(edges))
    centers = 0.5 * (edges[:-1] + edges[1:])
    grid = np.linspace(lo, hi, 4 * bins + 1)
    rows = [{"kind": "histogram", "x": x, "density": d} for x, d in zip(centers.tolist(), density.tolist())]
    pdf = distributions.pdf(p, grid)
    rows.extend({"kind": "pdf", "x": x, "density": d} for x, d in zip(grid.tolist(), pdf.tolist()))
    return rows


def _sample(args: argparse.Namespace, runner: TrialRunner) -> CommandOutcome:
    params = FamilyParams(family=args.family, mu=args.mu, sigma=args.sigma, kappa=args.kappa)
    values = distributions.sample(params, args.n, args.seed)
    write_values(args.out, values.values)
    return CommandOutcome(config={**params.as_dict(), "n": args.n}, seed=args.seed, output=args.out)


def _estimate(args: argparse.Namespace, runner: TrialRunner) -> CommandOutcome:
    values = _read_input(args.input)
    report = _estimate_report(args, args.family, values, runner)
    _emit_json(report.as_dict(), args.json_out)
    if args.plot_data is not None:
        write_rows(args.plot_data, PLOT_DATA_COLUMNS, plot_data_rows(values.values, report.params, bins=args.bins))
    return CommandOutcome(
        config={
            "input": str(args.input),
            "family": str(args.family),
            "epsilon": args.epsilon,
            "permutations": args.permutations,
            "offset_mode": str(args.offset_mode),
            "triplet_offset_mode": str(args.triplet_offset_mode),
            "shape_method": str(args.shape_method),
        },
        seed=args.seed,
        output=args.json_out,
    )


def _ia_select(args: argparse.Namespace, runner: TrialRunner) -> CommandOutcome:
    values = _read_input(args.input)
    selection_args: dict[str, Any] = dict(
        epsilon=args.epsilon, permutations=args.permutations, seed=args.seed, runner=runner
    )
    pairs = select_pairs(values, offset_mode=args.offset_mode, **selection_args)
    triplets = select_triplets_abs(
        values, offset_mode=args.triplet_offset_mode, normalization=pairs.normalization, **selection_args
    )
    rows = [{"order": 2, "value": v} for v in pairs.representatives.tolist()]
    rows.extend({"order": 3, "value": v} for v in triplets.representatives.tolist())
    write_rows(args.out, ("order", "value"), rows)
    counts = {
        "n2": pairs.count,
        "n3": triplets.count,
        "epsilon": args.epsilon,
        "permutations": args.permutations,
        "center": pairs.normalization.center,
        "spread": pairs.normalization.spread,
    }
    _emit_json(counts, args.json_out)
    return CommandOutcome(
        config={
            "input": str(args.input),
            "epsilon": args.epsilon,
            "permutations": args.permutations,
            "offset_mode": str(args.offset_mode),
            "triplet_offset_mode": str(args.triplet_offset_mode),
        },
        seed=args.seed,
        output=args.out,
    )


def _fit_eval(args: argparse.Namespace, runner: TrialRunner) -> CommandOutcome:
    values = _read_input(args.input)
    if args.fit is None:
        if args.kappa is None:
            raise DomainError("Either --kappa or --fit should be given")
        params = FamilyParams(family=args.family, mu=args.mu, sigma=args.sigma, kappa=args.kappa)
    else:
        params = _estimate_report(args, args.family, values, runner).params
        if args.fit == "mle":
            params = mle_fit(values, args.family, start=params)
    cvm = cvm_statistic(values, params)
    document = {
        "params": params.as_dict(),
        "avg_ll": avg_loglikelihood(values, params),
        "cvm": cvm.statistic,
        "cvm_p": cvm.p_value,
        "ks": ks_statistic(values, params),
    }
    _emit_json(document, args.json_out)
    if args.plot_data is not None:
        write_rows(args.plot_data, PLOT_DATA_COLUMNS, plot_data_rows(values.values, params, bins=args.bins))
    return CommandOutcome(
        config={
            "input": str(args.input),
            "family": str(args.family),
            "params": params.as_dict() if args.fit is None else None,
            "fit": args.fit,
            "epsilon": args.epsilon,
            "permutations": args.permutations,
        },
        seed=args.seed,
        output=args.json_out,
    )


def _hill(args: argparse.Namespace, runner: TrialRunner) -> CommandOutcome:
    values = _read_input(args.input).values - args.shift
    document: dict[str, Any]
    if args.k is not None:
        document = {"kappa": hill_estimate(values, args.k), "k_used": args.k}
    else:
        k_min = args.k_min or 1
        k_max = args.k_max or values.shape[0] - 1
        average = hill_stable_average(values, (k_min, k_max))
        document = {"kappa": average.kappa, "k_used": list(average.k_window), "k_range": list(average.k_range)}
    _emit_json(document, args.json_out)
    return CommandOutcome(
        config={"input": str(args.input), "k": args.k, "k_min": args.k_min, "k_max": args.k_max, "shift": args.shift},
        output=args.json_out,
    )


def _benchmark(args: argparse.Namespace, runner: TrialRunner) -> CommandOutcome:
    try:
        document = read_json(args.config)
    except OSError as e:
        raise DataError(f"Cannot read {args.config}: {e}") from e
    if not isinstance(document, dict):
        raise DomainError(f"{args.config} should hold a JSON object")
    cfg = BenchmarkConfig.from_json(document)
    result = run_benchmark(cfg, runner)
    write_rows(args.out, CSV_COLUMNS, result.rows())
    markdown_out = args.markdown_out or args.out.with_suffix(".md")
    markdown_out.write_text(result.to_markdown(), encoding="utf-8")
    return CommandOutcome(config=cfg.as_dict(), seed=cfg.seed, output=args.out)


def _stdmap(args: argparse.Namespace, runner: TrialRunner) -> CommandOutcome:
    cfg = MapConfig(K=args.K, M=args.M, T=args.T, seed=args.seed, wrap=args.wrap)
    z = generate_z(cfg, runner)
    write_values(args.out, z.values)
    if args.estimate:
        report = estimate_student_t(z, seed=args.seed, runner=runner)
        _emit_json(report.as_dict(), args.json_out)
    return CommandOutcome(config={**cfg.as_dict(), "estimate": args.estimate}, seed=args.seed, output=args.out)


def _run(args: argparse.Namespace, argv: collections.abc.Sequence[str]) -> int:
    if args.command == "replay":
        manifest = RunManifest.read(args.manifest)
        logger.info("Replaying %s", manifest.command, extra={"argv": list(manifest.argv)})
        return main(manifest.argv)

    started_at = utc_now()
    outcome = args.handler(args, runner_for_threads(args.threads))
    if outcome.output is not None:
        RunManifest(
            command=args.command,
            config=outcome.config,
            seed=outcome.seed,
            version=__version__,
            argv=tuple(argv),
            started_at=started_at,
            finished_at=utc_now(),
        ).write(outcome.output)
    return EXIT_OK


def main(argv: collections.abc.Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logging.basicConfig(level=args.log_level)
    try:
        return _run(args, argv)
    except DomainError as e:
        logger.error("Invalid arguments: %s", e)
        return EXIT_USAGE
    except DataError as e:
        logger.error("Data error: %s", e)
        return EXIT_DATA
    except NumericalError as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL

import collections.abc
import dataclasses
import itertools
import logging
import math
import time
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.stats

from . import distributions
from .base import DataError, DomainError, EmptyInputError, FamilyParams, NumericalError, SampleSet, as_array
from .estimators import ShapeMethod, avg_negative_loglikelihood, estimate_gpareto, estimate_student_t, mle_fit
from .family import Family, Sided
from .ia_select import DEFAULT_EPSILON, DEFAULT_PERMUTATIONS
from .runner import TrialRunner, sequential_runner
from .seeds import Stream, derive_seed, validate_seed

logger = logging.getLogger(__package__)

try:
    import prometheus_client as prom

    trial_latency_histogram = prom.Histogram(
        "ia_estimation_benchmark_trial_latency",
        "Duration of benchmark trials.",
        labelnames=("family", "outcome"),
        buckets=(0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0, 30.0),
    )

    def capture_metrics(*, family: Family, outcome: str, started_at: float) -> None:
        elapsed = max(0.0, time.perf_counter() - started_at)
        trial_latency_histogram.labels(str(family), outcome).observe(elapsed)

except ImportError:

    def capture_metrics(*, family: Family, outcome: str, started_at: float) -> None:
        pass


def avg_loglikelihood(samples: SampleSet | npt.ArrayLike, p: FamilyParams) -> float:
    values = as_array(samples)
    if values.size == 0:
        raise EmptyInputError("No samples to evaluate")
    return -avg_negative_loglikelihood(values, p)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class CvmResult:
    statistic: float
    p_value: float | None


def cramer_von_mises_uniform(u: npt.ArrayLike) -> CvmResult:
    """Cramer-von Mises statistic of probability-integral transformed samples against the uniform law."""
    ordered = np.sort(np.asarray(u, dtype=np.float64).reshape(-1))
    size = ordered.shape[0]
    if size == 0:
        raise EmptyInputError("No samples to evaluate")
    expected = (2.0 * np.arange(1, size + 1) - 1.0) / (2.0 * size)
    statistic = 1.0 / (12.0 * size) + math.fsum((expected - ordered) ** 2)
    # the limiting distribution needs at least two observations
    p_value = float(scipy.stats.cramervonmises(ordered, "uniform").pvalue) if size > 1 else None
    return CvmResult(statistic=statistic, p_value=p_value)


def cvm_statistic(samples: SampleSet | npt.ArrayLike, p: FamilyParams) -> CvmResult:
    return cramer_von_mises_uniform(distributions.cdf(p, as_array(samples)))


def ks_statistic(samples: SampleSet | npt.ArrayLike, p: FamilyParams) -> float:
    values = as_array(samples)
    if values.size == 0:
        raise EmptyInputError("No samples to evaluate")
    return float(scipy.stats.kstest(values, lambda x: distributions.cdf(p, x)).statistic)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class BenchmarkConfig:
    family: Family
    shapes: tuple[float, ...]
    locations: tuple[float, ...] = (0.0,)
    scales: tuple[float, ...] = (1.0,)
    sizes: tuple[int, ...] = (10_000,)
    trials: int = 20
    epsilon: float = DEFAULT_EPSILON
    permutations: int = DEFAULT_PERMUTATIONS
    seed: int = 0
    shape_method: ShapeMethod = ShapeMethod.GEOMETRIC_MEAN

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise DomainError("Trials count should be >= 1")
        for name in ("shapes", "locations", "scales", "sizes"):
            if not getattr(self, name):
                raise DomainError(f"Grid {name} should not be empty")
        if any(s < 0 for s in self.shapes):
            raise DomainError("Shapes should be >= 0")
        if any(s <= 0 for s in self.scales):
            raise DomainError("Scales should be > 0")
        if any(n < 1 for n in self.sizes):
            raise DomainError("Sizes should be >= 1")
        if not self.epsilon > 0:
            raise DomainError("Epsilon should be > 0")
        if self.permutations < 1:
            raise DomainError("Permutations count should be >= 1")
        validate_seed(self.seed)

    @staticmethod
    def from_json(document: collections.abc.Mapping[str, Any]) -> "BenchmarkConfig":
        family = Family.try_parse(document.get("family"))
        if family is None:
            raise DomainError(f"Unknown family {document.get('family')!r}")
        unknown = set(document) - {f.name for f in dataclasses.fields(BenchmarkConfig)}
        if unknown:
            raise DomainError(f"Unknown benchmark keys: {', '.join(sorted(unknown))}")
        values: dict[str, Any] = {"family": family}
        try:
            for key in ("shapes", "locations", "scales"):
                if key in document:
                    values[key] = tuple(float(v) for v in document[key])
            if "sizes" in document:
                values["sizes"] = tuple(int(v) for v in document["sizes"])
            for key, cast in (("trials", int), ("epsilon", float), ("permutations", int), ("seed", int)):
                if key in document:
                    values[key] = cast(document[key])
            if "shape_method" in document:
                values["shape_method"] = ShapeMethod(document["shape_method"])
        except (TypeError, ValueError) as e:
            raise DomainError(f"Invalid benchmark configuration: {e}") from e
        if "shapes" not in values:
            raise DomainError("Benchmark configuration should list shapes")
        return BenchmarkConfig(**values)

    def as_dict(self) -> dict[str, Any]:
        return {
            "family": str(self.family),
            "shapes": list(self.shapes),
            "locations": list(self.locations),
            "scales": list(self.scales),
            "sizes": list(self.sizes),
            "trials": self.trials,
            "epsilon": self.epsilon,
            "permutations": self.permutations,
            "seed": self.seed,
            "shape_method": str(self.shape_method),
        }


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class TrialOutcome:
    errors: tuple[float, float, float] | None
    n2: int = 0
    n3: int = 0
    predicted_loc_precision: float | None = None
    predicted_scale_precision: float | None = None

    @property
    def failed(self) -> bool:
        return self.errors is None


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class ErrorSummary:
    bias: float | None
    precision: float | None

    @staticmethod
    def of(errors: npt.ArrayLike) -> "ErrorSummary":
        values = np.asarray(errors, dtype=np.float64)
        if values.size == 0:
            return ErrorSummary(bias=None, precision=None)
        precision = float(np.std(values, ddof=1)) if values.size > 1 else None
        return ErrorSummary(bias=float(np.mean(values)), precision=precision)


CSV_COLUMNS = (
    "row_type",
    "family",
    "shape",
    "location",
    "scale",
    "size",
    "trials",
    "failures",
    "loc_bias",
    "loc_precision",
    "scale_bias",
    "scale_precision",
    "shape_bias",
    "shape_precision",
    "n2_mean",
    "n2_std",
    "n3_mean",
    "n3_std",
    "predicted_loc_precision",
    "predicted_scale_precision",
)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class CellSummary:
    """
    Bias and precision of the estimates of one benchmark cell.

    Pooled rows aggregate every cell sharing a shape and a size, their location and scale are None.
    Location and scale errors are expressed in units of the true scale.
    """

    family: Family
    shape: float
    location: float | None
    scale: float | None
    size: int
    trials: int
    failures: int
    loc: ErrorSummary
    sigma: ErrorSummary
    kappa: ErrorSummary
    n2_mean: float | None
    n2_std: float | None
    n3_mean: float | None
    n3_std: float | None
    predicted_loc_precision: float | None = None
    predicted_scale_precision: float | None = None

    @property
    def pooled(self) -> bool:
        return self.location is None

    @property
    def failed(self) -> bool:
        return self.failures == self.trials

    @staticmethod
    def aggregate(
        family: Family,
        shape: float,
        location: float | None,
        scale: float | None,
        size: int,
        outcomes: collections.abc.Sequence[TrialOutcome],
    ) -> "CellSummary":
        succeeded = [o for o in outcomes if o.errors is not None]
        errors = np.array([o.errors for o in succeeded], dtype=np.float64).reshape(-1, 3)
        n2 = np.array([o.n2 for o in succeeded], dtype=np.float64)
        n3 = np.array([o.n3 for o in succeeded], dtype=np.float64)
        return CellSummary(
            family=family,
            shape=shape,
            location=location,
            scale=scale,
            size=size,
            trials=len(outcomes),
            failures=len(outcomes) - len(succeeded),
            loc=ErrorSummary.of(errors[:, 0]),
            sigma=ErrorSummary.of(errors[:, 1]),
            kappa=ErrorSummary.of(errors[:, 2]),
            n2_mean=float(np.mean(n2)) if n2.size else None,
            n2_std=float(np.std(n2, ddof=1)) if n2.size > 1 else None,
            n3_mean=float(np.mean(n3)) if n3.size else None,
            n3_std=float(np.std(n3, ddof=1)) if n3.size > 1 else None,
            predicted_loc_precision=_mean_of(o.predicted_loc_precision for o in succeeded),
            predicted_scale_precision=_mean_of(o.predicted_scale_precision for o in succeeded),
        )

    def as_row(self) -> dict[str, Any]:
        return {
            "row_type": "pooled" if self.pooled else "cell",
            "family": str(self.family),
            "shape": self.shape,
            "location": self.location,
            "scale": self.scale,
            "size": self.size,
            "trials": self.trials,
            "failures": self.failures,
            "loc_bias": self.loc.bias,
            "loc_precision": self.loc.precision,
            "scale_bias": self.sigma.bias,
            "scale_precision": self.sigma.precision,
            "shape_bias": self.kappa.bias,
            "shape_precision": self.kappa.precision,
            "n2_mean": self.n2_mean,
            "n2_std": self.n2_std,
            "n3_mean": self.n3_mean,
            "n3_std": self.n3_std,
            "predicted_loc_precision": self.predicted_loc_precision,
            "predicted_scale_precision": self.predicted_scale_precision,
        }


def _mean_of(values: collections.abc.Iterable[float | None]) -> float | None:
    # infinite predictions are kept out of the mean
    finite = [v for v in values if v is not None and math.isfinite(v)]
    return float(np.mean(finite)) if finite else None


def _bias_precision(summary: ErrorSummary, digits: int) -> str:
    if summary.bias is None:
        return "n/a"
    precision = "n/a" if summary.precision is None else f"{summary.precision:.{digits}f}"
    return f"{summary.bias:.{digits}f} ± {precision}"


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class BenchmarkResult:
    config: BenchmarkConfig
    cells: tuple[CellSummary, ...]
    pooled: tuple[CellSummary, ...]

    def rows(self) -> list[dict[str, Any]]:
        return [c.as_row() for c in (*self.cells, *self.pooled)]

    def pooled_for(self, shape: float, size: int) -> CellSummary:
        for summary in self.pooled:
            if summary.shape == shape and summary.size == size:
                return summary
        raise KeyError((shape, size))

    def to_markdown(self) -> str:
        lines = [
            f"Benchmark of {self.config.family}: {self.config.trials} trials per cell, "
            f"epsilon {self.config.epsilon:g}, {self.config.permutations} permutations, seed {self.config.seed}",
            "",
            "| shape | size | location | scale | shape | N2 | N3 | failures |",
            "|---|---|---|---|---|---|---|---|",
        ]
        for summary in self.pooled:
            n2 = "n/a" if summary.n2_mean is None else f"{summary.n2_mean:.0f} ± {summary.n2_std or 0.0:.0f}"
            n3 = "n/a" if summary.n3_mean is None else f"{summary.n3_mean:.0f} ± {summary.n3_std or 0.0:.0f}"
            lines.append(
                f"| {summary.shape:g} | {summary.size} | {_bias_precision(summary.loc, 3)} | "
                f"{_bias_precision(summary.sigma, 2)} | {_bias_precision(summary.kappa, 2)} | {n2} | {n3} | "
                f"{summary.failures}/{summary.trials} |"
            )
        failed = [c for c in self.cells if c.failed]
        if failed:
            lines.append("")
            lines.append("Cells where every trial failed:")
            lines.extend(
                f"- shape {c.shape:g}, size {c.size}, location {c.location:g}, scale {c.scale:g}" for c in failed
            )
        return "\n".join(lines) + "\n"


@dataclasses.dataclass(frozen=True, slots=True)
class _Trial:
    shape_index: int
    size_index: int
    location_index: int
    scale_index: int
    trial: int


def _estimate(cfg: BenchmarkConfig, values: SampleSet, seed: int):
    if cfg.family == Family.STUDENT_T:
        return estimate_student_t(
            values,
            epsilon=cfg.epsilon,
            permutations=cfg.permutations,
            seed=seed,
            shape_method=cfg.shape_method,
        )
    sided = Sided.ONE_SIDED if cfg.family == Family.GPARETO_ONE_SIDED else Sided.TWO_SIDED
    return estimate_gpareto(values, sided, epsilon=cfg.epsilon, permutations=cfg.permutations, seed=seed)


def run_trial(cfg: BenchmarkConfig, trial: _Trial) -> TrialOutcome:
    started_at = time.perf_counter()
    truth = FamilyParams(
        family=cfg.family,
        mu=cfg.locations[trial.location_index],
        sigma=cfg.scales[trial.scale_index],
        kappa=cfg.shapes[trial.shape_index],
    )
    seed = derive_seed(
        cfg.seed,
        Stream.BENCHMARK,
        trial.shape_index,
        trial.size_index,
        trial.location_index,
        trial.scale_index,
        trial.trial,
    )
    values = distributions.sample(truth, cfg.sizes[trial.size_index], seed)
    try:
        report = _estimate(cfg, values, seed)
    except (DataError, NumericalError) as e:
        logger.debug("Benchmark trial failed: %s", e, extra={"trial": dataclasses.astuple(trial)})
        capture_metrics(family=cfg.family, outcome="failure", started_at=started_at)
        return TrialOutcome(errors=None)
    capture_metrics(family=cfg.family, outcome="success", started_at=started_at)
    estimated = report.params
    theory = report.theory
    return TrialOutcome(
        errors=(
            (estimated.mu - truth.mu) / truth.sigma,
            (estimated.sigma - truth.sigma) / truth.sigma,
            estimated.kappa - truth.kappa,
        ),
        n2=report.n2,
        n3=report.n3,
        predicted_loc_precision=theory.loc_precision / truth.sigma if theory is not None else None,
        predicted_scale_precision=theory.scale_precision / truth.sigma if theory is not None else None,
    )


def run_benchmark(cfg: BenchmarkConfig, runner: TrialRunner | None = None) -> BenchmarkResult:
    trials = [
        _Trial(si, ni, li, ci, t)
        for si, ni, li, ci in itertools.product(
            range(len(cfg.shapes)), range(len(cfg.sizes)), range(len(cfg.locations)), range(len(cfg.scales))
        )
        for t in range(cfg.trials)
    ]
    logger.info("Running %d benchmark trials", len(trials), extra={"config": cfg.as_dict()})
    outcomes = (runner or sequential_runner()).map(lambda trial: run_trial(cfg, trial), trials)

    by_cell: dict[tuple[int, int, int, int], list[TrialOutcome]] = {}
    for trial, outcome in zip(trials, outcomes):
        key = (trial.shape_index, trial.size_index, trial.location_index, trial.scale_index)
        by_cell.setdefault(key, []).append(outcome)

    cells = []
    pooled = []
    for si, shape in enumerate(cfg.shapes):
        for ni, size in enumerate(cfg.sizes):
            pooled_outcomes: list[TrialOutcome] = []
            for li, location in enumerate(cfg.locations):
                for ci, scale in enumerate(cfg.scales):
                    cell_outcomes = by_cell[(si, ni, li, ci)]
                    pooled_outcomes.extend(cell_outcomes)
                    summary = CellSummary.aggregate(cfg.family, shape, location, scale, size, cell_outcomes)
                    if summary.failed:
                        logger.warning(
                            "Every trial failed for shape %s, size %s, location %s, scale %s",
                            shape,
                            size,
                            location,
                            scale,
                        )
                    cells.append(summary)
            pooled.append(CellSummary.aggregate(cfg.family, shape, None, None, size, pooled_outcomes))
    return BenchmarkResult(config=cfg, cells=tuple(cells), pooled=tuple(pooled))


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class ComparisonSummary:
    ia_avg_ll: float
    mle_avg_ll: float
    avg_ll_std: float
    ia_cvm_p: float
    mle_cvm_p: float
    trials: int
    failures: int


def small_sample_comparison(
    truth: FamilyParams,
    *,
    size: int = 100,
    trials: int = 25,
    epsilon: float = 1.0,
    permutations: int = 5,
    seed: int = 0,
    runner: TrialRunner | None = None,
) -> ComparisonSummary:
    """
    Compare IA and likelihood fits on small samples by the fit quality they reach.

    Each trial draws size samples of the truth and scores both fits with the average
    log-likelihood and the Cramer-von Mises p-value on the same samples.
    """
    if trials < 1:
        raise DomainError("Trials count should be >= 1")

    def compare(trial: int) -> tuple[float, float, float, float] | None:
        trial_seed = derive_seed(seed, Stream.BENCHMARK, size, trial)
        values = distributions.sample(truth, size, trial_seed)
        try:
            if truth.family == Family.STUDENT_T:
                ia = estimate_student_t(values, epsilon=epsilon, permutations=permutations, seed=trial_seed).params
            else:
                sided = Sided.ONE_SIDED if truth.family == Family.GPARETO_ONE_SIDED else Sided.TWO_SIDED
                ia = estimate_gpareto(values, sided, epsilon=epsilon, permutations=permutations, seed=trial_seed).params
            mle = mle_fit(values, truth.family, start=ia)
        except (DataError, NumericalError) as e:
            logger.debug("Comparison trial failed: %s", e, extra={"trial": trial})
            return None
        return (
            avg_loglikelihood(values, ia),
            avg_loglikelihood(values, mle),
            cvm_statistic(values, ia).p_value or 0.0,
            cvm_statistic(values, mle).p_value or 0.0,
        )

    results = [r for r in (runner or sequential_runner()).map(compare, range(trials)) if r is not None]
    if not results:
        raise DataError(f"Every one of {trials} comparison trials failed")
    scores = np.array(results, dtype=np.float64)
    both = scores[:, :2].reshape(-1)
    ia_avg_ll, mle_avg_ll, ia_cvm_p, mle_cvm_p = (float(v) for v in np.mean(scores, axis=0))
    return ComparisonSummary(
        ia_avg_ll=ia_avg_ll,
        mle_avg_ll=mle_avg_ll,
        avg_ll_std=float(np.std(both, ddof=1)),
        ia_cvm_p=ia_cvm_p,
        mle_cvm_p=mle_cvm_p,
        trials=trials,
        failures=trials - len(results),
    )

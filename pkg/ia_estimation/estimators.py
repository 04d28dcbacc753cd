import dataclasses
import enum
import logging
import math
import time
from typing import Any

import numpy as np
import numpy.typing as npt

from . import distributions
from .base import (
    DegenerateSampleError,
    DomainError,
    EmptyInputError,
    EmptySelectionError,
    FamilyParams,
    NoSignChangeError,
    SampleSet,
    as_array,
)
from .family import Family, Sided
from .ia_select import (
    DEFAULT_EPSILON,
    DEFAULT_PERMUTATIONS,
    IASelection,
    OffsetMode,
    SelectionMode,
    normalize,
    select_ntuples,
    select_pairs,
    select_triplets_abs,
)
from .numerics import RootBracket, find_root_bracketed, harmonic_real, minimize_simplex
from .power_moments import (
    invert_location_two_sided,
    invert_scale_pareto_one_sided,
    invert_scale_student,
    invert_shape_pareto,
    invert_shape_student_alt,
)
from .runner import TrialRunner

logger = logging.getLogger(__package__)

try:
    import prometheus_client as prom

    latency_histogram = prom.Histogram(
        "ia_estimation_latency",
        "Duration of IA estimations.",
        labelnames=("family", "outcome"),
        buckets=(0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0, 30.0, 60.0),
    )

    def capture_metrics(*, family: Family, outcome: str, started_at: float) -> None:
        elapsed = max(0.0, time.perf_counter() - started_at)
        latency_histogram.labels(str(family), outcome).observe(elapsed)

except ImportError:

    def capture_metrics(*, family: Family, outcome: str, started_at: float) -> None:
        pass


SMALL_SAMPLE_SIZE = 30
SHAPE_SCAN_BOUNDS = (1e-4, 64.0)
SHAPE_SCAN_POINTS = 241
SHAPE_TOLERANCE = 1e-8
MLE_MIN_SHAPE = 1e-3
_LOG_PARAM_LIMIT = 30.0


class ShapeMethod(enum.StrEnum):
    GEOMETRIC_MEAN = enum.auto()
    POWER_MOMENT = enum.auto()


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class TheoryPrediction:
    scale_bias: float
    loc_precision: float
    scale_precision: float

    def as_dict(self) -> dict[str, float | None]:
        return {
            "scale_bias": self.scale_bias,
            "loc_precision": _finite_or_none(self.loc_precision),
            "scale_precision": _finite_or_none(self.scale_precision),
        }


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class EstimateReport:
    params: FamilyParams
    n2: int
    n3: int
    epsilon: float
    permutations: int
    theory: TheoryPrediction | None = None
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, Any]:
        return {
            "family": str(self.params.family),
            "mu": self.params.mu,
            "sigma": self.params.sigma,
            "kappa": self.params.kappa,
            "n2": self.n2,
            "n3": self.n3,
            "epsilon": self.epsilon,
            "permutations": self.permutations,
            "warnings": list(self.warnings),
            "theory": self.theory.as_dict() if self.theory is not None else None,
        }


def _finite_or_none(value: float) -> float | None:
    return value if math.isfinite(value) else None


def _warn(warnings_sink: list[str] | None, message: str, **extra: Any) -> None:
    logger.warning(message, extra=extra)
    if warnings_sink is not None:
        warnings_sink.append(message)


def _require(selection: IASelection, what: str) -> None:
    if selection.count == 0:
        raise EmptySelectionError(
            f"No approximate {what} were selected with epsilon={selection.epsilon} and "
            f"{selection.permutations} permutations; raise epsilon (e.g. to {2 * selection.epsilon:g}) "
            "or the number of permutations"
        )


def estimate_location_ia(pairs: IASelection) -> float:
    if pairs.order != 2 or pairs.mode != SelectionMode.EQUAL_DIAGONAL:
        raise DomainError("Location is estimated from pairs selected along the equal diagonal")
    _require(pairs, "pairs")
    return invert_location_two_sided(pairs.mean())


def estimate_scale_student_ia(
    triplets: IASelection, mu: float, *, warnings_sink: list[str] | None = None
) -> float:
    if triplets.order != 3 or triplets.mode != SelectionMode.ABS_DIAGONALS:
        raise DomainError("Student's t scale is estimated from triplets selected along all sign diagonals")
    _require(triplets, "triplets")
    sigma = invert_scale_student(triplets.mean_square(mu))
    if sigma == 0:
        _warn(warnings_sink, "All triplet representatives coincide with the location, scale is 0")
    return sigma


def _log_shape_residual(kappa: float, log_gm: float, log_sigma: float) -> float:
    # log of 2 sqrt(kappa) exp(H_{1/(2 kappa) - 1} / 2) GM / sigma
    return (
        math.log(2.0)
        + 0.5 * math.log(kappa)
        + 0.5 * harmonic_real(1.0 / (2.0 * kappa) - 1.0)
        + log_gm
        - log_sigma
    )


def estimate_shape_geometric_mean(
    samples: SampleSet | npt.ArrayLike,
    mu: float,
    sigma: float,
    *,
    warnings_sink: list[str] | None = None,
) -> float:
    """
    Solve the geometric-mean relation of the Student's t for the shape.

    The residual is evaluated in log form, which has the same roots, on a log grid over
    [1e-4, 64] and the first sign change is refined by a bracketed root finder.
    """
    if not sigma > 0:
        raise DomainError(f"Scale should be positive, got {sigma}")
    values = as_array(samples)
    deviations = np.abs(values - mu)
    keep = deviations > 4.0 * np.spacing(max(abs(mu), sigma))
    if not keep.any():
        raise DegenerateSampleError("All samples coincide with the location")
    if not keep.all():
        _warn(warnings_sink, f"Dropped {int((~keep).sum())} samples equal to the location", dropped=int((~keep).sum()))
    log_gm = float(np.mean(np.log(deviations[keep])))
    log_sigma = math.log(sigma)

    def residual(kappa: float) -> float:
        return _log_shape_residual(kappa, log_gm, log_sigma)

    grid = np.geomspace(*SHAPE_SCAN_BOUNDS, SHAPE_SCAN_POINTS)
    residuals = np.array([residual(float(k)) for k in grid])
    crossings = np.flatnonzero(np.sign(residuals[:-1]) != np.sign(residuals[1:]))
    if crossings.size == 0:
        if residuals[0] < 0:
            _warn(
                warnings_sink,
                "Geometric mean is lighter-tailed than the Gaussian limit, shape clipped to 0",
                residual=float(residuals[0]),
            )
            return 0.0
        raise NoSignChangeError(
            f"Shape residual does not change sign on [{grid[0]:g}, {grid[-1]:g}]: "
            f"log residuals {residuals[0]:.6g} and {residuals[-1]:.6g}"
        )
    if crossings.size > 1:
        _warn(
            warnings_sink,
            f"Shape residual changes sign {crossings.size} times, the smallest root is used",
            crossings=int(crossings.size),
        )
    i = int(crossings[0])
    bracket = RootBracket(lo=float(grid[i]), hi=float(grid[i + 1]), f_lo=residuals[i], f_hi=residuals[i + 1])
    return find_root_bracketed(residual, bracket, tol=SHAPE_TOLERANCE)


def predict_bias_precision(kappa: float, sigma: float, n2: int, n3: int) -> TheoryPrediction:
    if n2 < 1 or n3 < 1:
        raise DomainError(f"Selection counts should be positive, got n2={n2}, n3={n3}")
    scale_bias = -sigma / n2
    loc_precision = sigma / math.sqrt((2.0 - kappa) * n2) if kappa < 2 else math.inf
    if kappa < 1.5:
        scale_precision = (3.0 * sigma * sigma / math.sqrt(n3)) * math.sqrt(
            1.0 / (3.0 - 2.0 * kappa) + 1.0 / ((2.0 - kappa) * n2) ** 2
        )
    else:
        scale_precision = math.inf
    return TheoryPrediction(scale_bias=scale_bias, loc_precision=loc_precision, scale_precision=scale_precision)


def _prepare(samples: SampleSet | npt.ArrayLike, warnings_sink: list[str]) -> np.ndarray:
    values = as_array(samples)
    if values.size == 0:
        raise EmptyInputError("No samples to estimate from")
    if values.size < SMALL_SAMPLE_SIZE:
        _warn(warnings_sink, f"Only {values.size} samples, estimates are unreliable below {SMALL_SAMPLE_SIZE}")
    return values


def estimate_student_t(
    samples: SampleSet | npt.ArrayLike,
    *,
    epsilon: float = DEFAULT_EPSILON,
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    offset_mode: OffsetMode = OffsetMode.DISJOINT,
    triplet_offset_mode: OffsetMode = OffsetMode.OVERLAPPING,
    shape_method: ShapeMethod = ShapeMethod.GEOMETRIC_MEAN,
    runner: TrialRunner | None = None,
) -> EstimateReport:
    """
    Estimates location, scale and shape of a Student's t sample.

    Pairs are cut with `offset_mode`, triplets and quartets with `triplet_offset_mode`.
    """
    started_at = time.perf_counter()
    outcome = "failure"
    try:
        warnings_sink: list[str] = []
        values = _prepare(samples, warnings_sink)
        _, state = normalize(values)
        selection_args: dict[str, Any] = dict(
            epsilon=epsilon,
            permutations=permutations,
            seed=seed,
            normalization=state,
            runner=runner,
        )
        pairs = select_pairs(values, offset_mode=offset_mode, **selection_args)
        mu = estimate_location_ia(pairs)
        triplets = select_triplets_abs(values, offset_mode=triplet_offset_mode, **selection_args)
        sigma = estimate_scale_student_ia(triplets, mu, warnings_sink=warnings_sink)
        if sigma == 0:
            raise DegenerateSampleError("Estimated scale is 0")

        if shape_method == ShapeMethod.POWER_MOMENT:
            quartets = select_ntuples(
                values, 4, mode=SelectionMode.ABS_DIAGONALS, offset_mode=triplet_offset_mode, **selection_args
            )
            _require(quartets, "quartets")
            kappa = invert_shape_student_alt(quartets.mean_square(mu), sigma, warnings_sink=warnings_sink)
        else:
            kappa = estimate_shape_geometric_mean(values, mu, sigma, warnings_sink=warnings_sink)

        report = EstimateReport(
            params=FamilyParams(family=Family.STUDENT_T, mu=mu, sigma=sigma, kappa=kappa),
            n2=pairs.count,
            n3=triplets.count,
            epsilon=epsilon,
            permutations=permutations,
            theory=predict_bias_precision(kappa, sigma, pairs.count, triplets.count),
            warnings=tuple(warnings_sink),
        )
        outcome = "success"
        return report
    finally:
        capture_metrics(family=Family.STUDENT_T, outcome=outcome, started_at=started_at)


def _one_sided_chain(
    excess: np.ndarray,
    sided: Sided,
    selection_args: dict[str, Any],
    warnings_sink: list[str],
) -> tuple[float, float, int, int]:
    # excess are distances above the support boundary at 0
    _, state = normalize(excess)
    pairs = select_pairs(excess, normalization=state, lower_bound=0.0, **selection_args)
    _require(pairs, "pairs")
    sigma = invert_scale_pareto_one_sided(pairs.mean())
    if sigma == 0:
        raise DegenerateSampleError("Estimated scale is 0")
    triplets = select_ntuples(
        excess, 3, mode=SelectionMode.EQUAL_DIAGONAL, normalization=state, lower_bound=0.0, **selection_args
    )
    _require(triplets, "triplets")
    kappa = invert_shape_pareto(triplets.mean_square(0.0), sigma, sided, warnings_sink=warnings_sink)
    return sigma, kappa, pairs.count, triplets.count


def estimate_gpareto(
    samples: SampleSet | npt.ArrayLike,
    sided: Sided = Sided.ONE_SIDED,
    *,
    epsilon: float = DEFAULT_EPSILON,
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    offset_mode: OffsetMode = OffsetMode.DISJOINT,
    runner: TrialRunner | None = None,
) -> EstimateReport:
    started_at = time.perf_counter()
    outcome = "failure"
    try:
        warnings_sink: list[str] = []
        values = _prepare(samples, warnings_sink)
        selection_args: dict[str, Any] = dict(
            epsilon=epsilon, permutations=permutations, offset_mode=offset_mode, seed=seed, runner=runner
        )
        if sided == Sided.TWO_SIDED:
            _, state = normalize(values)
            location_pairs = select_pairs(values, normalization=state, **selection_args)
            mu = estimate_location_ia(location_pairs)
            sigma, kappa, _, n3 = _one_sided_chain(np.abs(values - mu), sided, selection_args, warnings_sink)
            n2 = location_pairs.count
        else:
            mu = float(np.min(values))
            warnings_sink.append("location estimated by the sample minimum, biased upwards by O(sigma/N)")
            sigma, kappa, n2, n3 = _one_sided_chain(values - mu, sided, selection_args, warnings_sink)

        report = EstimateReport(
            params=FamilyParams(family=sided.family, mu=mu, sigma=sigma, kappa=kappa),
            n2=n2,
            n3=n3,
            epsilon=epsilon,
            permutations=permutations,
            warnings=tuple(warnings_sink),
        )
        outcome = "success"
        return report
    finally:
        capture_metrics(family=sided.family, outcome=outcome, started_at=started_at)


def hill_estimate(samples: SampleSet | npt.ArrayLike, k: int) -> float:
    ordered = np.sort(as_array(samples))
    size = ordered.shape[0]
    if not 1 <= k < size:
        raise DomainError(f"k should be within [1, {size}), got {k}")
    threshold = ordered[size - k - 1]
    if not threshold > 0:
        raise DomainError(f"Order statistic X_(N-k) should be positive, got {threshold}")
    return float(np.mean(np.log(ordered[size - k :] / threshold)))


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class HillAverage:
    kappa: float
    k_window: tuple[int, int]
    k_range: tuple[int, int]


def hill_curve(samples: SampleSet | npt.ArrayLike, k_range: tuple[int, int]) -> np.ndarray:
    k_lo, k_hi = k_range
    descending = np.sort(as_array(samples))[::-1]
    size = descending.shape[0]
    if not 1 <= k_lo <= k_hi < size:
        raise DomainError(f"k range should satisfy 1 <= k_lo <= k_hi < {size}, got {k_range}")
    if not descending[k_hi] > 0:
        raise DomainError(f"Order statistic X_(N-k) should be positive for k={k_hi}")
    logs = np.log(descending[: k_hi + 1])
    ks = np.arange(k_lo, k_hi + 1)
    return np.cumsum(logs)[ks - 1] / ks - logs[ks]


def hill_stable_average(
    samples: SampleSet | npt.ArrayLike, k_range: tuple[int, int], *, window_fraction: float = 0.25
) -> HillAverage:
    """
    Average the Hill curve over its most stable stretch of k.

    The stretch is the contiguous window, at least window_fraction of the range wide,
    with the smallest variance of the per-k estimates.
    """
    if not 0 < window_fraction <= 1:
        raise DomainError(f"Window fraction should be within (0, 1], got {window_fraction}")
    curve = hill_curve(samples, k_range)
    width = max(1, math.ceil(window_fraction * curve.shape[0]))
    sums = np.concatenate(([0.0], np.cumsum(curve)))
    squares = np.concatenate(([0.0], np.cumsum(curve * curve)))
    window_means = (sums[width:] - sums[:-width]) / width
    window_variances = (squares[width:] - squares[:-width]) / width - window_means**2
    start = int(np.argmin(window_variances))
    k_lo = k_range[0] + start
    return HillAverage(
        kappa=float(np.mean(curve[start : start + width])),
        k_window=(k_lo, k_lo + width - 1),
        k_range=(k_range[0], k_range[1]),
    )


def _unpack(family: Family, point: np.ndarray) -> FamilyParams:
    mu, log_sigma, log_kappa = (float(v) for v in point)
    return FamilyParams(
        family=family,
        mu=mu,
        sigma=math.exp(min(max(log_sigma, -_LOG_PARAM_LIMIT), _LOG_PARAM_LIMIT)),
        kappa=math.exp(min(max(log_kappa, -_LOG_PARAM_LIMIT), _LOG_PARAM_LIMIT)),
    )


def avg_negative_loglikelihood(values: np.ndarray, p: FamilyParams) -> float:
    return -float(np.mean(distributions.logpdf(p, values)))


def mle_fit(
    samples: SampleSet | npt.ArrayLike,
    family: Family,
    start: FamilyParams | None = None,
    *,
    tol: float = 1e-8,
    warnings_sink: list[str] | None = None,
) -> FamilyParams:
    values = as_array(samples)
    if values.size == 0:
        raise EmptyInputError("No samples to fit")
    if start is None:
        if family == Family.STUDENT_T:
            start = estimate_student_t(values).params
        elif family == Family.GPARETO_ONE_SIDED:
            start = estimate_gpareto(values, Sided.ONE_SIDED).params
        else:
            start = estimate_gpareto(values, Sided.TWO_SIDED).params
    if start.family != family:
        raise DomainError(f"Start family {start.family} differs from {family}")

    def objective(point: np.ndarray) -> float:
        value = avg_negative_loglikelihood(values, _unpack(family, point))
        return value if math.isfinite(value) else math.inf

    x0 = np.array([start.mu, math.log(start.sigma), math.log(max(start.kappa, MLE_MIN_SHAPE))])
    result = minimize_simplex(objective, x0, tol=tol)
    if not result.converged:
        _warn(warnings_sink, f"Likelihood search stopped after {result.iterations} iterations before convergence")
    return _unpack(family, result.point)

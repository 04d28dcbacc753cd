import dataclasses
import enum
import itertools
import logging
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from .base import DegenerateSampleError, DomainError, EmptyInputError, FloatArray, SampleSet, as_array
from .runner import TrialRunner, sequential_runner
from .seeds import Stream, derive_rng

logger = logging.getLogger(__package__)

DEFAULT_EPSILON = 0.1
DEFAULT_PERMUTATIONS = 10
MIN_NORMALIZATION_SAMPLES = 4
MIN_BOUNDARY_SHARE = 0.05


class SelectionMode(enum.StrEnum):
    EQUAL_DIAGONAL = enum.auto()
    ABS_DIAGONALS = enum.auto()


class OffsetMode(enum.StrEnum):
    DISJOINT = enum.auto()
    OVERLAPPING = enum.auto()


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class NormalizationState:
    center: float
    spread: float

    def __post_init__(self) -> None:
        if not self.spread > 0:
            raise DegenerateSampleError(f"Spread should be positive, got {self.spread}")

    def apply(self, values: npt.ArrayLike) -> FloatArray:
        return (np.asarray(values, dtype=np.float64) - self.center) / self.spread

    def revert(self, values: npt.ArrayLike) -> FloatArray:
        return self.center + self.spread * np.asarray(values, dtype=np.float64)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class IASelection:
    order: int
    epsilon: float
    permutations: int
    mode: SelectionMode
    offset_mode: OffsetMode
    normalization: NormalizationState
    representatives: FloatArray
    weights: FloatArray | None = None

    @property
    def count(self) -> int:
        return int(self.representatives.shape[0])

    def mean(self) -> float:
        return float(np.average(self.representatives, weights=self.weights))

    def mean_square(self, around: float) -> float:
        return float(np.average((self.representatives - around) ** 2, weights=self.weights))


class SequenceSelection(NamedTuple):
    representatives: FloatArray
    tuple_indices: npt.NDArray[np.intp]
    sign_classes: npt.NDArray[np.intp]


def _quantile_state(values: FloatArray) -> NormalizationState | None:
    center = float(np.median(values))
    spread = float(np.quantile(values, 0.75)) - center
    if not spread > 0:
        return None
    return NormalizationState(center=center, spread=spread)


def normalize(samples: SampleSet | npt.ArrayLike) -> tuple[SampleSet, NormalizationState]:
    values = as_array(samples)
    if values.size == 0:
        raise EmptyInputError("No samples to normalize")
    if values.size < MIN_NORMALIZATION_SAMPLES:
        raise DegenerateSampleError(f"At least {MIN_NORMALIZATION_SAMPLES} samples are required, got {values.size}")
    state = _quantile_state(values)
    if state is None:
        raise DegenerateSampleError("Samples have no spread above the median")
    source = samples.source if isinstance(samples, SampleSet) else None
    return SampleSet(state.apply(values), source=source), state


def selection_normalization(values: FloatArray) -> NormalizationState:
    """
    Normalization used by selection when none is given.

    Samples too few or too concentrated to normalize keep a unit spread around their median,
    so that selection itself never fails on them.
    """
    state = _quantile_state(values) if values.size >= MIN_NORMALIZATION_SAMPLES else None
    if state is not None:
        return state
    center = float(np.median(values)) if values.size else 0.0
    logger.debug("Samples cannot be normalized, unit spread around %s is used", center, extra={"size": values.size})
    return NormalizationState(center=center, spread=1.0)


def sign_classes(order: int, mode: SelectionMode) -> npt.NDArray[np.float64]:
    if mode == SelectionMode.EQUAL_DIAGONAL:
        return np.ones((1, order))
    # up to the global sign, so the first member keeps its sign
    tails = itertools.product((1.0, -1.0), repeat=order - 1)
    return np.array([(1.0, *tail) for tail in tails])


def partition(values: FloatArray, order: int, offset_mode: OffsetMode) -> tuple[FloatArray, npt.NDArray[np.intp]]:
    """Tuples of consecutive values and the position of each tuple's first member."""
    if offset_mode == OffsetMode.DISJOINT:
        count = values.shape[0] // order
        return values[: count * order].reshape(count, order), np.arange(count) * order
    if values.shape[0] < order:
        return np.empty((0, order)), np.empty(0, dtype=np.intp)
    windows = np.lib.stride_tricks.sliding_window_view(values, order)
    return windows, np.arange(windows.shape[0])


def select_from_sequence(
    values: npt.ArrayLike,
    order: int,
    *,
    epsilon: float = DEFAULT_EPSILON,
    mode: SelectionMode = SelectionMode.EQUAL_DIAGONAL,
    offset_mode: OffsetMode = OffsetMode.DISJOINT,
) -> SequenceSelection:
    """
    Select approximately equal tuples from values taken in the given order.

    A tuple qualifies for a sign class when max - min of its sign-aligned members is within epsilon.
    Each sign class is searched separately, so near the origin a tuple may qualify more than once.
    """
    tuples, positions = partition(np.asarray(values, dtype=np.float64), order, offset_mode)
    representatives = []
    indices = []
    classes = []
    for class_index, signs in enumerate(sign_classes(order, mode)):
        aligned = tuples * signs
        accepted = np.ptp(aligned, axis=1) <= epsilon
        representatives.append(np.median(aligned[accepted], axis=1))
        indices.append(positions[accepted])
        classes.append(np.full(int(accepted.sum()), class_index, dtype=np.intp))

    all_indices = np.concatenate(indices) if indices else np.empty(0, dtype=np.intp)
    ordering = np.argsort(all_indices, kind="stable")
    return SequenceSelection(
        representatives=np.concatenate(representatives)[ordering],
        tuple_indices=all_indices[ordering],
        sign_classes=np.concatenate(classes)[ordering],
    )


def boundary_weights(
    representatives: npt.ArrayLike, order: int, *, epsilon: float, lower_bound: float
) -> FloatArray:
    """
    Inverse of the share of the tolerance window that fits above a support boundary.

    Tuples whose representative sits within epsilon of the boundary are selected less often
    than the power density predicts; weighting them back removes most of that deficit.
    Weights are capped at 1 / MIN_BOUNDARY_SHARE: the sample minimum sits on the boundary itself
    and uncapped weights of its tuples have no finite mean.
    """
    t = (np.asarray(representatives, dtype=np.float64) - lower_bound) / epsilon
    t = np.clip(t, 0.0, None)
    match order:
        case 2:
            share = np.minimum(1.0, 2.0 * t)
        case 3:
            share = np.where(t < 1.0, 2.0 * t - t * t, 1.0)
        case _:
            raise DomainError(f"Boundary weights are defined for pairs and triplets, got order {order}")
    return 1.0 / np.maximum(share, MIN_BOUNDARY_SHARE)


def select_ntuples(
    samples: SampleSet | npt.ArrayLike,
    n: int,
    *,
    epsilon: float = DEFAULT_EPSILON,
    permutations: int = DEFAULT_PERMUTATIONS,
    mode: SelectionMode = SelectionMode.EQUAL_DIAGONAL,
    offset_mode: OffsetMode = OffsetMode.DISJOINT,
    seed: int = 0,
    normalization: NormalizationState | None = None,
    lower_bound: float | None = None,
    runner: TrialRunner | None = None,
) -> IASelection:
    if n < 2:
        raise DomainError(f"Tuple order should be >= 2, got {n}")
    if not epsilon > 0:
        raise DomainError(f"Tolerance should be positive, got {epsilon}")
    if permutations < 1:
        raise DomainError(f"Permutations count should be >= 1, got {permutations}")

    values = as_array(samples)
    if normalization is None:
        normalization = selection_normalization(values)
    normalized = normalization.apply(values)

    def select_permutation(index: int) -> FloatArray:
        rng = derive_rng(seed, Stream.SELECTION, n, index)
        shuffled = normalized[rng.permutation(normalized.shape[0])]
        return select_from_sequence(shuffled, n, epsilon=epsilon, mode=mode, offset_mode=offset_mode).representatives

    pooled = np.concatenate((runner or sequential_runner()).map(select_permutation, range(permutations)))
    weights = None
    if lower_bound is not None:
        weights = boundary_weights(pooled, n, epsilon=epsilon, lower_bound=normalization.apply(lower_bound).item())

    logger.debug(
        "Selected %d approximates of order %d",
        pooled.shape[0],
        n,
        extra={"epsilon": epsilon, "permutations": permutations, "mode": str(mode)},
    )
    return IASelection(
        order=n,
        epsilon=epsilon,
        permutations=permutations,
        mode=mode,
        offset_mode=offset_mode,
        normalization=normalization,
        representatives=normalization.revert(pooled),
        weights=weights,
    )


def select_pairs(
    samples: SampleSet | npt.ArrayLike,
    *,
    epsilon: float = DEFAULT_EPSILON,
    permutations: int = DEFAULT_PERMUTATIONS,
    offset_mode: OffsetMode = OffsetMode.DISJOINT,
    seed: int = 0,
    normalization: NormalizationState | None = None,
    lower_bound: float | None = None,
    runner: TrialRunner | None = None,
) -> IASelection:
    return select_ntuples(
        samples,
        2,
        epsilon=epsilon,
        permutations=permutations,
        mode=SelectionMode.EQUAL_DIAGONAL,
        offset_mode=offset_mode,
        seed=seed,
        normalization=normalization,
        lower_bound=lower_bound,
        runner=runner,
    )


def select_triplets_abs(
    samples: SampleSet | npt.ArrayLike,
    *,
    epsilon: float = DEFAULT_EPSILON,
    permutations: int = DEFAULT_PERMUTATIONS,
    offset_mode: OffsetMode = OffsetMode.DISJOINT,
    seed: int = 0,
    normalization: NormalizationState | None = None,
    runner: TrialRunner | None = None,
) -> IASelection:
    return select_ntuples(
        samples,
        3,
        epsilon=epsilon,
        permutations=permutations,
        mode=SelectionMode.ABS_DIAGONALS,
        offset_mode=offset_mode,
        seed=seed,
        normalization=normalization,
        runner=runner,
    )

from .estimator import Estimator
from .estimators import ShapeMethod
from .ia_select import DEFAULT_EPSILON, DEFAULT_PERMUTATIONS, OffsetMode
from .runner import TrialRunner, sequential_runner


def setup(
    *,
    epsilon: float = DEFAULT_EPSILON,
    permutations: int = DEFAULT_PERMUTATIONS,
    offset_mode: OffsetMode = OffsetMode.DISJOINT,
    triplet_offset_mode: OffsetMode = OffsetMode.OVERLAPPING,
    shape_method: ShapeMethod = ShapeMethod.GEOMETRIC_MEAN,
    runner: TrialRunner | None = None,
) -> Estimator:
    if not epsilon > 0:
        raise ValueError("Epsilon should be > 0")
    if permutations < 1:
        raise ValueError("Permutations count should be >= 1")
    return Estimator(
        epsilon=epsilon,
        permutations=permutations,
        offset_mode=offset_mode,
        triplet_offset_mode=triplet_offset_mode,
        shape_method=shape_method,
        runner=runner or sequential_runner(),
    )

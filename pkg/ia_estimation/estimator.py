import numpy.typing as npt

from .base import DomainError, FamilyParams, SampleSet
from .estimators import EstimateReport, ShapeMethod, estimate_gpareto, estimate_student_t, mle_fit
from .family import Family, Sided
from .ia_select import IASelection, OffsetMode, select_pairs, select_triplets_abs
from .runner import TrialRunner


class Estimator:
    __slots__ = (
        "__epsilon",
        "__permutations",
        "__offset_mode",
        "__triplet_offset_mode",
        "__shape_method",
        "__runner",
    )

    def __init__(
        self,
        *,
        epsilon: float,
        permutations: int,
        offset_mode: OffsetMode,
        triplet_offset_mode: OffsetMode,
        shape_method: ShapeMethod,
        runner: TrialRunner,
    ):
        self.__epsilon = epsilon
        self.__permutations = permutations
        self.__offset_mode = offset_mode
        self.__triplet_offset_mode = triplet_offset_mode
        self.__shape_method = shape_method
        self.__runner = runner

    @property
    def epsilon(self) -> float:
        return self.__epsilon

    @property
    def permutations(self) -> int:
        return self.__permutations

    @property
    def runner(self) -> TrialRunner:
        return self.__runner

    def estimate(self, samples: SampleSet | npt.ArrayLike, family: Family, *, seed: int = 0) -> EstimateReport:
        match family:
            case Family.STUDENT_T:
                return estimate_student_t(
                    samples,
                    epsilon=self.__epsilon,
                    permutations=self.__permutations,
                    seed=seed,
                    offset_mode=self.__offset_mode,
                    triplet_offset_mode=self.__triplet_offset_mode,
                    shape_method=self.__shape_method,
                    runner=self.__runner,
                )
            case Family.GPARETO_ONE_SIDED | Family.GPARETO_TWO_SIDED:
                return estimate_gpareto(
                    samples,
                    Sided.ONE_SIDED if family == Family.GPARETO_ONE_SIDED else Sided.TWO_SIDED,
                    epsilon=self.__epsilon,
                    permutations=self.__permutations,
                    seed=seed,
                    offset_mode=self.__offset_mode,
                    runner=self.__runner,
                )
            case _:
                raise DomainError(f"Unsupported family {family}")

    def select(self, samples: SampleSet | npt.ArrayLike, *, seed: int = 0) -> tuple[IASelection, IASelection]:
        pairs = select_pairs(
            samples,
            epsilon=self.__epsilon,
            permutations=self.__permutations,
            offset_mode=self.__offset_mode,
            seed=seed,
            runner=self.__runner,
        )
        triplets = select_triplets_abs(
            samples,
            epsilon=self.__epsilon,
            permutations=self.__permutations,
            offset_mode=self.__triplet_offset_mode,
            seed=seed,
            normalization=pairs.normalization,
            runner=self.__runner,
        )
        return pairs, triplets

    def fit_mle(self, samples: SampleSet | npt.ArrayLike, family: Family, *, seed: int = 0) -> FamilyParams:
        return mle_fit(samples, family, start=self.estimate(samples, family, seed=seed).params)

    def __repr__(self) -> str:
        return (
            f"<Estimator epsilon={self.__epsilon} permutations={self.__permutations} "
            f"offset_mode={self.__offset_mode} triplet_offset_mode={self.__triplet_offset_mode} "
            f"shape_method={self.__shape_method} runner={self.__runner!r}>"
        )

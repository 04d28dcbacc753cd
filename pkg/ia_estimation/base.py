import collections.abc
import dataclasses
import math
from typing import Any

import numpy as np
import numpy.typing as npt

from .family import Family

FloatArray = npt.NDArray[np.float64]


class EstimationError(Exception):
    """Base error of the package"""


class DomainError(EstimationError, ValueError):
    """Argument is outside of the supported domain"""


class DataError(EstimationError):
    """Samples cannot support the requested computation"""


class EmptyInputError(DataError):
    """No samples were provided"""


class DegenerateSampleError(DataError):
    """Samples have no spread"""


class EmptySelectionError(DataError):
    """No approximately equal tuples were selected"""


class NumericalError(EstimationError):
    """Numerical routine failed"""


class NonConvergenceError(NumericalError):
    """Numerical routine did not reach the requested tolerance"""


class DivergenceError(NumericalError):
    """Integral does not converge"""


class InvalidBracketError(NumericalError):
    """Bracket does not enclose a sign change"""


class NoSignChangeError(NumericalError):
    """Residual does not change sign over the scanned interval"""


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class FamilyParams:
    family: Family
    mu: float = 0.0
    sigma: float = 1.0
    kappa: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise DomainError(f"Location should be finite, got {self.mu}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"Scale should be positive, got {self.sigma}")
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise DomainError(f"Shape should be non-negative, got {self.kappa}")

    def replace(self, **changes: Any) -> "FamilyParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return {"family": str(self.family), "mu": self.mu, "sigma": self.sigma, "kappa": self.kappa}


class SampleSet(collections.abc.Sequence[float]):
    __slots__ = ("__values", "__seed", "__source")

    def __init__(
        self,
        values: npt.ArrayLike,
        *,
        seed: int | None = None,
        source: str | None = None,
    ):
        array = np.array(values, dtype=np.float64).reshape(-1)
        array.setflags(write=False)
        self.__values = array
        self.__seed = seed
        self.__source = source

    @property
    def values(self) -> FloatArray:
        return self.__values

    @property
    def seed(self) -> int | None:
        return self.__seed

    @property
    def source(self) -> str | None:
        return self.__source

    def __len__(self) -> int:
        return int(self.__values.shape[0])

    def __getitem__(self, index):  # type: ignore[override]
        if isinstance(index, slice):
            return SampleSet(self.__values[index], seed=self.__seed, source=self.__source)
        return float(self.__values[index])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return np.array_equal(self.__values, other.values)

    def __hash__(self) -> int:
        return hash(self.__values.tobytes())

    def __repr__(self) -> str:
        return f"<SampleSet [{len(self)}] seed={self.__seed} source={self.__source}>"


def as_array(samples: SampleSet | npt.ArrayLike) -> FloatArray:
    if isinstance(samples, SampleSet):
        return samples.values
    return np.asarray(samples, dtype=np.float64).reshape(-1)

import dataclasses
import logging
import math

import numpy as np
import numpy.typing as npt

from .base import DomainError, FloatArray, SampleSet
from .runner import TrialRunner, sequential_runner
from .seeds import Stream, derive_rng, validate_seed

logger = logging.getLogger(__package__)

CHUNK_SIZE = 4096
TWO_PI = 2.0 * math.pi


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class MapConfig:
    K: float
    M: int
    T: int
    seed: int = 0
    wrap: bool = True

    def __post_init__(self) -> None:
        if not self.K >= 0:
            raise DomainError(f"Nonlinearity should be >= 0, got {self.K}")
        if self.M < 1:
            raise DomainError(f"Initial conditions count should be >= 1, got {self.M}")
        if self.T < 1:
            raise DomainError(f"Iterations count should be >= 1, got {self.T}")
        validate_seed(self.seed)

    def as_dict(self) -> dict[str, float | int | bool]:
        return {"K": self.K, "M": self.M, "T": self.T, "seed": self.seed, "wrap": self.wrap}


def _step(x: FloatArray, y: FloatArray, K: float, wrap: bool) -> tuple[FloatArray, FloatArray]:
    y = y + K * np.sin(x)
    x = x + y
    if wrap:
        x = np.mod(x, TWO_PI)
    return x, y


def iterate_map(x0: float, y0: float, T: int, K: float, wrap: bool = True) -> FloatArray:
    """Trajectory x_0, ..., x_T of the standard map started at (x0, y0)."""
    if T < 0:
        raise DomainError(f"Iterations count should be >= 0, got {T}")
    x = np.array([x0], dtype=np.float64)
    y = np.array([y0], dtype=np.float64)
    if wrap:
        x = np.mod(x, TWO_PI)
    trajectory = np.empty(T + 1, dtype=np.float64)
    trajectory[0] = x[0]
    for i in range(1, T + 1):
        x, y = _step(x, y, K, wrap)
        trajectory[i] = x[0]
    return trajectory


def centered_sums(
    x0: npt.ArrayLike, y0: npt.ArrayLike, T: int, K: float, *, offset: float = 0.0, wrap: bool = True
) -> FloatArray:
    """Sums of x_1 - offset, ..., x_T - offset along each trajectory, one trajectory per initial condition."""
    x = np.array(x0, dtype=np.float64).reshape(-1)
    y = np.array(y0, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise DomainError("Initial conditions should have matching shapes")
    if wrap:
        x = np.mod(x, TWO_PI)
    sums = np.zeros_like(x)
    for _ in range(T):
        x, y = _step(x, y, K, wrap)
        sums += x - offset
    return sums


def initial_conditions(cfg: MapConfig, chunk: int) -> tuple[FloatArray, FloatArray]:
    start = chunk * CHUNK_SIZE
    size = min(CHUNK_SIZE, cfg.M - start)
    rng = derive_rng(cfg.seed, Stream.MAP_INITIAL_CONDITIONS, chunk)
    points = rng.uniform(0.0, TWO_PI, size=(2, size))
    return points[0], points[1]


def generate_z(cfg: MapConfig, runner: TrialRunner | None = None) -> SampleSet:
    runner = runner or sequential_runner()
    chunks = range(math.ceil(cfg.M / CHUNK_SIZE))

    def chunk_total(chunk: int) -> float:
        x0, y0 = initial_conditions(cfg, chunk)
        return math.fsum(centered_sums(x0, y0, cfg.T, cfg.K, wrap=cfg.wrap))

    # totals are reduced in chunk order, so the mean does not depend on the runner
    mean = math.fsum(runner.map(chunk_total, chunks)) / (cfg.M * cfg.T)
    logger.debug("Standard map mean %s", mean, extra={"config": cfg.as_dict()})

    def chunk_z(chunk: int) -> FloatArray:
        x0, y0 = initial_conditions(cfg, chunk)
        return centered_sums(x0, y0, cfg.T, cfg.K, offset=mean, wrap=cfg.wrap)

    z = np.concatenate(runner.map(chunk_z, chunks))
    return SampleSet(z, seed=cfg.seed, source=f"stdmap:K={cfg.K:g},M={cfg.M},T={cfg.T}")

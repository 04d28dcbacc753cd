import dataclasses
import math
from typing import overload

import numpy as np
import numpy.typing as npt
import scipy.special

from .base import DomainError, FamilyParams, FloatArray, SampleSet
from .family import Family
from .numerics import log_beta
from .seeds import Stream, derive_rng

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@overload
def _result(x: float, value: FloatArray) -> float: ...


@overload
def _result(x: npt.NDArray[np.float64], value: FloatArray) -> FloatArray: ...


def _result(x, value):
    if np.ndim(x) == 0:
        return float(value)
    return value


def _standardize(p: FamilyParams, x: float | npt.ArrayLike) -> FloatArray:
    return (np.asarray(x, dtype=np.float64) - p.mu) / p.sigma


def _student_log_normalizer(kappa: float) -> float:
    return 0.5 * math.log(kappa) - log_beta(1.0 / (2.0 * kappa), 0.5)


def _student_logpdf(z: FloatArray, kappa: float) -> FloatArray:
    if kappa == 0:
        return -0.5 * z * z - _LOG_SQRT_2PI
    return _student_log_normalizer(kappa) - 0.5 * (1.0 / kappa + 1.0) * np.log1p(kappa * z * z)


def _student_cdf(z: FloatArray, kappa: float) -> FloatArray:
    if kappa == 0:
        return scipy.special.ndtr(z)
    df = 1.0 / kappa
    tail = 0.5 * scipy.special.betainc(0.5 * df, 0.5, df / (df + z * z))
    return np.where(z < 0, tail, 1.0 - tail)


def _student_quantile(u: FloatArray, kappa: float) -> FloatArray:
    if kappa == 0:
        return scipy.special.ndtri(u)
    df = 1.0 / kappa
    x = scipy.special.betaincinv(0.5 * df, 0.5, 2.0 * np.minimum(u, 1.0 - u))
    magnitude = np.sqrt(df * (1.0 / x - 1.0))
    return np.where(u < 0.5, -magnitude, magnitude)


def _pareto_logsf(z: FloatArray, kappa: float) -> FloatArray:
    # z >= 0
    if kappa == 0:
        return -z
    return -np.log1p(kappa * z) / kappa


def _pareto_logpdf(z: FloatArray, kappa: float) -> FloatArray:
    # z >= 0
    if kappa == 0:
        return -z
    return -(1.0 / kappa + 1.0) * np.log1p(kappa * z)


def _pareto_quantile(u: FloatArray, kappa: float) -> FloatArray:
    # inverse of the one-sided cdf for u in [0, 1)
    if kappa == 0:
        return -np.log1p(-u)
    return np.expm1(-kappa * np.log1p(-u)) / kappa


def logpdf(p: FamilyParams, x: float | npt.ArrayLike):
    z = _standardize(p, x)
    log_sigma = math.log(p.sigma)
    match p.family:
        case Family.STUDENT_T:
            value = _student_logpdf(z, p.kappa) - log_sigma
        case Family.GPARETO_ONE_SIDED:
            with np.errstate(invalid="ignore"):
                value = np.where(z >= 0, _pareto_logpdf(np.maximum(z, 0.0), p.kappa) - log_sigma, -np.inf)
        case Family.GPARETO_TWO_SIDED:
            value = _pareto_logpdf(np.abs(z), p.kappa) - log_sigma - math.log(2.0)
        case _:
            raise DomainError(f"Unknown family {p.family}")
    return _result(x, value)


def pdf(p: FamilyParams, x: float | npt.ArrayLike):
    return _result(x, np.exp(np.asarray(logpdf(p, x), dtype=np.float64)))


def cdf(p: FamilyParams, x: float | npt.ArrayLike):
    z = _standardize(p, x)
    match p.family:
        case Family.STUDENT_T:
            value = _student_cdf(z, p.kappa)
        case Family.GPARETO_ONE_SIDED:
            value = np.where(z > 0, -np.expm1(_pareto_logsf(np.maximum(z, 0.0), p.kappa)), 0.0)
        case Family.GPARETO_TWO_SIDED:
            half_sf = 0.5 * np.exp(_pareto_logsf(np.abs(z), p.kappa))
            value = np.where(z < 0, half_sf, 1.0 - half_sf)
        case _:
            raise DomainError(f"Unknown family {p.family}")
    return _result(x, value)


def sf(p: FamilyParams, x: float | npt.ArrayLike):
    z = _standardize(p, x)
    match p.family:
        case Family.STUDENT_T:
            value = _student_cdf(-z, p.kappa)
        case Family.GPARETO_ONE_SIDED:
            value = np.where(z > 0, np.exp(_pareto_logsf(np.maximum(z, 0.0), p.kappa)), 1.0)
        case Family.GPARETO_TWO_SIDED:
            half_sf = 0.5 * np.exp(_pareto_logsf(np.abs(z), p.kappa))
            value = np.where(z < 0, 1.0 - half_sf, half_sf)
        case _:
            raise DomainError(f"Unknown family {p.family}")
    return _result(x, value)


def _standard_quantile(family: Family, kappa: float, u: FloatArray) -> FloatArray:
    match family:
        case Family.STUDENT_T:
            return _student_quantile(u, kappa)
        case Family.GPARETO_ONE_SIDED:
            return _pareto_quantile(u, kappa)
        case Family.GPARETO_TWO_SIDED:
            upper = _pareto_quantile(np.clip(2.0 * u - 1.0, 0.0, None), kappa)
            lower = -_pareto_quantile(np.clip(1.0 - 2.0 * u, 0.0, None), kappa)
            return np.where(u >= 0.5, upper, lower)
        case _:
            raise DomainError(f"Unknown family {family}")


def quantile(p: FamilyParams, u: float | npt.ArrayLike):
    array = np.asarray(u, dtype=np.float64)
    if np.any(~((array > 0) & (array < 1))):
        raise DomainError("Quantile is defined for u in (0, 1)")
    return _result(u, p.mu + p.sigma * _standard_quantile(p.family, p.kappa, array))


def sample(p: FamilyParams, n: int, seed: int) -> SampleSet:
    if n < 0:
        raise DomainError(f"Sample size should be non-negative, got {n}")
    rng = derive_rng(seed, Stream.SAMPLING)
    match p.family:
        case Family.STUDENT_T:
            if p.kappa == 0:
                standard = rng.standard_normal(n)
            else:
                standard = rng.standard_t(1.0 / p.kappa, n)
        case Family.GPARETO_ONE_SIDED:
            standard = _pareto_quantile(rng.random(n), p.kappa)
        case Family.GPARETO_TWO_SIDED:
            magnitude = _pareto_quantile(rng.random(n), p.kappa)
            signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
            standard = signs * magnitude
        case _:
            raise DomainError(f"Unknown family {p.family}")
    return SampleSet(p.mu + p.sigma * standard, seed=seed, source=f"sample:{p.family}")


def mode_density(p: FamilyParams) -> float:
    return float(pdf(p, p.mu))


def sigma_from_mode_density(f0: float, kappa: float, family: Family = Family.STUDENT_T) -> float:
    if not f0 > 0:
        raise DomainError(f"Mode density should be positive, got {f0}")
    if kappa < 0:
        raise DomainError(f"Shape should be non-negative, got {kappa}")
    match family:
        case Family.STUDENT_T:
            return math.exp(_student_log_normalizer(kappa)) / f0 if kappa > 0 else 1.0 / (f0 * math.sqrt(2 * math.pi))
        case Family.GPARETO_ONE_SIDED:
            return 1.0 / f0
        case Family.GPARETO_TWO_SIDED:
            return 0.5 / f0
        case _:
            raise DomainError(f"Unknown family {family}")


def _validate_alpha(alpha: int) -> int:
    if alpha not in (1, 2):
        raise DomainError(f"alpha should be 1 or 2, got {alpha}")
    return alpha


def q_to_kappa(q: float, alpha: int = 2) -> float:
    _validate_alpha(alpha)
    if not 1.0 <= q < 1.0 + alpha:
        raise DomainError(f"q should be within [1, {1 + alpha}), got {q}")
    return (q - 1.0) / (alpha - q + 1.0)


def kappa_to_q(kappa: float, alpha: int = 2) -> float:
    _validate_alpha(alpha)
    if not kappa >= 0:
        raise DomainError(f"Shape should be non-negative, got {kappa}")
    return 1.0 + alpha * kappa / (1.0 + kappa)


def sigma_to_beta(sigma: float, q: float, alpha: int = 2) -> float:
    # kappa / |1 - q| == 1 / (alpha + 1 - q), which stays finite at q = 1
    q_to_kappa(q, alpha)
    if not sigma > 0:
        raise DomainError(f"Scale should be positive, got {sigma}")
    return 1.0 / ((alpha + 1.0 - q) * sigma**alpha)


def beta_to_sigma(beta: float, q: float, alpha: int = 2) -> float:
    q_to_kappa(q, alpha)
    if not beta > 0:
        raise DomainError(f"beta should be positive, got {beta}")
    return ((alpha + 1.0 - q) * beta) ** (-1.0 / alpha)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class QTriplet:
    q: float
    alpha: int
    beta_param: float

    def __post_init__(self) -> None:
        _validate_alpha(self.alpha)
        if not 1.0 <= self.q < 1.0 + self.alpha:
            raise DomainError(f"q should be within [1, {1 + self.alpha}), got {self.q}")
        if not self.beta_param > 0:
            raise DomainError(f"beta should be positive, got {self.beta_param}")

    @staticmethod
    def from_params(p: FamilyParams) -> "QTriplet":
        alpha = 2 if p.family == Family.STUDENT_T else 1
        q = kappa_to_q(p.kappa, alpha)
        return QTriplet(q=q, alpha=alpha, beta_param=sigma_to_beta(p.sigma, q, alpha))

    def to_params(self, *, mu: float = 0.0) -> FamilyParams:
        family = Family.STUDENT_T if self.alpha == 2 else Family.GPARETO_ONE_SIDED
        return FamilyParams(
            family=family,
            mu=mu,
            sigma=beta_to_sigma(self.beta_param, self.q, self.alpha),
            kappa=q_to_kappa(self.q, self.alpha),
        )

import collections.abc
import dataclasses
import logging
import math

import numpy as np
import numpy.typing as npt
import scipy.integrate
import scipy.optimize
import scipy.special

from .base import DomainError, InvalidBracketError, NonConvergenceError

logger = logging.getLogger(__package__)

DEFAULT_REL_TOL = 1e-10
DEFAULT_EVALUATION_BUDGET = 10**6
# Gauss-Kronrod 21-point rule used by QUADPACK
_EVALUATIONS_PER_INTERVAL = 21

RealFunction = collections.abc.Callable[[float], float]
VectorFunction = collections.abc.Callable[[npt.NDArray[np.float64]], float]


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self) -> None:
        if self.abs_error_estimate < 0:
            raise ValueError("Error estimate should be non-negative")
        if self.evaluations <= 0:
            raise ValueError("Evaluations count should be positive")


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class RootBracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise InvalidBracketError(f"Bracket should satisfy lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo == 0 or self.f_hi == 0:
            return
        if math.copysign(1.0, self.f_lo) == math.copysign(1.0, self.f_hi):
            raise InvalidBracketError(
                f"Bracket [{self.lo}, {self.hi}] has no sign change: g(lo)={self.f_lo}, g(hi)={self.f_hi}"
            )

    @staticmethod
    def of(g: RealFunction, lo: float, hi: float) -> "RootBracket":
        return RootBracket(lo=lo, hi=hi, f_lo=g(lo), f_hi=g(hi))


@dataclasses.dataclass(frozen=True, slots=True)
class FullLine:
    center: float = 0.0
    scale: float = 1.0


@dataclasses.dataclass(frozen=True, slots=True)
class HalfLine:
    start: float = 0.0
    scale: float = 1.0


Domain = FullLine | HalfLine


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class SimplexResult:
    point: npt.NDArray[np.float64]
    value: float
    converged: bool
    iterations: int


def log_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"log_gamma is defined for x > 0, got {x}")
    return float(scipy.special.gammaln(x))


def log_beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"log_beta is defined for a > 0 and b > 0, got ({a}, {b})")
    return float(scipy.special.betaln(a, b))


def digamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"digamma is defined for x > 0, got {x}")
    return float(scipy.special.digamma(x))


def harmonic_real(z: float) -> float:
    if not z > -1:
        raise DomainError(f"Harmonic number is defined for z > -1, got {z}")
    return float(scipy.special.digamma(z + 1.0)) + float(np.euler_gamma)


def reg_inc_beta(a: float, b: float, x: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"Incomplete beta is defined for a > 0 and b > 0, got ({a}, {b})")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"Incomplete beta is defined for x in [0, 1], got {x}")
    return float(scipy.special.betainc(a, b, x))


def integrate_improper(
    f: RealFunction,
    domain: Domain,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = 0.0,
    evaluation_budget: int = DEFAULT_EVALUATION_BUDGET,
) -> QuadratureResult:
    if not 0 < rel_tol <= 1e-2:
        raise DomainError(f"Relative tolerance should be within (0, 1e-2], got {rel_tol}")
    if evaluation_budget < 1:
        raise RuntimeError("Evaluation budget should be >= 1")

    if isinstance(domain, FullLine):
        center, scale = domain.center, domain.scale
        pieces = ((-math.pi / 2, 0.0), (0.0, math.pi / 2))
    else:
        center, scale = domain.start, domain.scale
        pieces = ((0.0, math.pi / 2),)
    if not scale > 0:
        raise DomainError(f"Substitution scale should be positive, got {scale}")

    def integrand(theta: float) -> float:
        cos_theta = math.cos(theta)
        value = f(center + scale * math.tan(theta)) * scale / (cos_theta * cos_theta)
        # inf * 0 at the compactified ends
        return 0.0 if math.isnan(value) else value

    limit = max(50, evaluation_budget // (_EVALUATIONS_PER_INTERVAL * len(pieces)))
    total = 0.0
    error = 0.0
    evaluations = 0
    for lo, hi in pieces:
        result = scipy.integrate.quad(
            integrand, lo, hi, epsabs=abs_tol / len(pieces), epsrel=rel_tol, limit=limit, full_output=1
        )
        value, abserr, info = result[0], result[1], result[2]
        evaluations += int(info["neval"])
        total += value
        error += abserr
        if len(result) > 3 and abserr > max(rel_tol * abs(value), abs_tol / len(pieces)):
            raise NonConvergenceError(f"Quadrature did not converge: {result[3]}")

    if evaluations > evaluation_budget:
        raise NonConvergenceError(f"Quadrature exceeded the evaluation budget {evaluation_budget}")
    if error > max(rel_tol * abs(total), abs_tol):
        raise NonConvergenceError(f"Quadrature error estimate {error} is above tolerance for value {total}")
    return QuadratureResult(value=total, abs_error_estimate=error, evaluations=evaluations)


def find_root_bracketed(g: RealFunction, bracket: RootBracket, *, tol: float = 1e-12) -> float:
    if bracket.f_lo == 0:
        return bracket.lo
    if bracket.f_hi == 0:
        return bracket.hi
    root, result = scipy.optimize.brentq(g, bracket.lo, bracket.hi, xtol=tol, full_output=True)
    if not result.converged:
        raise NonConvergenceError(f"Root finder did not converge: {result.flag}")
    return float(root)


def minimize_simplex(
    h: VectorFunction,
    start: npt.ArrayLike,
    *,
    tol: float = 1e-8,
    max_iterations: int | None = None,
) -> SimplexResult:
    x0 = np.asarray(start, dtype=np.float64).reshape(-1)
    if not math.isfinite(h(x0)):
        raise DomainError(f"Objective should be finite at the start point {x0.tolist()}")
    max_iterations = max_iterations or 400 * x0.size
    result = scipy.optimize.minimize(
        h,
        x0,
        method="Nelder-Mead",
        options={"xatol": tol, "fatol": tol, "maxiter": max_iterations, "maxfev": 2 * max_iterations},
    )
    if not result.success:
        logger.warning(
            "Simplex search stopped before convergence: %s",
            result.message,
            extra={"iterations": int(result.nit), "start": x0.tolist()},
        )
    return SimplexResult(
        point=np.asarray(result.x, dtype=np.float64),
        value=float(result.fun),
        converged=bool(result.success),
        iterations=int(result.nit),
    )

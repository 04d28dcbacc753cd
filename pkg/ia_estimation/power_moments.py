import dataclasses
import logging
import math

from . import distributions
from .base import DivergenceError, DomainError, FamilyParams
from .family import Family, Sided
from .numerics import DEFAULT_REL_TOL, FullLine, HalfLine, integrate_improper, log_gamma

logger = logging.getLogger(__package__)


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class PowerMomentSpec:
    m: int
    n: int
    centered: bool = True

    def __post_init__(self) -> None:
        if self.m < 0:
            raise DomainError(f"Moment order should be >= 0, got {self.m}")
        if self.n < 1:
            raise DomainError(f"Density power should be >= 1, got {self.n}")

    def shape_bound(self) -> float:
        """Largest shape for which the closed form is finite, inf when unrestricted."""
        excess = 1 + self.m - self.n
        if excess <= 0:
            return math.inf
        return self.n / excess

    def converges(self, kappa: float) -> bool:
        return kappa < self.shape_bound()


def _power_denominator(kappa: float, power: int) -> float:
    return power + (power - 1) * kappa


def power_density_params(p: FamilyParams, power: int) -> FamilyParams:
    if power < 1:
        raise DomainError(f"Power should be >= 1, got {power}")
    denominator = _power_denominator(p.kappa, power)
    kappa = p.kappa / denominator
    if p.family == Family.STUDENT_T:
        return p.replace(sigma=p.sigma / math.sqrt(denominator), kappa=kappa)
    return p.replace(sigma=p.sigma / denominator, kappa=kappa)


def _check_domain(p: FamilyParams, spec: PowerMomentSpec) -> None:
    if not spec.converges(p.kappa):
        raise DomainError(
            f"Moment m={spec.m} of power {spec.n} requires kappa < {spec.shape_bound():g}, got kappa={p.kappa:g}"
        )


def _expand_around_location(mu: float, spec: PowerMomentSpec, centered_moment) -> float:
    if spec.centered or mu == 0:
        return centered_moment(spec.m)
    return math.fsum(math.comb(spec.m, j) * mu ** (spec.m - j) * centered_moment(j) for j in range(spec.m + 1))


def student_t_power_moment(p: FamilyParams, spec: PowerMomentSpec) -> float:
    """
    mth moment of the normalized nth power of the Student's t density.

    For even m the gamma ratio of the closed form reduces to a rising factorial,
    so the centered moment is sigma^m (m-1)!! / prod_{j<m/2} (n + (n - m - 1 + 2j) kappa).
    Odd centered moments vanish.
    """
    if p.family != Family.STUDENT_T:
        raise DomainError(f"Student's t family expected, got {p.family}")
    _check_domain(p, spec)

    def centered_moment(m: int) -> float:
        if m % 2 == 1:
            return 0.0
        half = m // 2
        # Gamma((m+1)/2) 2^(m/2) / sqrt(pi) == (m-1)!!
        log_value = m * math.log(p.sigma) + log_gamma((m + 1) / 2) + half * math.log(2.0) - 0.5 * math.log(math.pi)
        for j in range(half):
            log_value -= math.log(spec.n + (spec.n - m - 1 + 2 * j) * p.kappa)
        return math.exp(log_value)

    return _expand_around_location(p.mu, spec, centered_moment)


def pareto_power_moment(p: FamilyParams, spec: PowerMomentSpec) -> float:
    """
    mth moment of the normalized nth power of a generalized Pareto density.

    The power density is again generalized Pareto, so moments about the location
    are m! sigma'^m / prod_{j=1..m} (1 - j kappa'). The two-sided density is symmetric:
    odd centered moments vanish and even ones equal the one-sided values.
    """
    if not p.family.is_pareto:
        raise DomainError(f"Generalized Pareto family expected, got {p.family}")
    _check_domain(p, spec)

    def centered_moment(m: int) -> float:
        if p.family == Family.GPARETO_TWO_SIDED and m % 2 == 1:
            return 0.0
        log_value = math.lgamma(m + 1) + m * math.log(p.sigma)
        for j in range(1, m + 1):
            log_value -= math.log(spec.n + (spec.n - 1 - j) * p.kappa)
        return math.exp(log_value)

    return _expand_around_location(p.mu, spec, centered_moment)


def power_moment(p: FamilyParams, spec: PowerMomentSpec) -> float:
    if p.family == Family.STUDENT_T:
        return student_t_power_moment(p, spec)
    return pareto_power_moment(p, spec)


def power_moment_oracle(p: FamilyParams, spec: PowerMomentSpec, *, rel_tol: float = DEFAULT_REL_TOL) -> float:
    if p.kappa > 0 and not spec.m < spec.n * (1.0 / p.kappa + 1.0) - 1.0:
        raise DivergenceError(f"Moment m={spec.m} of power {spec.n} diverges for kappa={p.kappa:g}")

    origin = p.mu if spec.centered else 0.0
    log_peak = float(distributions.logpdf(p, p.mu))
    power_scale = power_density_params(p, spec.n).sigma
    domain: FullLine | HalfLine
    if p.family == Family.GPARETO_ONE_SIDED:
        domain = HalfLine(p.mu, power_scale)
    else:
        domain = FullLine(p.mu, power_scale)

    def weight(x: float) -> float:
        return math.exp(spec.n * (float(distributions.logpdf(p, x)) - log_peak))

    def moment_integrand(m: int, signed: bool):
        def integrand(x: float) -> float:
            if m == 0:
                return weight(x)
            distance = x - origin
            if distance == 0:
                return 0.0
            log_value = m * math.log(abs(distance)) + spec.n * (float(distributions.logpdf(p, x)) - log_peak)
            value = math.exp(log_value) if log_value < 700 else math.inf
            return -value if signed and distance < 0 and m % 2 == 1 else value

        return integrand

    normalization = integrate_improper(weight, domain, rel_tol=rel_tol).value
    abs_tol = 0.0
    if spec.m % 2 == 1:
        # the signed integral may cancel to zero, so tolerate error relative to the absolute moment
        absolute = integrate_improper(moment_integrand(spec.m, signed=False), domain, rel_tol=rel_tol).value
        abs_tol = rel_tol * absolute
    moment = integrate_improper(moment_integrand(spec.m, signed=True), domain, rel_tol=rel_tol, abs_tol=abs_tol)
    return moment.value / normalization


def invert_location_two_sided(mu1_2: float) -> float:
    return float(mu1_2)


def invert_scale_student(mu2_3_centered: float) -> float:
    if mu2_3_centered < 0:
        raise DomainError(f"Second power-moment should be non-negative, got {mu2_3_centered}")
    return math.sqrt(3.0 * mu2_3_centered)


def invert_scale_pareto_one_sided(mu1_2_centered: float) -> float:
    if mu1_2_centered < 0:
        raise DomainError(f"First power-moment should be non-negative, got {mu1_2_centered}")
    return 2.0 * mu1_2_centered


def _clip_shape(kappa: float, source: str, warnings_sink: list[str] | None) -> float:
    if kappa >= 0:
        return kappa
    message = f"{source} shape {kappa:.6g} is negative, clipped to 0"
    logger.warning(message, extra={"raw_kappa": kappa})
    if warnings_sink is not None:
        warnings_sink.append(message)
    return 0.0


def invert_shape_pareto(
    mu2_3_centered: float,
    sigma: float,
    sided: Sided = Sided.ONE_SIDED,
    *,
    warnings_sink: list[str] | None = None,
) -> float:
    # the two-sided third power folds onto the one-sided one, so both sides share the inversion
    if not (mu2_3_centered > 0 and sigma > 0):
        raise DomainError(f"Inputs should be positive, got mu2_3={mu2_3_centered}, sigma={sigma}")
    kappa = 2.0 * sigma * sigma / (3.0 * mu2_3_centered) - 3.0
    return _clip_shape(kappa, f"Pareto ({sided})", warnings_sink)


def invert_shape_student_alt(
    mu2_4_centered: float,
    sigma: float,
    *,
    warnings_sink: list[str] | None = None,
) -> float:
    if not (mu2_4_centered > 0 and sigma > 0):
        raise DomainError(f"Inputs should be positive, got mu2_4={mu2_4_centered}, sigma={sigma}")
    kappa = sigma * sigma / mu2_4_centered - 4.0
    return _clip_shape(kappa, "Student's t power-moment", warnings_sink)

import itertools
import math

import numpy as np
import pytest

import ia_estimation
from ia_estimation import Family, FamilyParams, PowerMomentSpec, Sided


def params(family: Family, mu: float = 0.0, sigma: float = 1.0, kappa: float = 0.0) -> FamilyParams:
    return FamilyParams(family=family, mu=mu, sigma=sigma, kappa=kappa)


@pytest.mark.parametrize(
    "p, power, sigma, kappa",
    [
        (params(Family.STUDENT_T, sigma=2.0, kappa=1.0), 2, 2.0 / math.sqrt(3.0), 1.0 / 3.0),
        (params(Family.GPARETO_ONE_SIDED, sigma=2.0, kappa=1.0), 2, 2.0 / 3.0, 1.0 / 3.0),
        (params(Family.STUDENT_T, kappa=0.0), 4, 0.5, 0.0),
        (params(Family.GPARETO_TWO_SIDED, kappa=0.0), 4, 0.25, 0.0),
        (params(Family.STUDENT_T, kappa=1.0), 5, 1.0 / 3.0, 1.0 / 9.0),
    ],
)
def test_power_density_params(p: FamilyParams, power: int, sigma: float, kappa: float):
    transformed = ia_estimation.power_density_params(p, power)
    assert transformed.family == p.family
    assert transformed.mu == p.mu
    assert transformed.sigma == pytest.approx(sigma, rel=1e-12)
    assert transformed.kappa == pytest.approx(kappa, rel=1e-12)


@pytest.mark.parametrize(
    "p, m, n, expected",
    [
        (params(Family.STUDENT_T, kappa=0.7), 2, 3, 1.0 / 3.0),
        (params(Family.STUDENT_T, kappa=1.0), 4, 5, 3.0 / 35.0),
        (params(Family.STUDENT_T, sigma=2.0, kappa=0.5), 2, 4, 4.0 / 4.5),
        (params(Family.STUDENT_T, kappa=0.5), 4, 6, 1.0 / (6.5 * 2.5)),
        (params(Family.STUDENT_T, mu=3.0, kappa=1.0), 3, 4, 0.0),
        (params(Family.GPARETO_ONE_SIDED, sigma=2.0, kappa=0.4), 1, 2, 1.0),
        (params(Family.GPARETO_ONE_SIDED, kappa=1.0), 2, 3, 1.0 / 6.0),
        (params(Family.GPARETO_TWO_SIDED, kappa=0.0), 2, 3, 2.0 / 9.0),
        (params(Family.GPARETO_TWO_SIDED, kappa=1.5), 3, 4, 0.0),
        (params(Family.GPARETO_TWO_SIDED, kappa=1.0), 4, 5, 24.0 / (5.0 * 6.0 * 7.0 * 8.0)),
    ],
)
def test_centered_power_moment(p: FamilyParams, m: int, n: int, expected: float):
    assert ia_estimation.power_moment(p, PowerMomentSpec(m=m, n=n)) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_student_t_domain():
    spec = PowerMomentSpec(m=2, n=2)
    assert spec.shape_bound() == 2.0
    with pytest.raises(ia_estimation.DomainError, match="kappa < 2"):
        ia_estimation.power_moment(params(Family.STUDENT_T, kappa=2.0), spec)


@pytest.mark.parametrize("m, n", [(2, 2), (3, 2), (4, 3), (6, 4), (2, 1)])
def test_student_t_domain_law(m: int, n: int):
    spec = PowerMomentSpec(m=m, n=n)
    bound = spec.shape_bound()
    assert bound == n / (1 + m - n)
    with pytest.raises(ia_estimation.DomainError):
        ia_estimation.student_t_power_moment(params(Family.STUDENT_T, kappa=bound), spec)
    below = float(np.nextafter(bound, 0.0))
    assert math.isfinite(ia_estimation.student_t_power_moment(params(Family.STUDENT_T, kappa=below), spec))


def test_unrestricted_domain():
    for n in range(1, 5):
        spec = PowerMomentSpec(m=n, n=n + 1)
        assert spec.shape_bound() == math.inf
        for kappa in (0.1, 0.25, 0.5, 1.0, 2.0, 4.0):
            assert math.isfinite(ia_estimation.power_moment(params(Family.STUDENT_T, kappa=kappa), spec))
            assert math.isfinite(ia_estimation.power_moment(params(Family.GPARETO_ONE_SIDED, kappa=kappa), spec))


def test_wrong_family():
    with pytest.raises(ia_estimation.DomainError):
        ia_estimation.student_t_power_moment(params(Family.GPARETO_ONE_SIDED), PowerMomentSpec(m=1, n=2))
    with pytest.raises(ia_estimation.DomainError):
        ia_estimation.pareto_power_moment(params(Family.STUDENT_T), PowerMomentSpec(m=1, n=2))


def test_spec_validation():
    with pytest.raises(ia_estimation.DomainError):
        PowerMomentSpec(m=-1, n=2)
    with pytest.raises(ia_estimation.DomainError):
        PowerMomentSpec(m=1, n=0)


@pytest.mark.parametrize(
    "p, m, n, expected",
    [
        (params(Family.STUDENT_T, kappa=1.0), 2, 3, 1.0 / 3.0),
        (params(Family.GPARETO_ONE_SIDED, kappa=1.0), 2, 3, 1.0 / 6.0),
        (params(Family.GPARETO_TWO_SIDED, kappa=0.0), 2, 3, 2.0 / 9.0),
        (params(Family.STUDENT_T, mu=1.0, sigma=2.0, kappa=0.5), 0, 3, 1.0),
        (params(Family.GPARETO_ONE_SIDED, mu=1.0, sigma=2.0, kappa=3.0), 0, 2, 1.0),
    ],
)
def test_oracle(p: FamilyParams, m: int, n: int, expected: float):
    assert ia_estimation.power_moment_oracle(p, PowerMomentSpec(m=m, n=n)) == pytest.approx(expected, rel=1e-8)


def test_oracle_divergence():
    with pytest.raises(ia_estimation.DivergenceError):
        ia_estimation.power_moment_oracle(params(Family.STUDENT_T, kappa=2.0), PowerMomentSpec(m=2, n=2))


def test_student_t_high_order_against_oracle():
    p = params(Family.STUDENT_T, kappa=0.1)
    spec = PowerMomentSpec(m=6, n=4)
    assert ia_estimation.power_moment(p, spec) == pytest.approx(ia_estimation.power_moment_oracle(p, spec), rel=1e-8)


CLOSED_FORMS = {
    Family.STUDENT_T: [(1, 2), (2, 3), (3, 4), (4, 5), (2, 4), (4, 6)],
    Family.GPARETO_ONE_SIDED: [(1, 2), (2, 3), (3, 4), (4, 5)],
    Family.GPARETO_TWO_SIDED: [(1, 2), (2, 3), (3, 4), (4, 5)],
}


@pytest.mark.parametrize("family", list(Family))
@pytest.mark.parametrize("kappa", [0.1, 0.25, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("mu, sigma", [(0.0, 0.5), (2.0, 3.0)])
def test_closed_forms_agree_with_oracle(family: Family, kappa: float, mu: float, sigma: float):
    p = params(family, mu=mu, sigma=sigma, kappa=kappa)
    for (m, n), centered in itertools.product(CLOSED_FORMS[family], (True, False)):
        spec = PowerMomentSpec(m=m, n=n, centered=centered)
        closed = ia_estimation.power_moment(p, spec)
        oracle = ia_estimation.power_moment_oracle(p, spec)
        assert closed == pytest.approx(oracle, rel=1e-7, abs=1e-9 * max(sigma, abs(mu)) ** m), (m, n, centered)


@pytest.mark.parametrize("family", list(Family))
@pytest.mark.parametrize("kappa", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("m", [1, 2])
def test_power_transform_consistency(family: Family, kappa: float, m: int):
    p = params(family, mu=1.0, sigma=2.0, kappa=kappa)
    n = 3
    plain = ia_estimation.power_moment(ia_estimation.power_density_params(p, n), PowerMomentSpec(m=m, n=1))
    oracle = ia_estimation.power_moment_oracle(p, PowerMomentSpec(m=m, n=n))
    assert plain == pytest.approx(oracle, rel=1e-8, abs=1e-9)


def test_invert_location():
    assert ia_estimation.invert_location_two_sided(0.0) == 0.0
    assert ia_estimation.invert_location_two_sided(3.5) == 3.5
    assert ia_estimation.invert_location_two_sided(-2.1) == -2.1


def test_invert_scale():
    assert ia_estimation.invert_scale_student(1.0 / 3.0) == pytest.approx(1.0, rel=1e-12)
    assert ia_estimation.invert_scale_student(3.0) == pytest.approx(3.0, rel=1e-12)
    assert ia_estimation.invert_scale_student(2.0 / 3.0) == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert ia_estimation.invert_scale_pareto_one_sided(0.75) == 1.5
    assert ia_estimation.invert_scale_pareto_one_sided(0.0) == 0.0
    assert ia_estimation.invert_scale_pareto_one_sided(1.0) == 2.0


def test_invert_scale_rejects_negative():
    with pytest.raises(ia_estimation.DomainError):
        ia_estimation.invert_scale_student(-1.0)
    with pytest.raises(ia_estimation.DomainError):
        ia_estimation.invert_scale_pareto_one_sided(-1.0)


def test_invert_shape():
    assert ia_estimation.invert_shape_pareto(1.0 / 6.0, 1.0, Sided.ONE_SIDED) == pytest.approx(1.0, abs=1e-12)
    assert ia_estimation.invert_shape_pareto(2.0 / 9.0, 1.0, Sided.TWO_SIDED) == pytest.approx(0.0, abs=1e-12)
    assert ia_estimation.invert_shape_pareto(1.0 / 6.0, 1.0, Sided.TWO_SIDED) == pytest.approx(1.0, abs=1e-12)
    assert ia_estimation.invert_shape_student_alt(0.2, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert ia_estimation.invert_shape_student_alt(0.25, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert ia_estimation.invert_shape_student_alt(4.0 / 4.5, 2.0) == pytest.approx(0.5, abs=1e-12)


def test_invert_shape_clips_with_warning():
    warnings: list[str] = []
    assert ia_estimation.invert_shape_pareto(0.3, 1.0, warnings_sink=warnings) == 0.0
    assert ia_estimation.invert_shape_student_alt(0.3, 1.0, warnings_sink=warnings) == 0.0
    assert len(warnings) == 2


@pytest.mark.parametrize("kappa", [0.0, 0.3, 1.0, 2.5])
@pytest.mark.parametrize("sigma", [0.5, 4.0])
def test_inversion_round_trips(kappa: float, sigma: float):
    student = params(Family.STUDENT_T, mu=1.0, sigma=sigma, kappa=kappa)
    one_sided = params(Family.GPARETO_ONE_SIDED, mu=1.0, sigma=sigma, kappa=kappa)
    two_sided = params(Family.GPARETO_TWO_SIDED, mu=1.0, sigma=sigma, kappa=kappa)

    mu1_2 = ia_estimation.power_moment(student, PowerMomentSpec(m=1, n=2, centered=False))
    assert ia_estimation.invert_location_two_sided(mu1_2) == pytest.approx(1.0, rel=1e-10)
    mu2_3 = ia_estimation.power_moment(student, PowerMomentSpec(m=2, n=3))
    assert ia_estimation.invert_scale_student(mu2_3) == pytest.approx(sigma, rel=1e-10)
    mu2_4 = ia_estimation.power_moment(student, PowerMomentSpec(m=2, n=4))
    assert ia_estimation.invert_shape_student_alt(mu2_4, sigma) == pytest.approx(kappa, abs=1e-10)

    pareto_mu1_2 = ia_estimation.power_moment(one_sided, PowerMomentSpec(m=1, n=2))
    assert ia_estimation.invert_scale_pareto_one_sided(pareto_mu1_2) == pytest.approx(sigma, rel=1e-10)
    for p, sided in ((one_sided, Sided.ONE_SIDED), (two_sided, Sided.TWO_SIDED)):
        pareto_mu2_3 = ia_estimation.power_moment(p, PowerMomentSpec(m=2, n=3))
        assert ia_estimation.invert_shape_pareto(pareto_mu2_3, sigma, sided) == pytest.approx(kappa, abs=1e-10)

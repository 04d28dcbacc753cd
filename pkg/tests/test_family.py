import pytest

from ia_estimation import Family, Sided


@pytest.mark.parametrize(
    "value, expected",
    [
        ("student_t", Family.STUDENT_T),
        ("Student-T", Family.STUDENT_T),
        (" t ", Family.STUDENT_T),
        ("gpareto-1s", Family.GPARETO_ONE_SIDED),
        ("gpareto_two_sided", Family.GPARETO_TWO_SIDED),
        ("gpareto-2s", Family.GPARETO_TWO_SIDED),
        ("lognormal", None),
        (None, None),
    ],
)
def test_try_parse(value: str | None, expected: Family | None):
    assert Family.try_parse(value) == expected


def test_family_properties():
    assert not Family.STUDENT_T.is_pareto
    assert Family.GPARETO_ONE_SIDED.is_pareto
    assert Family.STUDENT_T.is_symmetric
    assert Family.GPARETO_TWO_SIDED.is_symmetric
    assert not Family.GPARETO_ONE_SIDED.is_symmetric


def test_sided_family():
    assert Sided.ONE_SIDED.family == Family.GPARETO_ONE_SIDED
    assert Sided.TWO_SIDED.family == Family.GPARETO_TWO_SIDED

import math

import numpy as np
import pytest

import ia_estimation
from ia_estimation import Family, MapConfig
from ia_estimation.standard_map import CHUNK_SIZE, centered_sums, initial_conditions


def test_iterate_map_returns_initial_point_and_iterates():
    trajectory = ia_estimation.iterate_map(1.0, 0.5, 3, 0.0, wrap=False)

    assert trajectory.tolist() == [1.0, 1.5, 2.0, 2.5]


def test_iterate_map_fixed_point():
    assert ia_estimation.iterate_map(0.0, 0.0, 5, 3.0).tolist() == [0.0] * 6


def test_iterate_map_step():
    trajectory = ia_estimation.iterate_map(1.0, 0.0, 1, 2.0, wrap=False)

    assert trajectory[1] == pytest.approx(1.0 + 2.0 * math.sin(1.0))


def test_iterate_map_wraps():
    trajectory = ia_estimation.iterate_map(6.0, 2.0, 100, 5.0)

    assert np.all(trajectory >= 0.0)
    assert np.all(trajectory < 2.0 * math.pi)


def test_iterate_map_rejects_negative_length():
    with pytest.raises(ia_estimation.DomainError):
        ia_estimation.iterate_map(0.0, 0.0, -1, 1.0)


def test_centered_sums_match_trajectories():
    x0 = np.array([0.3, 2.0, 5.5])
    y0 = np.array([1.0, 0.1, 4.0])

    sums = centered_sums(x0, y0, 10, 7.0, offset=math.pi)

    for i in range(3):
        trajectory = ia_estimation.iterate_map(x0[i], y0[i], 10, 7.0)
        assert sums[i] == pytest.approx(np.sum(trajectory[1:] - math.pi), rel=1e-6, abs=1e-6)


def test_centered_sums_reject_mismatched_shapes():
    with pytest.raises(ia_estimation.DomainError):
        centered_sums([0.0, 1.0], [0.0], 3, 1.0)


@pytest.mark.parametrize(
    "changes",
    [
        {"K": -1.0},
        {"M": 0},
        {"T": 0},
        {"seed": -1},
    ],
)
def test_map_config_rejects(changes: dict):
    values = dict(K=1.0, M=10, T=10)
    values.update(changes)

    with pytest.raises(ia_estimation.DomainError):
        MapConfig(**values)


def test_initial_conditions_cover_the_torus():
    cfg = MapConfig(K=1.0, M=CHUNK_SIZE + 10, T=1)

    x0, y0 = initial_conditions(cfg, 0)
    tail_x0, _ = initial_conditions(cfg, 1)

    assert x0.shape == (CHUNK_SIZE,)
    assert tail_x0.shape == (10,)
    assert np.all((x0 >= 0.0) & (x0 < 2.0 * math.pi))
    assert np.all((y0 >= 0.0) & (y0 < 2.0 * math.pi))


def test_generate_z():
    cfg = MapConfig(K=10.0, M=5_000, T=50, seed=3)

    z = ia_estimation.generate_z(cfg)

    assert len(z) == 5_000
    assert z.seed == 3
    assert z.source == "stdmap:K=10,M=5000,T=50"
    # the empirical mean of x is subtracted, so the sums are centered
    assert float(np.mean(z.values)) == pytest.approx(0.0, abs=1e-6)
    assert float(np.std(z.values)) > 1.0


def test_generate_z_does_not_depend_on_runner():
    cfg = MapConfig(K=6.0, M=2 * CHUNK_SIZE + 7, T=20, seed=1)

    sequential = ia_estimation.generate_z(cfg)
    parallel = ia_estimation.generate_z(cfg, ia_estimation.parallel_runner(threads=3))

    assert np.array_equal(sequential.values, parallel.values)


def test_generate_z_depends_on_seed():
    first = ia_estimation.generate_z(MapConfig(K=6.0, M=100, T=20, seed=1))
    second = ia_estimation.generate_z(MapConfig(K=6.0, M=100, T=20, seed=2))

    assert not np.array_equal(first.values, second.values)


def test_generate_z_without_wrapping():
    z = ia_estimation.generate_z(MapConfig(K=0.0, M=100, T=10, wrap=False))

    assert len(z) == 100
    assert float(np.mean(z.values)) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_integrable_map_fit_is_close_to_the_likelihood_optimum(seed):
    z = ia_estimation.generate_z(MapConfig(K=0.0, M=10_000, T=1_000, seed=seed))

    ia = ia_estimation.estimate_student_t(z, seed=seed).params
    mle = ia_estimation.mle_fit(z, Family.STUDENT_T, ia)
    ia_ll = ia_estimation.avg_loglikelihood(z, ia)
    mle_ll = ia_estimation.avg_loglikelihood(z, mle)

    assert 0.25 <= ia.kappa <= 1.2
    assert mle_ll >= ia_ll - 1e-9
    assert mle_ll - ia_ll <= 0.05

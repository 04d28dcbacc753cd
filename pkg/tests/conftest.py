import logging

import numpy as np
import pytest

import ia_estimation

logging.basicConfig(level="DEBUG")


def quantile_grid(p: ia_estimation.FamilyParams, size: int) -> np.ndarray:
    return np.asarray(ia_estimation.quantile(p, (np.arange(1, size + 1) - 0.5) / size))


@pytest.fixture
def cauchy() -> ia_estimation.FamilyParams:
    return ia_estimation.FamilyParams(family=ia_estimation.Family.STUDENT_T, mu=0.0, sigma=1.0, kappa=1.0)


@pytest.fixture
def write_csv(tmp_path):
    def go(name: str, content: str):
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path

    return go

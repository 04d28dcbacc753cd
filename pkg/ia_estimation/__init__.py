import collections
import re
import sys

from .base import (
    DataError,
    DegenerateSampleError,
    DivergenceError,
    DomainError,
    EmptyInputError,
    EmptySelectionError,
    EstimationError,
    FamilyParams,
    InvalidBracketError,
    NoSignChangeError,
    NonConvergenceError,
    NumericalError,
    SampleSet,
)
from .distributions import (
    QTriplet,
    beta_to_sigma,
    cdf,
    kappa_to_q,
    logpdf,
    mode_density,
    pdf,
    q_to_kappa,
    quantile,
    sample,
    sf,
    sigma_from_mode_density,
    sigma_to_beta,
)
from .estimator import Estimator
from .estimators import (
    EstimateReport,
    HillAverage,
    ShapeMethod,
    TheoryPrediction,
    estimate_gpareto,
    estimate_location_ia,
    estimate_scale_student_ia,
    estimate_shape_geometric_mean,
    estimate_student_t,
    hill_estimate,
    hill_stable_average,
    mle_fit,
    predict_bias_precision,
)
from .family import Family, Sided
from .ia_select import (
    IASelection,
    NormalizationState,
    OffsetMode,
    SelectionMode,
    normalize,
    select_ntuples,
    select_pairs,
    select_triplets_abs,
)
from .manifest import RunManifest
from .metrics_eval import (
    BenchmarkConfig,
    BenchmarkResult,
    CellSummary,
    ComparisonSummary,
    CvmResult,
    avg_loglikelihood,
    cvm_statistic,
    ks_statistic,
    run_benchmark,
    small_sample_comparison,
)
from .numerics import (
    FullLine,
    HalfLine,
    QuadratureResult,
    RootBracket,
    digamma,
    find_root_bracketed,
    harmonic_real,
    integrate_improper,
    log_beta,
    log_gamma,
    minimize_simplex,
    reg_inc_beta,
)
from .power_moments import (
    PowerMomentSpec,
    invert_location_two_sided,
    invert_scale_pareto_one_sided,
    invert_scale_student,
    invert_shape_pareto,
    invert_shape_student_alt,
    power_density_params,
    power_moment,
    power_moment_oracle,
)
from .runner import ParallelTrialRunner, SequentialTrialRunner, TrialRunner, parallel_runner, sequential_runner
from .setup import setup
from .standard_map import MapConfig, generate_z, iterate_map

__all__: tuple[str, ...] = (
    # base.py
    "DataError",
    "DegenerateSampleError",
    "DivergenceError",
    "DomainError",
    "EmptyInputError",
    "EmptySelectionError",
    "EstimationError",
    "FamilyParams",
    "InvalidBracketError",
    "NoSignChangeError",
    "NonConvergenceError",
    "NumericalError",
    "SampleSet",
    # distributions.py
    "QTriplet",
    "beta_to_sigma",
    "cdf",
    "kappa_to_q",
    "logpdf",
    "mode_density",
    "pdf",
    "q_to_kappa",
    "quantile",
    "sample",
    "sf",
    "sigma_from_mode_density",
    "sigma_to_beta",
    # estimator.py
    "Estimator",
    # estimators.py
    "EstimateReport",
    "HillAverage",
    "ShapeMethod",
    "TheoryPrediction",
    "estimate_gpareto",
    "estimate_location_ia",
    "estimate_scale_student_ia",
    "estimate_shape_geometric_mean",
    "estimate_student_t",
    "hill_estimate",
    "hill_stable_average",
    "mle_fit",
    "predict_bias_precision",
    # family.py
    "Family",
    "Sided",
    # ia_select.py
    "IASelection",
    "NormalizationState",
    "OffsetMode",
    "SelectionMode",
    "normalize",
    "select_ntuples",
    "select_pairs",
    "select_triplets_abs",
    # manifest.py
    "RunManifest",
    # metrics_eval.py
    "BenchmarkConfig",
    "BenchmarkResult",
    "CellSummary",
    "ComparisonSummary",
    "CvmResult",
    "avg_loglikelihood",
    "cvm_statistic",
    "ks_statistic",
    "run_benchmark",
    "small_sample_comparison",
    # numerics.py
    "FullLine",
    "HalfLine",
    "QuadratureResult",
    "RootBracket",
    "digamma",
    "find_root_bracketed",
    "harmonic_real",
    "integrate_improper",
    "log_beta",
    "log_gamma",
    "minimize_simplex",
    "reg_inc_beta",
    # power_moments.py
    "PowerMomentSpec",
    "invert_location_two_sided",
    "invert_scale_pareto_one_sided",
    "invert_scale_student",
    "invert_shape_pareto",
    "invert_shape_student_alt",
    "power_density_params",
    "power_moment",
    "power_moment_oracle",
    # runner.py
    "ParallelTrialRunner",
    "SequentialTrialRunner",
    "TrialRunner",
    "parallel_runner",
    "sequential_runner",
    # setup.py
    "setup",
    # standard_map.py
    "MapConfig",
    "generate_z",
    "iterate_map",
)

__version__ = "0.1.0"

version = f"{__version__}, Python {sys.version}"

VersionInfo = collections.namedtuple("VersionInfo", "major minor micro release_level serial")


def _parse_version(v: str) -> VersionInfo:
    version_re = r"^(?P<major>\d+)\.(?P<minor>\d+)\.(?P<micro>\d+)" r"((?P<release_level>[a-z]+)(?P<serial>\d+)?)?$"
    match = re.match(version_re, v)
    if not match:
        raise ImportError(f"Invalid package version {v}")
    try:
        major = int(match.group("major"))
        minor = int(match.group("minor"))
        micro = int(match.group("micro"))
        levels = {"rc": "candidate", "a": "alpha", "b": "beta", None: "final"}
        release_level = levels[match.group("release_level")]
        serial = int(match.group("serial")) if match.group("serial") else 0
        return VersionInfo(major, minor, micro, release_level, serial)
    except Exception as e:
        raise ImportError(f"Invalid package version {v}") from e


version_info = _parse_version(__version__)

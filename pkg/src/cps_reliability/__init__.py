"""Reliability modeling for cyber-physical systems."""

from .composition import (
    Component,
    ComponentKind,
    CpsArchitecture,
    FreshStart,
    KofN,
    Leaf,
    LiteralSum,
    NormalizedMean,
    Parallel,
    Product,
    Series,
    TestWindow,
    cc_reliability,
    cps_reliability,
    evaluate_block,
    k_of_n_reliability,
    parallel_reliability,
    series_reliability,
)
from .models import (
    ConstantRate,
    DomainError,
    PowerLaw,
    SrgmNhpp,
    mtbf,
    reliability_at,
    sh_intensity,
    srgm_count_pmf,
    srgm_intensity,
    srgm_mean_value,
    windowed_reliability,
)
from .montecarlo import SimulationConfig, simulate

__version__ = "0.1.0"

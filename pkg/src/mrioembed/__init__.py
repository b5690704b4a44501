"""Openness, upstream domestic embedding and export dependency of national
economies, computed from multi-regional input-output tables."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DEFAULT_TAXONOMY,
    SECTORS,
    CountryCode,
    MrioError,
    MrioTable,
    NationalAccounts,
    SectorCode,
    derive_national_accounts,
)
from .ingest import parse_canonical, parse_wiot, write_canonical  # noqa: E402
from .metrics import (  # noqa: E402
    MetricsRecord,
    SectorProfile,
    dependency,
    metrics_record,
    openness,
    sector_profiles,
    ude_vector,
    unevenness,
)
from .inference import (  # noqa: E402
    DesignMatrix,
    RegressionResult,
    marginal_effects,
    ols_fit,
    permutation_pvalues,
)
from .panel import (  # noqa: E402
    Panel,
    Trajectory,
    build_panel,
    country_slope,
    pooled_model_dependency,
    pooled_model_unevenness,
    region_means,
    relative_change,
    smooth_and_classify,
)

__all__ = [
    "DEFAULT_TAXONOMY", "SECTORS", "CountryCode", "MrioError", "MrioTable",
    "NationalAccounts", "SectorCode", "derive_national_accounts",
    "parse_canonical", "parse_wiot", "write_canonical",
    "MetricsRecord", "SectorProfile", "dependency", "metrics_record", "openness",
    "sector_profiles", "ude_vector", "unevenness",
    "DesignMatrix", "RegressionResult", "marginal_effects", "ols_fit", "permutation_pvalues",
    "Panel", "Trajectory", "build_panel", "country_slope", "pooled_model_dependency",
    "pooled_model_unevenness", "region_means", "relative_change", "smooth_and_classify",
]

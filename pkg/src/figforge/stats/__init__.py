from .icc import compute_icc
from .agreement import (
    AgreementReport,
    RatingRecord,
    agreement_rates,
    build_agreement_report,
    format_mean_sd,
    load_ratings_csv,
    stage_summary,
)

__all__ = [
    "compute_icc",
    "RatingRecord",
    "AgreementReport",
    "agreement_rates",
    "stage_summary",
    "build_agreement_report",
    "load_ratings_csv",
    "format_mean_sd",
]

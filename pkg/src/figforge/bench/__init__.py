from .sampling import BenchmarkSpec, sample_candidates
from .curation import CurationItem, CurationStore, Verdict, curation_agreement
from .export import BenchmarkExport, export_benchmark, write_export

__all__ = [
    "BenchmarkSpec",
    "sample_candidates",
    "CurationItem",
    "CurationStore",
    "Verdict",
    "curation_agreement",
    "BenchmarkExport",
    "export_benchmark",
    "write_export",
]

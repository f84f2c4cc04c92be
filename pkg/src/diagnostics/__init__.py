from src.diagnostics.distances import (
    fubini_study_distance,
    fubini_study_report_series,
    fubini_study_series,
)
from src.diagnostics.populations import (
    cyclicity_defect,
    dissociation_probability,
    physical_end_index,
    transition_probabilities,
)
from src.diagnostics.floquet import (
    FloquetSet,
    floquet_eigenvector_samples,
    floquet_extract,
    floquet_residuals,
    fold_quasi_energy,
)

__all__ = [
    "fubini_study_distance",
    "fubini_study_report_series",
    "fubini_study_series",
    "cyclicity_defect",
    "dissociation_probability",
    "physical_end_index",
    "transition_probabilities",
    "FloquetSet",
    "floquet_eigenvector_samples",
    "floquet_extract",
    "floquet_residuals",
    "fold_quasi_energy",
]

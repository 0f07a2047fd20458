"""recurkit: quantum recurrence times from spectral data.

Closed-form crossing densities and recurrence times for generic and
quasi-free spectra, brute-force crossing counting of fidelity time series,
exact-diagonalization spin-chain builders, and a classical torus baseline.
"""

from .errors import NumericalError, RecurKitError, ValidationError
from .spectrum import (
    DiscreteSpectrum,
    SpectralStats,
    degeneracy_collapse,
    eval_fidelity,
    eval_fidelity_reference,
    fidelity_at,
    spectral_stats,
    validate_spectrum,
)
from .recurrence import (
    RecurrenceDiverges,
    crossing_count_estimate,
    density_generic,
    fidelity_pdf,
    log_recurrence_time_generic,
    recurrence_time_generic,
    universal_function,
)
from .quasifree import (
    ModeSet,
    QuasifreeStats,
    density_integrable,
    eval_fidelity_product,
    log_fidelity_product,
    log_recurrence_time_integrable,
    mode_moments,
    quasifree_stats,
    recurrence_time_integrable,
)
from .crossings import (
    CrossingReport,
    ModeSetProvider,
    ScanConfig,
    SpectrumProvider,
    empirical_pdf,
    estimate_density,
    refine_root,
    scan_crossings,
    track_supremum,
)
from .models import (
    QuenchSpec,
    SweepRow,
    build_tam,
    critical_sweep,
    quench_spectrum,
    tfim_modes,
)
from .eig import symmetric_eigendecomposition
from .classical import TorusSpec, torus_flow_simulate, torus_recurrence_time
from .synthetic import random_spectrum

__version__ = "0.1.0"

__all__ = [
    "CrossingReport",
    "DiscreteSpectrum",
    "ModeSet",
    "ModeSetProvider",
    "NumericalError",
    "QuasifreeStats",
    "QuenchSpec",
    "RecurKitError",
    "RecurrenceDiverges",
    "ScanConfig",
    "SpectralStats",
    "SpectrumProvider",
    "SweepRow",
    "TorusSpec",
    "ValidationError",
    "build_tam",
    "critical_sweep",
    "crossing_count_estimate",
    "degeneracy_collapse",
    "density_generic",
    "density_integrable",
    "empirical_pdf",
    "estimate_density",
    "eval_fidelity",
    "eval_fidelity_product",
    "eval_fidelity_reference",
    "fidelity_at",
    "fidelity_pdf",
    "log_fidelity_product",
    "log_recurrence_time_generic",
    "log_recurrence_time_integrable",
    "mode_moments",
    "quasifree_stats",
    "quench_spectrum",
    "random_spectrum",
    "recurrence_time_generic",
    "recurrence_time_integrable",
    "refine_root",
    "scan_crossings",
    "spectral_stats",
    "symmetric_eigendecomposition",
    "tfim_modes",
    "torus_flow_simulate",
    "torus_recurrence_time",
    "track_supremum",
    "universal_function",
    "validate_spectrum",
]

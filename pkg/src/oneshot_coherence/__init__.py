"""One-shot coherence concentration: rates, smoothing and incoherent channels."""
from ._backend import BACKEND
from .channels import (
    BinAssignment,
    DecompositionError,
    IncoherentChannel,
    apply_channel,
    birkhoff_decompose,
    build_concentration_channel,
    certify_incoherent,
    check_majorization,
    concentrate,
    concentrate_ensemble,
    ribbon_partition,
)
from .entropies import (
    UNBOUNDED,
    c_min,
    c_r,
    d_a_closed_form,
    qc_state,
    renyi_relative,
    s0_relative,
    s_min,
    shannon_entropy,
    von_neumann,
)
from .qstate import (
    DensityOperator,
    GroupedDistribution,
    PureEnsemble,
    PureState,
    ValidationError,
    dephase,
    ensemble_from_isometry,
    fidelity,
    maximally_coherent,
    random_density,
    random_isometry,
    random_pure_state,
)
from .rates import (
    BudgetExceeded,
    RateReport,
    SweepRow,
    assisted_rate,
    ensemble_feasible,
    ensemble_rate,
    f_min_delta,
    ncopy_sweep,
    pure_rate,
)
from .smoothing import (
    max_fidelity_capped,
    oracle_smoothed_min_entropy,
    smoothed_min_entropy_pure,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BinAssignment", "BudgetExceeded", "DecompositionError", "DensityOperator",
    "GroupedDistribution", "IncoherentChannel", "PureEnsemble", "PureState", "RateReport",
    "SweepRow", "UNBOUNDED", "ValidationError", "apply_channel", "assisted_rate",
    "birkhoff_decompose", "build_concentration_channel", "c_min", "c_r",
    "certify_incoherent", "check_majorization", "concentrate", "concentrate_ensemble",
    "d_a_closed_form", "dephase", "ensemble_feasible", "ensemble_from_isometry",
    "ensemble_rate", "f_min_delta", "fidelity", "max_fidelity_capped",
    "maximally_coherent", "ncopy_sweep", "oracle_smoothed_min_entropy", "pure_rate",
    "qc_state", "random_density", "random_isometry", "random_pure_state",
    "renyi_relative", "ribbon_partition", "s0_relative", "s_min", "shannon_entropy",
    "smoothed_min_entropy_pure", "von_neumann", "__version__",
]

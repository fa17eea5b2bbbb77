"""Exact symbolic-numeric engine for block-Schur determinants and KP checks."""

from .airy import (
    AiryEvaluator,
    ExampleTau,
    example_hirota_residual,
    example_kp_residual,
    example_u,
    numeric_kp_residual,
    numeric_nschur,
    psi_h_coefficients,
    psi_inverse_pipeline,
    u_field_from_tau,
)
from .algebra import (
    Polynomial,
    RationalFunction,
    Variable,
    aux_var,
    h_var,
    pi_var,
    rf_equal,
    t_var,
)
from .core import (
    HModel,
    assigned_model,
    exponential_model,
    formal_model,
    h_weight,
    homogeneous_h_weight,
    jacobi_trudi,
    ms_entry,
    ms_matrix,
    nschur,
    schur_polynomial,
    stabilization_m,
)
from .determinant import rf_det
from .grassmann import (
    FiniteFrame,
    GOperator,
    PluckerVector,
    exchange_relations,
    expansion_lhs,
    expansion_rhs,
    frame_plucker_vector,
    minors,
    plucker_check,
    plucker_coord,
    sequence_frame,
    theorem1_check,
)
from .kp import (
    family_tau,
    hirota_residual,
    kp_residual,
    quadric_extraction,
    tau_to_u,
    tau_u_consistency,
)
from .psido import (
    DEFAULT_DEPTH,
    PsiDO,
    commutator,
    compose,
    lax_residual,
    nth_root,
)
from .sequences import (
    VirtualSequence,
    enumerate_by_weight,
    enumerate_skn,
    from_partition,
    from_subset_label,
    in_skn,
    partitions_of,
    subset_label,
    to_partition,
    weight,
)

__version__ = "0.1.0"

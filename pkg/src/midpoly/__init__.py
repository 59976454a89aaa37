"""Symbolic expected-utility algebra for multiplicative influence diagrams."""

from .asymmetry import (
    Asymmetry,
    apply_asymmetries,
    monomial_compatible,
    predicted_asymmetric_counts,
    symbolic_eu_asymmetric,
)
from .diagram import (
    CHANCE,
    DECISION,
    MID,
    Diagnostic,
    comp_b,
    comp_j,
    decision_sequence,
    indeterminate_table,
    is_extensive_form,
    make_mid,
    parameter_vectors,
    prob_vector,
    psi_vector,
    solve_h,
    validate,
)
from .engine import (
    EUVector,
    EvaluationTrace,
    Policy,
    align_scopes,
    enumerate_policies,
    eu_marginalize,
    eu_maximize,
    eu_multisum,
    symbolic_eu,
)
from .indet import Indeterminate
from .model import ModelDocument, parse_model, serialize_model
from .oracle import (
    complete_numeric_spec,
    joint_eu_numeric,
    numeric_backward,
    optimal_policy_numeric,
    stage_eu_numeric,
)
from .poly import Monomial, Polynomial, format_fraction, parse_polynomial, to_fraction
from .sensitivity import (
    Axis,
    SubstitutionSpec,
    admissible_grid,
    apply_spec,
    indifference_samples,
    preferred_action_table,
)
from .structure import (
    StructurePrediction,
    check_structure,
    multiplication_count,
    predicted_structure,
)
from .transforms import (
    DefinitionalBinding,
    TransformLog,
    TransformStep,
    apply_sufficiency,
    d_separated,
    is_father,
    map_policy,
    remove_barren,
    resolve_spec,
    reverse_arc,
    sufficiency_removable,
    to_extensive_form,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

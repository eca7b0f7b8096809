"""Exact *-moments of the quasi-nilpotent DT-operator and the graded
generating-function calculus that cross-checks them."""

from .fps import (
    QSeries,
    RegistryMismatch,
    Series,
    VariableRegistry,
    e_inverse,
    e_transform,
    geometric,
    homogeneous_part,
    odot,
    odot_many,
    qseries_mul,
)
from .moments import (
    MomentEngine,
    canonical_key,
    moment,
    multinomial,
    n_value,
    nom,
    parse_key,
    validate_key,
)
from .ratfun import (
    DistinctnessViolation,
    ExactDivisionError,
    FormTable,
    RationalExpr,
    RationalTerm,
    SymPoly,
    expand_to_series,
    form_id,
    identity_form,
    odot_closed,
    p_polynomial,
    permutation_form,
    q_polynomial,
)
from .genfun import (
    DiagonalSeries,
    GenFunResult,
    build_genfun,
    check_conjecture,
    check_n3_identity,
    f_rational,
    f_series,
    g_diagonal,
    h_diagonal,
    recursion_residual,
)

__version__ = "0.1.0"

__all__ = [
    "DiagonalSeries",
    "DistinctnessViolation",
    "ExactDivisionError",
    "FormTable",
    "GenFunResult",
    "MomentEngine",
    "QSeries",
    "RationalExpr",
    "RationalTerm",
    "RegistryMismatch",
    "Series",
    "SymPoly",
    "VariableRegistry",
    "build_genfun",
    "canonical_key",
    "check_conjecture",
    "check_n3_identity",
    "e_inverse",
    "e_transform",
    "expand_to_series",
    "f_rational",
    "f_series",
    "form_id",
    "g_diagonal",
    "geometric",
    "h_diagonal",
    "homogeneous_part",
    "identity_form",
    "moment",
    "multinomial",
    "n_value",
    "nom",
    "odot",
    "odot_closed",
    "odot_many",
    "p_polynomial",
    "parse_key",
    "permutation_form",
    "q_polynomial",
    "qseries_mul",
    "recursion_residual",
    "validate_key",
    "__version__",
]

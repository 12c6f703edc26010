"""Causal-structure toolkit for finite-dimensional quantum channels."""

__version__ = "0.1.0"

from .causobj import (
    CausMorphism,
    CausObject,
    check_morphism,
    choi_of_state,
    dual_obj,
    hom_obj,
    interchange_check,
    member,
    membership_report,
    mk_all_states,
    mk_classical,
    mk_first_order,
    mk_unit,
    objects_equal,
    par_obj,
    seq_obj,
    state_of_choi,
    tensor_obj,
)
from .cpmaps import ChoiMap, transpose_channel
from .embedding import (
    BlackBoxTransform,
    F_eval,
    F_mor,
    FImage,
    faithfulness_probe,
    fullness_reconstruct,
    inverse_seq,
    law_suite,
    lax_seq,
    lax_tensor,
    profunctor_action,
    strength,
    strong_closure_check,
)
from .errors import (
    CaustykError,
    ElaborationError,
    EmptyDualError,
    FlatnessError,
    HermiticityError,
    InconsistencyError,
    InvalidDimensionError,
    MorphismError,
    NoIsometryError,
    NotOneWayError,
    ShadowNotFoundError,
    ShapeMismatchError,
    TypeSyntaxError,
)
from .signalling import (
    DecompPair,
    SignalVerdict,
    coend_equiv,
    comb_decompose,
    equiv_certificate,
    nonsignalling_test,
    recompose,
)
from .tolerances import TOLS, Tolerances

__all__ = [
    "BlackBoxTransform",
    "CausMorphism",
    "CausObject",
    "CaustykError",
    "ChoiMap",
    "DecompPair",
    "ElaborationError",
    "EmptyDualError",
    "F_eval",
    "F_mor",
    "FImage",
    "FlatnessError",
    "HermiticityError",
    "InconsistencyError",
    "InvalidDimensionError",
    "MorphismError",
    "NoIsometryError",
    "NotOneWayError",
    "ShadowNotFoundError",
    "ShapeMismatchError",
    "SignalVerdict",
    "TOLS",
    "Tolerances",
    "TypeSyntaxError",
    "check_morphism",
    "choi_of_state",
    "coend_equiv",
    "comb_decompose",
    "dual_obj",
    "equiv_certificate",
    "faithfulness_probe",
    "fullness_reconstruct",
    "hom_obj",
    "interchange_check",
    "inverse_seq",
    "law_suite",
    "lax_seq",
    "lax_tensor",
    "member",
    "membership_report",
    "mk_all_states",
    "mk_classical",
    "mk_first_order",
    "mk_unit",
    "nonsignalling_test",
    "objects_equal",
    "par_obj",
    "profunctor_action",
    "recompose",
    "seq_obj",
    "state_of_choi",
    "strength",
    "strong_closure_check",
    "tensor_obj",
    "transpose_channel",
    "__version__",
]

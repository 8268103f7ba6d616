"""Frame-theoretic classification of measurements in geometric GPTs.

Submodules: ``frames`` (finite frames), ``scalable`` (scalability via NNLS),
``ggpt`` (models in adapted coordinates), ``measurements`` (classification),
``urgleichung`` (primal equation), ``models`` (quantum and classical models,
example measurements, parameter sweep) and ``cli``.
"""
from .errors import (
    BadWeights,
    DimensionMismatch,
    GgptError,
    InconsistentScales,
    InvalidMeasurement,
    NotAFrame,
    NotTightIC,
    ParamOutOfRange,
    PreconditionNotMet,
    SingularFrameOperator,
    SolverError,
    SolverStalled,
    UndefinedConditional,
    ValidationError,
    ZeroTraceEffect,
)
from .frames import Frame, FrameBounds, canonical_dual, frame_bounds, frame_operator
from .ggpt import Duality, GgptModel
from .measurements import ClassificationReport, Measurement, classify, union
from .models import (
    classical_model,
    example_family,
    fine_grained,
    mub_union,
    qubit_sic,
    quantum_model,
    sic_union,
    sweep_family,
    z_basis,
)
from .scalable import ScalabilityResult, find_scales, nnls_solve
from .urgleichung import (
    Instrument,
    c_matrix,
    k_matrix,
    ltp_decomposition,
    predict_statistics,
    reconstruct_state,
    verify_primal_equation,
)

__version__ = "0.1.0"

__all__ = [
    "BadWeights",
    "ClassificationReport",
    "DimensionMismatch",
    "Duality",
    "Frame",
    "FrameBounds",
    "GgptError",
    "GgptModel",
    "InconsistentScales",
    "Instrument",
    "InvalidMeasurement",
    "Measurement",
    "NotAFrame",
    "NotTightIC",
    "ParamOutOfRange",
    "PreconditionNotMet",
    "ScalabilityResult",
    "SingularFrameOperator",
    "SolverError",
    "SolverStalled",
    "UndefinedConditional",
    "ValidationError",
    "ZeroTraceEffect",
    "c_matrix",
    "canonical_dual",
    "classical_model",
    "classify",
    "example_family",
    "find_scales",
    "fine_grained",
    "frame_bounds",
    "frame_operator",
    "k_matrix",
    "ltp_decomposition",
    "mub_union",
    "nnls_solve",
    "predict_statistics",
    "quantum_model",
    "qubit_sic",
    "reconstruct_state",
    "sic_union",
    "sweep_family",
    "union",
    "verify_primal_equation",
    "z_basis",
]

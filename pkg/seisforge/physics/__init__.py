"""
Physics for seisforge.

This package contains ground-motion records, parametric buildings and their
lumped-mass reduction, Newmark time integration, and stiffness
identification.
"""

from seisforge.physics.ground_motion import (
    DEFAULT_BANDING,
    GroundMotion,
    IntensityBanding,
    IntensityClass,
    MotionSource,
    SynthSpec,
    arias_intensity,
    load_record,
    resample,
    save_record,
    scale_to_pga,
    significant_duration,
    synth_record,
)
from seisforge.physics.structure import (
    BuildingConfig,
    ConcreteGrade,
    Direction,
    LumpedMassModel,
    ModalSummary,
    SpringKind,
    StorySpringLaw,
    StructureType,
    apply_scale,
    assemble_matrices,
    axial_load_ratio,
    fundamental_periods,
    match_period,
    modal_summary,
    reduce_to_mdof,
    sample_building,
    shear_stiffness,
    stiffness_scale_factor,
)
from seisforge.physics.dynamics import (
    BilinearSpring,
    IntegratorParams,
    LinearRestoring,
    NewmarkIntegrator,
    NewmarkState,
    PeakResponse,
    ResponseHistory,
    RestoringForce,
    ShearSprings,
    damping_matrix,
    interstory_drift,
    newmark_step,
    peak_response,
    rayleigh_coeffs,
    restoring_force,
    sdr_response,
    simulate,
)
from seisforge.physics.identification import (
    IdentificationMethod,
    IdentificationProblem,
    IdentificationResult,
    identify_stiffness,
    objective,
    validate_period,
)

__all__ = [
    "DEFAULT_BANDING",
    "GroundMotion",
    "IntensityBanding",
    "IntensityClass",
    "MotionSource",
    "SynthSpec",
    "arias_intensity",
    "load_record",
    "resample",
    "save_record",
    "scale_to_pga",
    "significant_duration",
    "synth_record",
    "BuildingConfig",
    "ConcreteGrade",
    "Direction",
    "LumpedMassModel",
    "ModalSummary",
    "SpringKind",
    "StorySpringLaw",
    "StructureType",
    "apply_scale",
    "assemble_matrices",
    "axial_load_ratio",
    "fundamental_periods",
    "match_period",
    "modal_summary",
    "reduce_to_mdof",
    "sample_building",
    "shear_stiffness",
    "stiffness_scale_factor",
    "BilinearSpring",
    "IntegratorParams",
    "LinearRestoring",
    "NewmarkIntegrator",
    "NewmarkState",
    "PeakResponse",
    "ResponseHistory",
    "RestoringForce",
    "ShearSprings",
    "damping_matrix",
    "interstory_drift",
    "newmark_step",
    "peak_response",
    "rayleigh_coeffs",
    "restoring_force",
    "sdr_response",
    "simulate",
    "IdentificationMethod",
    "IdentificationProblem",
    "IdentificationResult",
    "identify_stiffness",
    "objective",
    "validate_period",
]

"""Spectrum broadcast structure certification and illuminated-sphere decoherence numerics."""

from .qstate import (
    DensityOperator,
    PureState,
    VonNeumannMeasurement,
    binary_entropy,
    generalized_overlap,
    partial_trace,
    partial_transpose,
    tensor,
    trace_norm,
    vn_entropy,
)
from .info import mutual_information, holevo_chi
from .sbs import SBSSpec, SBSReport, build_sbs, check_sbs, witness_report
from .sphere import FractionPartition, InitialSystemState, SphereParams, bound_suite, phase_diagram

__version__ = "0.1.0"

__all__ = [
    "DensityOperator",
    "FractionPartition",
    "InitialSystemState",
    "PureState",
    "SBSReport",
    "SBSSpec",
    "SphereParams",
    "VonNeumannMeasurement",
    "binary_entropy",
    "bound_suite",
    "build_sbs",
    "check_sbs",
    "generalized_overlap",
    "holevo_chi",
    "mutual_information",
    "partial_trace",
    "partial_transpose",
    "phase_diagram",
    "tensor",
    "trace_norm",
    "vn_entropy",
    "witness_report",
]

"""Finite dagger compact categories: state daggers, dilations, axioms and kernels, checked numerically."""
from .axioms import (
    ReconstructionError,
    ReconstructionResult,
    is_pure,
    is_trivial,
    normalize,
    pre_dual,
    reconstruct_dagger_compact,
    sharp_effect,
    sharp_state_dagger,
)
from .dilation import DilationStructure, connecting_iso, cpm_purification, extend_state_dagger, purify
from .instances import CpmInstance, MatInstance, RelInstance, make_instance, oracle_adjoint
from .kernels import KernelPresentation, cokernel, kernel, pure_exclusion_witness, sharp_from_kernels
from .numeric import ScalarKind, Tolerance
from .report import VerificationReport, emit_report
from .state_dagger import StateDagger, conjugate_transpose, derive_dagger, derive_global_dagger, standard_duals
from .theory import I, Morphism, Sampler, SystemObject, compose, tensor

__all__ = [
    "ReconstructionError", "ReconstructionResult", "is_pure", "is_trivial", "normalize", "pre_dual",
    "reconstruct_dagger_compact", "sharp_effect", "sharp_state_dagger",
    "DilationStructure", "connecting_iso", "cpm_purification", "extend_state_dagger", "purify",
    "CpmInstance", "MatInstance", "RelInstance", "make_instance", "oracle_adjoint",
    "KernelPresentation", "cokernel", "kernel", "pure_exclusion_witness", "sharp_from_kernels",
    "ScalarKind", "Tolerance", "VerificationReport", "emit_report",
    "StateDagger", "conjugate_transpose", "derive_dagger", "derive_global_dagger", "standard_duals",
    "I", "Morphism", "Sampler", "SystemObject", "compose", "tensor",
]

"""Maximum likelihood degrees of sparse polynomial models via mixed volumes and polyhedral homotopy."""

__version__ = "0.1.0"

from .core import (
    Coefficient,
    DataVector,
    PolynomialSystem,
    SparsePolynomial,
    SystemFormatError,
    parse_document,
    parse_system,
    serialize_system,
)
from .faces import Case, FaceCase, KernelCertificate, case3_kernel_certificate, classify_face, scan_weight_vectors
from .mixed_volume import MixedVolumeDisagreement, mixed_cells, mixed_volume_ie
from .ml_system import MLSystem, build_ml_system, hat, lambda_rescale, ml_degree_mixed_volume
from .polytope import LatticePolytope, exposed_face, initial_polynomial, newton_polytope
from .solver import SolveReport, TrackerConfig, solve_ml_system, solve_system, verify_torus_membership

__all__ = [
    "Case", "Coefficient", "DataVector", "FaceCase", "KernelCertificate", "LatticePolytope", "MLSystem",
    "MixedVolumeDisagreement", "PolynomialSystem", "SolveReport", "SparsePolynomial", "SystemFormatError",
    "TrackerConfig", "build_ml_system", "case3_kernel_certificate", "classify_face", "exposed_face", "hat",
    "initial_polynomial", "lambda_rescale", "ml_degree_mixed_volume", "mixed_cells",
    "mixed_volume_ie", "newton_polytope", "parse_document", "parse_system", "scan_weight_vectors",
    "serialize_system", "solve_ml_system", "solve_system", "verify_torus_membership",
]

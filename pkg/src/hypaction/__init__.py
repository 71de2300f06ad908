"""Exact chain calculus on Cayley graphs of hyperbolic groups."""

from .analysis import (
    DecayFit,
    PSelection,
    estimate_upsilon,
    fit_f_decay,
    fit_h_decay,
    rho_fitter,
    select_p,
    tail_bound,
)
from .bicombing import Bicombing
from .cayley import (
    CayleyBall,
    CertReport,
    ball_around,
    build_ball,
    certify_delta,
    distance,
    gromov_product,
    sphere,
)
from .chains import (
    add,
    coefficient_sum,
    dirac,
    norm_1,
    norm_p,
    scale,
    sub,
    support,
    translate,
)
from .cocycle import Cocycle, CocycleResult, IdentityReport, pi_apply
from .flowers import ChainEngine, FlowerSet, NormalizedChain
from .groups import (
    ExplicitBallSpec,
    FreeGroupSpec,
    FreeProductSpec,
    Generator,
    GroupSpec,
    Word,
    ball_from_json,
    ball_to_json,
    load_ball_file,
    spec_from_descriptor,
)

__version__ = "0.1.0"

__all__ = [
    "Bicombing",
    "CayleyBall",
    "CertReport",
    "ChainEngine",
    "Cocycle",
    "CocycleResult",
    "DecayFit",
    "ExplicitBallSpec",
    "FlowerSet",
    "FreeGroupSpec",
    "FreeProductSpec",
    "Generator",
    "GroupSpec",
    "IdentityReport",
    "NormalizedChain",
    "PSelection",
    "Word",
    "add",
    "ball_around",
    "ball_from_json",
    "ball_to_json",
    "build_ball",
    "certify_delta",
    "coefficient_sum",
    "dirac",
    "distance",
    "estimate_upsilon",
    "fit_f_decay",
    "fit_h_decay",
    "gromov_product",
    "load_ball_file",
    "norm_1",
    "norm_p",
    "pi_apply",
    "rho_fitter",
    "scale",
    "select_p",
    "spec_from_descriptor",
    "sphere",
    "sub",
    "support",
    "tail_bound",
    "translate",
]

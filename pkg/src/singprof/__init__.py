"""Singular boundary profiles of -Laplace(u) = u^q on the half-space.

Computes the angular profile of separable singular solutions by shooting on
the spherical ODE reduction, classifies existence/uniqueness regimes,
cross-checks the profile against an independent variational minimizer and an
N=2 quadrature oracle, and evaluates every integral identity exact solutions
must satisfy.
"""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    Params,
    CriticalExponents,
    RegimeReport,
    Existence,
    Uniqueness,
    critical_exponents,
    ell_coeff,
    classify,
    cap_nonexistence,
)
from .ivp import Trajectory, TrajectoryStatus, integrate, first_zero_of  # noqa: F401
from .shoot import (  # noqa: F401
    ProfileSolution,
    NoRootError,
    MultipleRootsError,
    solve_profile,
    count_bvp_roots,
    quadrature_oracle_2d,
    eval_separable,
)
from .variational import (  # noqa: F401
    DiscreteProfile,
    LambdaEstimate,
    minimize_profile,
    lambda_cap,
    dirichlet_eigenvalue_half_sphere,
)
from .invariants import (  # noqa: F401
    PohozaevReport,
    EnergyTrace,
    InvariantReport,
    pohozaev,
    identity_91,
    energy_trace,
    wronskian_J,
    phase_plane_check,
    z_transform_check,
    full_report,
)
from .critical import (  # noqa: F401
    KappaResult,
    LinearODESpec,
    DecayODESpec,
    kappa,
    eval_critical_profile,
    check_lemma_2_3,
    check_lemma_2_1,
)

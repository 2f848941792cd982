"""Open-system density-operator dynamics, invariant sets, and Lyapunov
stability certificates on truncated Fock spaces."""

from .config import DEFAULT_TOLS, Tolerances
from .hilbert import (
    DensityOperator,
    Operator,
    StateVector,
    annihilation_op,
    cat_basis,
    coherent_state,
    creation_op,
    expectation,
    fock_state,
    identity_op,
    number_op,
    pure_density,
    random_density,
    trace_distance,
    trace_norm,
)
from .lindblad import (
    SystemModel,
    Superoperator,
    heisenberg_generator,
    liouvillian_matrix,
    schrodinger_generator,
)
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    evolve_density,
    evolve_exponential,
    evolve_observable,
)
from .steady import (
    DistanceConfig,
    FixedPointBasis,
    InvariantSet,
    dark_subspace,
    distance_to_set,
    fixed_point_basis,
    invariant_set,
    is_invariant,
)
from .certify import (
    CertifyConfig,
    LyapunovCandidate,
    SamplerConfig,
    StabilityReport,
    asymptotic_check,
    classify,
    default_candidates,
    estimate_kappa,
    exponential_check,
    floor_check,
    lyapunov_check,
)

__version__ = "0.1.0"

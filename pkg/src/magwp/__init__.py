"""Structure-preserving time integration for variational Gaussian wave
packets under magnetic Schroedinger Hamiltonians.

The package provides Hagedorn packet types with their canonical phase-space
vectorization, Gauss-Hermite averaged potentials, a staggered Boris pusher
and its splitting form, explicit symplectic splitting integrators of orders
two and four built on a partitioned Runge-Kutta magnetic substep, invariant
monitors, and a CLI that reproduces the reference experiments.
"""

__version__ = "0.1.0"

from .averaging import (
    AveragedBundle,
    QuadratureRule,
    apply_JABT,
    assemble_AB,
    assemble_JAB,
    avg_bundle,
    backend,
    boris_fields,
    energy,
    grad_VB,
    hermite_rule,
    position_nodes,
)
from .config import RunConfig, fixture_names, fixture_path, load_config
from .driver import compare, convergence, run
from .errors import (
    BadParams,
    ConfigError,
    DimensionMismatch,
    GridMismatch,
    MagwpError,
    NotPositiveDefinite,
    NotSkew,
    NotSymplectic,
    StepTooLarge,
    TimeDependentUnsupported,
    UnknownBuiltin,
    ZeroWeight,
)
from .fields import FieldSet, builtin_ids, eval_bundle, make_builtin
from .integrators import (
    HEUN,
    RK4,
    ButcherPair,
    boris_init,
    boris_splitting_step,
    boris_step,
    kinetic_substep,
    magnetic_substep_prk,
    make_partner_tableau,
    momentum_map,
    order4_step,
    phase_step,
    potential_substep,
    rho_matrix,
    strang_step,
    to_canonical,
    to_kinetic,
)
from .invariants import (
    InvariantMonitor,
    InvariantReport,
    angular_momentum_form,
    angular_momentum_matrix,
    monitor,
)
from .packets import (
    CanonicalState,
    GaussianPacket,
    KineticState,
    WignerMoments,
    devectorize,
    kinetic_residual,
    symplecticity_residual,
    vectorize,
    wigner_moments,
)

"""Numerical verification laboratory for the critical Lane-Emden system.

Radial ground states of

    -Delta u = v^p,   -Delta v = u^q,   u, v > 0 on R^N,

with (p, q) on the critical hyperbola 1/(p+1) + 1/(q+1) = (N-2)/N, computed by
shooting, together with channel-by-channel analysis of the linearized system
(connection coefficients and a Nystrom eigenproblem cross-check), Pohozaev-type
identity certification, decay-law fits, and a CLI orchestrator.
"""

from emdenlab.acceptance import AcceptanceContext, run_all, verify_suite
from emdenlab.channels import (
    ChannelSolution,
    integrate_linearized,
    kernel_nullity_shooting,
    known_generators,
    monotonicity_check,
)
from emdenlab.grids import RadialGrid
from emdenlab.ground_state import (
    CacheCorruptionError,
    GroundStateProfile,
    fit_decay,
    load_profile,
    save_profile,
    shoot_bisection,
)
from emdenlab.hyperbola import (
    BootstrapResult,
    CriticalPair,
    InequalityReport,
    Regime,
    check_inequality_lemma,
    decay_bootstrap,
    pair_from_p,
    scaling_exponent_identity,
)
from emdenlab.identities import (
    channel1_exactness,
    check_poho_identity,
    energy_norm,
    poho_table,
)
from emdenlab.pipeline import (
    RunConfig,
    SweepManifest,
    emit_plot_data,
    load_config,
    run,
)
from emdenlab.spectral import channel_nullity_spectral

__version__ = "0.1.0"

__all__ = [
    "AcceptanceContext",
    "BootstrapResult",
    "CacheCorruptionError",
    "ChannelSolution",
    "CriticalPair",
    "GroundStateProfile",
    "InequalityReport",
    "RadialGrid",
    "Regime",
    "RunConfig",
    "SweepManifest",
    "channel1_exactness",
    "channel_nullity_spectral",
    "check_inequality_lemma",
    "check_poho_identity",
    "decay_bootstrap",
    "emit_plot_data",
    "energy_norm",
    "fit_decay",
    "integrate_linearized",
    "kernel_nullity_shooting",
    "known_generators",
    "load_config",
    "load_profile",
    "monotonicity_check",
    "pair_from_p",
    "poho_table",
    "run",
    "run_all",
    "save_profile",
    "scaling_exponent_identity",
    "shoot_bisection",
    "verify_suite",
    "__version__",
]

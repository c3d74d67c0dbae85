"""Point-vortex dynamics in bounded and exterior planar domains.

Modules
-------
complexmap
    Holomorphic maps, derivatives and the map sanity report.
greens
    Green and Robin functions, harmonic measures and fields.
dynamics
    Vortex velocities, the Kirchhoff-Routh energy and trajectories.
regularization
    Cutoff kernels, the regularized flow and the stopping time.
measure
    Monte Carlo ensembles and numerical inequality checks.
cli
    Command-line front end.
"""

__version__ = "0.1.0"

from .complexmap import (  # noqa: E402
    DiskAutomorphism,
    HolomorphicMap,
    Identity,
    Inverse,
    Inversion,
    MapSanityReport,
    Polynomial,
    map_sanity_report,
)
from .domain import DomainModel  # noqa: E402
from .dynamics import (  # noqa: E402
    Trajectory,
    VortexConfiguration,
    circulation_coefficients,
    flow_jacobian,
    hamiltonian,
    integrate,
    min_separation,
    vortex_velocity,
)
from .integrators import IntegratorOptions  # noqa: E402

__all__ = [
    "__version__",
    "DiskAutomorphism",
    "DomainModel",
    "HolomorphicMap",
    "Identity",
    "IntegratorOptions",
    "Inverse",
    "Inversion",
    "MapSanityReport",
    "Polynomial",
    "Trajectory",
    "VortexConfiguration",
    "circulation_coefficients",
    "flow_jacobian",
    "hamiltonian",
    "integrate",
    "map_sanity_report",
    "min_separation",
    "vortex_velocity",
]

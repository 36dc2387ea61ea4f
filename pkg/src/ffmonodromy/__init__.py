"""Monodromy of focus-focus fibrations computed by several independent routes."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .models import (  # noqa: F401
    PendulumPotential,
    PhasePoint,
    builtin_system,
    classify_singular_point,
    linear_focus_focus_model,
    pendulum_system,
    singular_fiber_census,
)
from .dynamics import FlowSpec, flow  # noqa: F401
from .lattice import PeriodLatticeBasis, period_lattice, s1_coefficients  # noqa: F401
from .monodromy import (  # noqa: F401
    MonodromyMatrix,
    ValueLoop,
    compose_loops,
    continue_lattice,
    embed_3dof,
    monodromy_from_count,
    monodromy_signed,
)
from .dh import DHProfile, dh_check, dh_profile  # noqa: F401
from .affine import AffineComplex, affine_transport, cut_plane_model  # noqa: F401
from .bohr_sommerfeld import BSLattice, bs_lattice, lattice_defect  # noqa: F401

"""Interior-penalty DG solver for the Cahn-Hilliard-Navier-Stokes system with a
convex-concave splitting time discretization, plus verification tooling."""

from .diagnostics import (EnergyReport, coercivity_constants, dg_norm, discrete_energy,
                          elementwise_mass_balance, estimate_coercivity, estimate_infsup,
                          total_mass)
from .dgspace import DgScalarSpace, DgVectorSpace, FieldCoefficients, eval_field, l2_project
from .forms import Discretization, default_sigma
from .mesh import Mesh, MeshError, build_mesh, load_mesh, save_mesh, structured_unit_square
from .potential import Potential
from .projections import Analytic, EllipticProjector, SingularSystemError, elliptic_project
from .stepper import Forcing, NewtonDivergence, SchemeParams, Stepper, TimeStepState

__version__ = "0.1.0"

"""Verification and discovery of linear and quadratic first integrals of planar potentials."""
from . import ad, catalog, discovery, dynamics, fields, functions, integrals, solutions
from .catalog import instantiate, list_entries
from .dynamics import State, Trajectory, integrate
from .fields import PotentialSpec
from .integrals import FirstIntegral, TimeTerm
from .solutions import closed_form_solution

__version__ = "0.1.0"
BACKEND = ad.BACKEND

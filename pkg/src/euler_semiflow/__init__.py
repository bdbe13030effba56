"""Maximal dissipative solutions of the 1D complete Euler system and their semiflow selection."""

__version__ = "0.1.0"

from .equilibrium import EquilibriumState, equilibrium_state, maximizer_audit, equilibrium_stability_audit
from .errors import *  # noqa: F401,F403
from .riemann import RiemannDatum, solve_riemann, solve_expansion_shock, riemann_exact
from .selection import (
    SelectionParams,
    laplace_functional,
    beta_entropy,
    sieve_select,
    order_sigma,
    order_dafermos,
    order_F,
    dichotomy_audit,
    separation_audit,
    semiflow_audit,
)
from .solver import SchemeConfig, SolutionSet, simulate, generate_candidates
from .state import Grid, FluidState, DefectState, Snapshot, InitialDatum
from .thermo import GasConstants, pressure, pressure_hessian
from .trajectory import Trajectory, evaluate, time_shift, concatenate, l1loc_distance, check_trajectory

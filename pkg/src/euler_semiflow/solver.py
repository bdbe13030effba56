"""First-order finite-volume candidates for the Euler system on a walled slab.

The inviscid update is conservative in (rho, m, E) with mirror ghost cells at
both walls (``m . n = 0``), explicit Euler in time under a CFL bound.  An
optional artificial viscosity ``epsilon * d2u/dx2`` acts on the velocity
through a backward-Euler substep that keeps the internal energy of each cell
fixed, so viscosity only removes kinetic energy.  The energy it removes is put
back into a spatially uniform internal-energy defect, which closes the budget
``energy + defects = E0`` at every node.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from . import thermo
from .errors import (
    CandidateGenerationError,
    CFLError,
    DatumMismatchError,
    DomainError,
    EntropyFloorError,
    EulerSemiflowError,
    VacuumError,
)
from .riemann import as_riemann_datum, riemann_exact_trajectory, riemann_nonentropy
from .state import DefectState, FluidState, Grid, InitialDatum, Snapshot
from .thermo import GasConstants
from .trajectory import Trajectory

logger = logging.getLogger(__name__)

SCHEMES = ("lax_friedrichs", "rusanov", "hllc")
VACUUM_FLOOR = 1e-12
ENTROPY_FLOOR_TOL = 1e-10


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "hllc"
    epsilon: float = 0.0
    cfl: float = 0.5
    N: int = 200
    L: float = 1.0
    t_end: float = 0.2
    dt_out: float = 0.01

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not 0 < self.cfl < 1:
            raise DomainError("CFL number must lie in (0, 1)")
        if self.N < 4:
            raise DomainError("at least 4 cells are required")
        if self.epsilon < 0:
            raise DomainError("viscosity must be nonnegative")
        if self.t_end <= 0 or self.dt_out <= 0:
            raise DomainError("horizon and output cadence must be positive")
        n = self.t_end / self.dt_out
        if abs(n - round(n)) > 1e-9 * max(n, 1.0):
            raise DomainError("t_end must be an integer multiple of dt_out")

    @property
    def n_out(self) -> int:
        return int(round(self.t_end / self.dt_out))

    @property
    def grid(self) -> Grid:
        return Grid(self.N, self.L)

    @property
    def label(self) -> str:
        return f"{self.scheme}-eps{self.epsilon:g}-N{self.N}-cfl{self.cfl:g}"


# -- fluxes --------------------------------------------------------------------


def _primitives(U: np.ndarray, gas: GasConstants):
    rho, m, E = U
    u = m / rho
    p = (gas.gamma - 1.0) * (E - 0.5 * m * u)
    return rho, u, p


def _physical_flux(U, u, p):
    rho, m, E = U
    return np.array([m, m * u + p, (E + p) * u])


def _with_ghosts(U: np.ndarray) -> np.ndarray:
    """Mirror ghost cells: same rho and E, negated momentum."""
    left = U[:, :1] * np.array([[1.0], [-1.0], [1.0]])
    right = U[:, -1:] * np.array([[1.0], [-1.0], [1.0]])
    return np.concatenate([left, U, right], axis=1)


def _face_states(U: np.ndarray, gas: GasConstants):
    G = _with_ghosts(U)
    UL, UR = G[:, :-1], G[:, 1:]
    rl, ul, pl = _primitives(UL, gas)
    rr, ur, pr = _primitives(UR, gas)
    cl = np.sqrt(gas.gamma * pl / rl)
    cr = np.sqrt(gas.gamma * pr / rr)
    return UL, UR, (rl, ul, pl, cl), (rr, ur, pr, cr)


def _seal_walls(F: np.ndarray) -> np.ndarray:
    """Walls pass momentum only; mirror symmetry gives this up to round-off."""
    F[0, [0, -1]] = 0.0
    F[2, [0, -1]] = 0.0
    return F


def lax_friedrichs_flux(U, gas, dt, dx):
    UL, UR, (rl, ul, pl, _), (rr, ur, pr, _) = _face_states(U, gas)
    FL, FR = _physical_flux(UL, ul, pl), _physical_flux(UR, ur, pr)
    return _seal_walls(0.5 * (FL + FR) - 0.5 * dx / dt * (UR - UL))


def rusanov_flux(U, gas, dt, dx):
    UL, UR, (rl, ul, pl, cl), (rr, ur, pr, cr) = _face_states(U, gas)
    FL, FR = _physical_flux(UL, ul, pl), _physical_flux(UR, ur, pr)
    a = np.maximum(np.abs(ul) + cl, np.abs(ur) + cr)
    return _seal_walls(0.5 * (FL + FR) - 0.5 * a * (UR - UL))


def hllc_flux(U, gas, dt, dx):
    UL, UR, (rl, ul, pl, cl), (rr, ur, pr, cr) = _face_states(U, gas)
    FL, FR = _physical_flux(UL, ul, pl), _physical_flux(UR, ur, pr)
    # Davis wave-speed bounds
    sl = np.minimum(ul - cl, ur - cr)
    sr = np.maximum(ul + cl, ur + cr)
    ml = rl * (sl - ul)
    mr = rr * (sr - ur)
    s_star = (pr - pl + ul * ml - ur * mr) / (ml - mr)

    def star(Uk, rk, uk, pk, sk):
        coef = rk * (sk - uk) / (sk - s_star)
        energy = Uk[2] / rk + (s_star - uk) * (s_star + pk / (rk * (sk - uk)))
        return coef * np.array([np.ones_like(rk), s_star, energy])

    FsL = FL + sl * (star(UL, rl, ul, pl, sl) - UL)
    FsR = FR + sr * (star(UR, rr, ur, pr, sr) - UR)
    return _seal_walls(np.where(sl >= 0, FL, np.where(s_star >= 0, FsL, np.where(sr > 0, FsR, FR))))


_FLUXES = {"lax_friedrichs": lax_friedrichs_flux, "rusanov": rusanov_flux, "hllc": hllc_flux}


def _viscous_substep(rho, m, dt, eps, dx):
    """Backward Euler for ``rho du/dt = eps d2u/dx2`` with ``u = 0`` at the walls."""
    N = len(rho)
    k = eps / dx**2
    ab = np.zeros((3, N))
    ab[0, 1:] = -k
    ab[1, :] = rho / dt + 2.0 * k
    ab[1, 0] += k
    ab[1, -1] += k
    ab[2, :-1] = -k
    u = solve_banded((1, 1), ab, m / dt)
    return rho * u


def _state_from_conserved(U, grid, gas) -> FluidState:
    rho, m, E = U
    return FluidState(grid, rho, m, thermo.entropy_from_conserved(rho, m, E, gas))


def _check_physical(U, gas, t):
    rho, m, E = U
    if np.any(~np.isfinite(U)):
        raise VacuumError(f"non-finite state at t={t:.6g}")
    if np.min(rho) < VACUUM_FLOOR:
        raise VacuumError(f"density {np.min(rho):.3e} below vacuum floor at t={t:.6g}")
    if np.min(E - 0.5 * m**2 / rho) <= VACUUM_FLOOR:
        raise VacuumError(f"internal energy collapsed at t={t:.6g}")


def simulate(datum: InitialDatum, cfg: SchemeConfig, gas: GasConstants = GasConstants()) -> Trajectory:
    """Run one scheme from ``datum`` and return the sampled dissipative trajectory."""
    grid = datum.grid
    if grid != cfg.grid:
        raise DomainError(f"datum grid {grid} differs from configured grid {cfg.grid}")
    datum.validate(gas)
    if np.min(datum.state.rho) <= VACUUM_FLOOR:
        raise VacuumError("the scheme needs a strictly positive initial density")
    flux = _FLUXES[cfg.scheme]
    dx = grid.dx
    st = datum.state
    U = np.array([st.rho, st.m, st.energy_density(gas)])

    first = datum.initial_snapshot(gas)
    c_int = float(first.defects.C_int[0]) if grid.N else 0.0
    snaps = [first]
    entropy_prev = st.total_entropy()
    worst_entropy_drop = 0.0
    n_steps = 0

    for k in range(1, cfg.n_out + 1):
        tau = 0.0
        while tau < cfg.dt_out:
            rho, u, p = _primitives(U, gas)
            amax = float(np.max(np.abs(u) + np.sqrt(gas.gamma * p / rho)))
            dt = cfg.cfl * dx / amax
            if dt < 1e-14 * cfg.dt_out:
                raise CFLError(f"time step {dt:.3e} underflows at t={(k - 1) * cfg.dt_out + tau:.6g}")
            last = tau + dt >= cfg.dt_out * (1.0 - 1e-12)
            if last:
                dt = cfg.dt_out - tau
            F = flux(U, gas, dt, dx)
            U = U - dt / dx * (F[:, 1:] - F[:, :-1])
            t_now = (k - 1) * cfg.dt_out + tau + dt
            _check_physical(U, gas, t_now)
            if cfg.epsilon > 0:
                rho, m, E = U
                m_new = _viscous_substep(rho, m, dt, cfg.epsilon, dx)
                U = np.array([rho, m_new, E - 0.5 * m**2 / rho + 0.5 * m_new**2 / rho])
            tau = cfg.dt_out if last else tau + dt
            n_steps += 1

            state = _state_from_conserved(U, grid, gas)
            floor = state.min_entropy_violation(gas)
            if floor > ENTROPY_FLOOR_TOL:
                raise EntropyFloorError(f"S < s0*rho by {floor:.3e} at t={t_now:.6g}")
            entropy = state.total_entropy()
            worst_entropy_drop = max(worst_entropy_drop, entropy_prev - entropy)
            entropy_prev = entropy

        energy = state.total_energy(gas)
        # uniform defect h(t) >= 0 restoring energy + defects = E0
        h = max(0.0, datum.E0 - energy - c_int * grid.L) / grid.L
        c_int += h
        snaps.append(Snapshot(state, DefectState.internal(np.full(grid.N, c_int))))

    meta = {
        "kind": "scheme",
        "scheme": cfg.scheme,
        "epsilon": cfg.epsilon,
        "cfl": cfg.cfl,
        "admissible": True,
        "steps": n_steps,
        "max_entropy_decrease": worst_entropy_drop,
    }
    logger.debug("%s: %d steps, worst entropy decrease %.3e", cfg.label, n_steps, worst_entropy_drop)
    return Trajectory.right_continuous(datum, np.arange(cfg.n_out + 1), cfg.dt_out, snaps, cfg.label, gas, meta)


# -- candidate families ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SolutionSet:
    """Finite family of trajectories sharing one datum."""

    datum: InitialDatum
    trajectories: tuple[Trajectory, ...]
    failures: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        for tr in self.trajectories:
            if not tr.datum.equals(self.datum):
                raise DatumMismatchError(f"trajectory {tr.id} has a different datum")

    def __len__(self):
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.trajectories]

    def by_id(self, id_: str) -> Trajectory:
        for t in self.trajectories:
            if t.id == id_:
                return t
        raise KeyError(id_)


def _run_member(datum, cfg, gas):
    try:
        return simulate(datum, cfg, gas), None
    except EulerSemiflowError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def generate_candidates(
    datum: InitialDatum,
    suite: Sequence[SchemeConfig],
    gas: GasConstants = GasConstants(),
    *,
    closed_form: bool = True,
    max_workers: int | None = None,
) -> SolutionSet:
    """Run every scheme in ``suite`` and add closed-form Riemann candidates if applicable.

    Member failures are recorded in ``SolutionSet.failures``; only a complete
    failure raises.
    """
    if not suite:
        raise DomainError("the scheme suite is empty")
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            results = list(pool.map(lambda c: _run_member(datum, c, gas), suite))
    else:
        results = [_run_member(datum, c, gas) for c in suite]

    trajectories, failures = [], {}
    for cfg, (traj, err) in zip(suite, results):
        if traj is None:
            failures[cfg.label] = err
        else:
            trajectories.append(traj)

    riemann = as_riemann_datum(datum) if closed_form else None
    if riemann is not None:
        rd, x0 = riemann
        ref = suite[0]
        for build in (riemann_exact_trajectory, riemann_nonentropy):
            try:
                trajectories.append(build(rd, datum, ref.n_out, ref.dt_out, gas, x0))
            except EulerSemiflowError as exc:
                failures[build.__name__] = f"{type(exc).__name__}: {exc}"

    if not trajectories:
        raise CandidateGenerationError(f"every candidate failed: {failures}")
    return SolutionSet(datum, trajectories, failures)


def default_suite(N: int, t_end: float, dt_out: float, L: float = 1.0, cfl: float = 0.5) -> list[SchemeConfig]:
    return [SchemeConfig(s, 0.0, cfl, N, L, t_end, dt_out) for s in SCHEMES]


def with_horizon(suite: Sequence[SchemeConfig], t_end: float) -> list[SchemeConfig]:
    return [replace(c, t_end=t_end) for c in suite]


# -- data presets ----------------------------------------------------------------


def equilibrium_datum(grid: Grid, gas: GasConstants = GasConstants(), rho: float = 1.0, S: float = 0.0) -> InitialDatum:
    return InitialDatum.from_state(FluidState.constant(grid, rho, 0.0, S), gas)


def smooth_bump_datum(
    grid: Grid, gas: GasConstants = GasConstants(), amplitude: float = 0.1, width: float = 0.1
) -> InitialDatum:
    """Isentropic (``s = 0``) density bump at rest, smooth well before shock formation."""
    x = grid.centers
    rho = 1.0 + amplitude * np.exp(-(((x - 0.5 * grid.L) / width) ** 2))
    return InitialDatum.from_state(FluidState(grid, rho, np.zeros(grid.N), np.zeros(grid.N)), gas)


def sod_datum(grid: Grid, gas: GasConstants = GasConstants()) -> InitialDatum:
    from .riemann import RiemannDatum, riemann_initial_datum

    return riemann_initial_datum(RiemannDatum((1.0, 0.0, 1.0), (0.125, 0.0, 0.1)), grid, gas)

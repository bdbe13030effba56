"""Piecewise-sampled trajectories of bounded variation in time.

A :class:`Trajectory` stores one-sided snapshots at node times
``t_k = ticks[k] * time_unit``.  Node times are integer multiples of a common
time unit (the output cadence), so shifting and gluing act on integers and
the algebraic identities

    time_shift(time_shift(x, a), b) == time_shift(x, a + b)
    concatenate(x, T, time_shift(x, T)) == x

hold node for node, without floating-point drift.

Between nodes the trajectory is read piecewise constant (the right value of
the last node); time integrals use the linear interpolant between
``x(t_k+)`` and ``x(t_{k+1}-)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import ContinuationError, DomainError, GridMismatchError, HorizonError
from .state import DefectState, FluidState, Grid, InitialDatum, Snapshot, negative_norm
from .thermo import GasConstants

Side = Literal["left", "right"]
_TICK_RTOL = 1e-9


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    datum: InitialDatum
    ticks: np.ndarray
    time_unit: float
    left: tuple[Snapshot, ...]
    right: tuple[Snapshot, ...]
    id: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ticks = np.array(self.ticks, dtype=np.int64)
        ticks.setflags(write=False)
        object.__setattr__(self, "ticks", ticks)
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        if self.time_unit <= 0:
            raise DomainError("time unit must be positive")
        if len(ticks) == 0 or ticks[0] != 0:
            raise DomainError("trajectories start with a node at t = 0")
        if np.any(np.diff(ticks) <= 0):
            raise DomainError("node times must be strictly increasing")
        if not (len(self.left) == len(self.right) == len(ticks)):
            raise DomainError("one left and one right snapshot per node")
        grid = self.datum.grid
        for a, b in zip(self.left, self.right):
            if a.state.grid != grid or b.state.grid != grid:
                raise GridMismatchError("snapshot grid differs from datum grid")
            # only S and the defects may jump
            if not (np.array_equal(a.state.rho, b.state.rho) and np.array_equal(a.state.m, b.state.m)):
                raise DomainError("density and momentum must be continuous across nodes")
        if not self.left[0].state.equals(self.datum.state):
            raise DomainError("the left value at t = 0 must be the initial datum")

    # -- construction helpers ------------------------------------------------

    @classmethod
    def right_continuous(
        cls,
        datum: InitialDatum,
        ticks: Sequence[int],
        time_unit: float,
        snapshots: Sequence[Snapshot],
        id: str,
        gas: GasConstants,
        meta: dict | None = None,
    ) -> "Trajectory":
        """Trajectory without jumps except possibly at ``t = 0`` (left value = datum)."""
        left = [datum.initial_snapshot(gas), *snapshots[1:]]
        return cls(datum, np.asarray(ticks), time_unit, left, list(snapshots), id, dict(meta or {}))

    # -- basic accessors -----------------------------------------------------

    @property
    def grid(self) -> Grid:
        return self.datum.grid

    @property
    def E0(self) -> float:
        return self.datum.E0

    @property
    def times(self) -> np.ndarray:
        return self.ticks * self.time_unit

    @property
    def horizon(self) -> float:
        return float(self.ticks[-1] * self.time_unit)

    def __len__(self) -> int:
        return len(self.ticks)

    def node_index(self, t: float) -> int | None:
        """Index of the node at time ``t`` (up to rounding), or None."""
        k = self.tick_of(t, strict=False)
        if k is None:
            return None
        i = int(np.searchsorted(self.ticks, k))
        if i < len(self.ticks) and self.ticks[i] == k:
            return i
        return None

    def tick_of(self, t: float, strict: bool = True) -> int | None:
        k = round(t / self.time_unit)
        if abs(t - k * self.time_unit) <= _TICK_RTOL * self.time_unit:
            return int(k)
        if strict:
            raise DomainError(f"time {t} is not a multiple of the time unit {self.time_unit}")
        return None

    def same_nodes(self, other: "Trajectory") -> bool:
        """Node-for-node identity of times and one-sided snapshots."""
        return (
            self.time_unit == other.time_unit
            and np.array_equal(self.ticks, other.ticks)
            and all(a.equals(b) for a, b in zip(self.left, other.left))
            and all(a.equals(b) for a, b in zip(self.right, other.right))
        )

    def at(self, t: float, side: Side = "right") -> Snapshot:
        return evaluate(self, t, side)


def evaluate(traj: Trajectory, t: float, side: Side = "right") -> Snapshot:
    """One-sided value ``traj(t+)`` or ``traj(t-)``."""
    _check_side(side)
    if t < 0:
        raise HorizonError(f"negative time {t}")
    i = traj.node_index(t)
    if i is not None:
        return traj.left[i] if side == "left" else traj.right[i]
    if t > traj.horizon:
        raise HorizonError(f"t={t} lies beyond the horizon {traj.horizon}")
    j = int(np.searchsorted(traj.times, t, side="right")) - 1
    return traj.right[j]


def _base_id(id_: str) -> str:
    return id_.split("@", 1)[0]


def time_shift(traj: Trajectory, T: float) -> Trajectory:
    """The shifted trajectory ``t -> traj(T + t)`` (one-sided values preserved).

    The new datum is ``traj(T-)``; ``T`` must be a multiple of the time unit.
    """
    if T <= 0:
        raise DomainError("shift must be positive")
    k = traj.tick_of(T)
    if k >= traj.ticks[-1]:
        raise HorizonError(f"shift {T} reaches the horizon {traj.horizon}")
    i = int(np.searchsorted(traj.ticks, k))
    if traj.ticks[i] == k:
        ticks = traj.ticks[i:] - k
        left = traj.left[i:]
        right = traj.right[i:]
    else:
        mid = traj.right[i - 1]
        ticks = np.concatenate([[0], traj.ticks[i:] - k])
        left = (mid, *traj.left[i:])
        right = (mid, *traj.right[i:])
    datum = InitialDatum(left[0].state, traj.E0)
    total = traj.meta.get("shift_ticks", 0) + k
    meta = {**traj.meta, "shift_ticks": total}
    return Trajectory(datum, ticks, traj.time_unit, left, right, f"{_base_id(traj.id)}@{total}", meta)


def concatenate(first: Trajectory, T: float, second: Trajectory) -> Trajectory:
    """Continuation: ``first`` on ``[0, T)``, ``first(T-)`` at ``T-``, then ``second``."""
    if first.time_unit != second.time_unit:
        raise ContinuationError("trajectories use different time units")
    first.grid.check_same(second.grid)
    k = first.tick_of(T)
    if k <= 0 or k > first.ticks[-1]:
        raise HorizonError(f"gluing time {T} outside (0, {first.horizon}]")
    at_T = evaluate(first, T, "left")
    if not second.datum.state.equals(at_T.state) or second.E0 != first.E0:
        raise ContinuationError("datum of the continuation differs from first(T-)")
    n = int(np.searchsorted(first.ticks, k))
    ticks = np.concatenate([first.ticks[:n], [k], second.ticks[1:] + k])
    left = (*first.left[:n], at_T, *second.left[1:])
    right = (*first.right[:n], second.right[0], *second.right[1:])
    meta = {**first.meta, "continued_at_ticks": k}
    return Trajectory(first.datum, ticks, first.time_unit, left, right, f"{first.id}+{second.id}", meta)


def _block_mean(a: np.ndarray, factor: int) -> np.ndarray:
    return a.reshape(-1, factor).mean(axis=1)


def coarsen(traj: Trajectory, N: int, gas: GasConstants) -> Trajectory:
    """Cell averages of ``traj`` on the coarser grid with ``N`` cells.

    Averaging lowers the state energy (the energy is convex), and the lost
    amount is added uniformly to ``C_int``, which keeps the ledger closed.
    """
    fine = traj.grid
    if N <= 0 or fine.N % N:
        raise GridMismatchError(f"cannot coarsen {fine.N} cells to {N}")
    factor = fine.N // N
    grid = Grid(N, fine.L)

    def state(st: FluidState) -> FluidState:
        return FluidState(grid, *(_block_mean(f, factor) for f in (st.rho, st.m, st.S)))

    def snap(s: Snapshot) -> Snapshot:
        st = state(s.state)
        d = s.defects
        C_kin, C_int, cp, cm = (_block_mean(getattr(d, k), factor) for k in ("C_kin", "C_int", "c_plus", "c_minus"))
        lost = max(0.0, s.state.total_energy(gas) - st.total_energy(gas))
        return Snapshot(st, DefectState(C_kin, C_int + lost / grid.L, cp, cm))

    datum = InitialDatum(state(traj.datum.state), traj.E0)
    left = [snap(s) for s in traj.left]
    right = [snap(s) for s in traj.right]
    left[0] = Snapshot(datum.state, left[0].defects)
    meta = {**traj.meta, "coarsened_from": fine.N}
    return Trajectory(datum, traj.ticks, traj.time_unit, left, right, f"{traj.id}>N{N}", meta)


# -- integrals in time -------------------------------------------------------


def _merged_times(trajs: Sequence[Trajectory], horizon: float) -> np.ndarray:
    ts = np.unique(np.concatenate([tr.times for tr in trajs]))
    ts = ts[ts < horizon - _TICK_RTOL * max(horizon, 1.0)]
    return np.append(ts, horizon)


def _cumulative_linear(times: np.ndarray, plus: np.ndarray, minus: np.ndarray):
    """Cumulative integral of the piecewise-linear interpolant on each segment."""
    seg = 0.5 * (plus[:-1] + minus[1:]) * np.diff(times)
    return np.concatenate([[0.0], np.cumsum(seg)])


def _integral_up_to(times, plus, minus, cum, tau) -> float:
    if tau >= times[-1]:
        return float(cum[-1])
    j = int(np.searchsorted(times, tau, side="right")) - 1
    h = tau - times[j]
    width = times[j + 1] - times[j]
    a, b = plus[j], minus[j + 1]
    val_tau = a + (b - a) * h / width
    return float(cum[j] + 0.5 * (a + val_tau) * h)


def state_distance(a: FluidState, b: FluidState, weights=(1.0, 1.0, 1.0)) -> float:
    """Weighted sum of the negative-order norms of the three field differences."""
    a.grid.check_same(b.grid)
    diff = a.fields() - b.fields()
    return float(sum(w * negative_norm(a.grid, d) for w, d in zip(weights, diff)))


def l1loc_distance(
    first: Trajectory,
    second: Trajectory,
    horizon: float | None = None,
    weights=(1.0, 1.0, 1.0),
) -> float:
    """Metric of local-in-time L1 convergence in the negative-order state norm.

    ``sum_k 2**-k * min(1, int_0^{min(T, k)} ||x1(t) - x2(t)||_- dt)`` summed
    over ``k >= 1``; ``weights`` scale the (rho, m, S) components.
    """
    first.grid.check_same(second.grid)
    if horizon is None:
        horizon = min(first.horizon, second.horizon)
    if horizon > min(first.horizon, second.horizon) * (1 + _TICK_RTOL):
        raise HorizonError("distance horizon exceeds a trajectory horizon")
    if horizon <= 0:
        return 0.0
    times = _merged_times([first, second], horizon)
    plus = np.array([state_distance(evaluate(first, t).state, evaluate(second, t).state, weights) for t in times])
    minus = np.array(
        [
            state_distance(evaluate(first, t, "left").state, evaluate(second, t, "left").state, weights)
            for t in times
        ]
    )
    cum = _cumulative_linear(times, plus, minus)
    K = max(1, math.ceil(horizon))
    total = 0.0
    for k in range(1, K):
        total += 2.0**-k * min(1.0, _integral_up_to(times, plus, minus, cum, float(k)))
    total += 2.0 ** -(K - 1) * min(1.0, float(cum[-1]))
    return total


# -- entropy diagnostics -----------------------------------------------------


def entropy_production(traj: Trajectory, t: float, side: Side = "right") -> float:
    """``sigma(t+-) = int (S(t+-) - S0) dx``."""
    snap = evaluate(traj, t, side)
    return traj.grid.integrate(snap.state.S - traj.datum.state.S)


def total_entropy_series(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """``int S dx`` at every node, as (left, right) arrays."""
    g = traj.grid
    return (
        np.array([g.integrate(s.state.S) for s in traj.left]),
        np.array([g.integrate(s.state.S) for s in traj.right]),
    )


def renormalized_entropy_residual(
    traj: Trajectory,
    Z: Callable[[np.ndarray], np.ndarray],
    phi=None,
) -> float:
    """Most negative residual of the renormalized entropy inequality.

    For each node jump and each interval ``[t_k, t_{k+1}]`` the residual is

        [int rho Z(S/rho) phi]_{t_k-}^{t_{k+1}+} - int_{t_k}^{t_{k+1}} int Z(S/rho) m dphi/dx

    with the time integral by the trapezoid rule.  A dissipative trajectory
    gives residuals ``>= 0`` up to discretisation error.
    """
    grid = traj.grid
    phi = np.ones(grid.N) if phi is None else np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        raise DomainError("test function must be nonnegative")
    dphi = np.gradient(phi, grid.dx) if grid.N > 1 else np.zeros(1)

    def density(snap: Snapshot) -> float:
        st = snap.state
        return grid.integrate(st.rho * Z(st.S / st.rho) * phi)

    def flux(snap: Snapshot) -> float:
        st = snap.state
        return grid.integrate(Z(st.S / st.rho) * st.m * dphi)

    times = traj.times
    worst = math.inf
    for k in range(len(times)):
        worst = min(worst, density(traj.right[k]) - density(traj.left[k]))
        if k + 1 < len(times):
            dt = times[k + 1] - times[k]
            bracket = density(traj.right[k + 1]) - density(traj.left[k])
            f = 0.5 * dt * (flux(traj.right[k]) + flux(traj.left[k + 1]))
            worst = min(worst, bracket - f)
    return float(worst)


# -- invariant checks --------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_trajectory(traj: Trajectory, gas: GasConstants, rtol: float = 1e-10) -> list[CheckResult]:
    """Evaluate the structural invariants of a dissipative trajectory."""
    g = traj.grid
    results = []

    snaps = [*traj.left, *traj.right]
    budgets = np.array([s.energy_budget(gas) for s in snaps])
    err = float(np.max(np.abs(budgets - traj.E0))) if len(budgets) else 0.0
    results.append(
        CheckResult("energy_ledger", err <= rtol * abs(traj.E0), f"max |energy + defects - E0| = {err:.3e}")
    )

    masses = np.array([s.state.mass() for s in snaps])
    M0 = traj.datum.state.mass()
    drift = float(np.max(np.abs(masses - M0)))
    results.append(CheckResult("mass", drift <= 1e-13 * max(abs(M0), 1.0), f"max mass drift = {drift:.3e}"))

    left, right = total_entropy_series(traj)
    scale = max(1.0, float(np.max(np.abs(np.concatenate([left, right])))))
    seq = np.empty(2 * len(left))
    seq[0::2], seq[1::2] = left, right
    worst_drop = float(max(0.0, -np.min(np.diff(seq)))) if len(seq) > 1 else 0.0
    results.append(
        CheckResult("entropy_monotone", worst_drop <= rtol * scale, f"largest decrease of int S = {worst_drop:.3e}")
    )

    viol = max(s.state.min_entropy_violation(gas) for s in snaps)
    results.append(CheckResult("minimum_entropy", viol <= rtol, f"max (s0 rho - S) = {viol:.3e}"))

    problems = sorted({p for s in snaps for p in s.defects.check()})
    results.append(CheckResult("defects", not problems, "; ".join(problems) or "ok"))
    return results

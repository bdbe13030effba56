"""Constant equilibria: the entropy maximizer at fixed mass and energy, and its stability."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DatumMismatchError, DomainError
from .selection import SelectionParams, sieve_select
from .solver import SchemeConfig, generate_candidates
from .state import FluidState, Grid, InitialDatum, Snapshot, DefectState
from .thermo import GasConstants, internal_energy_density
from .trajectory import Trajectory, entropy_production, evaluate

SEED_ENV = "EULER_SEMIFLOW_SEED"


@dataclass(frozen=True)
class EquilibriumState:
    rho_bar: float
    S_bar: float
    E0: float
    M: float
    L: float

    def fluid_state(self, grid: Grid) -> FluidState:
        if not math.isclose(grid.L, self.L, rel_tol=1e-14):
            raise DomainError("grid length differs from the equilibrium domain")
        return FluidState.constant(grid, self.rho_bar, 0.0, self.S_bar)

    def datum(self, grid: Grid) -> InitialDatum:
        return InitialDatum(self.fluid_state(grid), self.E0)

    def total_entropy(self) -> float:
        return self.S_bar * self.L


def equilibrium_state(M: float, E0: float, L: float = 1.0, gas: GasConstants = GasConstants()) -> EquilibriumState:
    """Constant state of mass ``M`` and energy ``E0`` that maximizes total entropy."""
    if not (M > 0 and E0 > 0 and L > 0):
        raise DomainError("mass, energy and length must be positive")
    rho = M / L
    S = gas.c_v * rho * math.log(E0 / (gas.c_v * L * rho**gas.gamma))
    return EquilibriumState(rho, S, E0, M, L)


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "20240607"))


@dataclass(frozen=True)
class MaximizerAudit:
    min_gap: float
    violations: int
    skipped: int
    samples: int
    gaps: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _sample_fields(eq: EquilibriumState, grid: Grid, rng: np.random.Generator, gas: GasConstants):
    x = grid.centers / grid.L
    modes = rng.integers(1, 6, size=2)
    amp = rng.uniform(0.05, 0.9)
    rho = 1.0 + amp * np.cos(np.pi * modes[0] * x + rng.uniform(0, 2 * np.pi)) * rng.uniform(0.2, 1.0)
    rho = np.maximum(rho, 1e-3) + rng.uniform(0, 0.2, grid.N) * rng.uniform(0, 1)
    rho *= eq.M / grid.integrate(rho)
    s_shape = rng.uniform(-1.0, 1.0) * np.cos(np.pi * modes[1] * x) + rng.normal(0, 0.3, grid.N)
    base = rho * (eq.S_bar / eq.rho_bar + s_shape)

    def energy_gap(shift):
        return grid.integrate(internal_energy_density(rho, base + shift * rho, gas)) - eq.E0

    # energy increases with a uniform specific-entropy shift
    lo, hi = -1.0, 1.0
    while energy_gap(lo) > 0:
        lo *= 2
        if lo < -1e4:
            return None
    while energy_gap(hi) < 0:
        hi *= 2
        if hi > 1e4:
            return None
    shift = brentq(energy_gap, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps)
    return rho, base + shift * rho


def maximizer_audit(
    eq: EquilibriumState,
    samples: int = 1000,
    gas: GasConstants = GasConstants(),
    N: int = 64,
    seed: int | None = None,
    tol: float = 1e-10,
) -> MaximizerAudit:
    """Sample admissible nonconstant fields at the same mass and energy; none may beat ``S_bar``."""
    grid = Grid(N, eq.L)
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    target = eq.total_entropy()
    gaps, skipped = [], 0
    for _ in range(samples):
        try:
            fields = _sample_fields(eq, grid, rng, gas)
        except (ValueError, RuntimeError):
            fields = None
        if fields is None:
            skipped += 1
            continue
        rho, S = fields
        gaps.append(target - grid.integrate(S))
    gaps = np.array(gaps)
    violations = int(np.sum(gaps < -tol * max(1.0, abs(target))))
    min_gap = float(gaps.min()) if len(gaps) else math.nan
    return MaximizerAudit(min_gap, violations, skipped, samples, gaps)


@dataclass(frozen=True)
class StabilityReport:
    selected: str
    constant: bool
    sigma_zero: bool
    rejected: tuple[str, ...]
    continuation_ok: bool | None

    @property
    def passed(self) -> bool:
        return self.constant and self.sigma_zero and self.continuation_ok is not False


def _stays_at(traj: Trajectory, state: FluidState, tol: float) -> bool:
    ref = state.fields()
    for snaps in (traj.left, traj.right):
        for s in snaps:
            if np.max(np.abs(s.state.fields() - ref)) > tol:
                return False
    return True


def drifting_fixture(datum: InitialDatum, ticks, time_unit: float, rate: float, gas: GasConstants, id: str) -> Trajectory:
    """Candidate whose entropy decays linearly while energy drains into ``C_int``.

    ``rate`` must be small enough to keep ``S >= s0 rho`` on the horizon.
    """
    st = datum.state
    snaps = []
    for k in ticks:
        t = k * time_unit
        S = st.S - rate * t * st.rho
        new = FluidState(st.grid, st.rho, st.m, S)
        deficit = datum.E0 - new.total_energy(gas)
        snaps.append(Snapshot(new, DefectState.internal(np.full(st.grid.N, deficit / st.grid.L))))
    return Trajectory.right_continuous(datum, list(ticks), time_unit, snaps, id, gas)


def equilibrium_stability_audit(
    datum: InitialDatum,
    eq: EquilibriumState,
    suite: Sequence[SchemeConfig],
    params: SelectionParams = SelectionParams(),
    gas: GasConstants = GasConstants(),
    extra_candidates: Sequence[Trajectory] = (),
    tol: float = 1e-10,
) -> StabilityReport:
    """Select among candidates at equilibrium data; the selection must stay put with zero sigma.

    ``extra_candidates`` may inject spurious members, e.g. ones drifting to lower
    entropy.  Members found at the equilibrium at a node ``T > 0`` (the selection
    at its horizon, and each extra at its first such node) are restarted from
    ``T``: the continuation selected there must remain constant.
    """
    expected = eq.fluid_state(datum.grid)
    if not datum.state.equals(expected) or datum.E0 != eq.E0:
        raise DatumMismatchError("datum is not the given equilibrium")
    cands = generate_candidates(datum, suite, gas)
    pool = list(cands) + list(extra_candidates)
    result = sieve_select(pool, params)
    sel = result.selected
    constant = _stays_at(sel, expected, tol)
    sigma_zero = all(
        abs(entropy_production(sel, t, side)) <= tol * max(1.0, abs(eq.total_entropy()))
        for t in sel.times
        for side in ("left", "right")
    )
    rejected = tuple(c.id for c in extra_candidates if c.id != sel.id)

    continuation_ok = None
    probes = [(sel, sel.times[-1:])] + [(c, c.times[1:]) for c in extra_candidates]
    for cand, times in probes:
        for t in times:
            snap = evaluate(cand, t, "right")
            if np.max(np.abs(snap.state.fields() - expected.fields())) <= tol:
                restart = InitialDatum(snap.state, datum.E0)
                cont = sieve_select(generate_candidates(restart, suite, gas), params).selected
                ok = _stays_at(cont, expected, tol)
                continuation_ok = ok if continuation_ok is None else continuation_ok and ok
                break
    return StabilityReport(sel.id, constant, sigma_zero, rejected, continuation_ok)

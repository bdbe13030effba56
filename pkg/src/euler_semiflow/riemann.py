"""Exact Riemann solver for the polytropic gas and closed-form candidate trajectories.

Besides the entropy solution, :func:`riemann_nonentropy` builds a second weak
solution from the same data in which every rarefaction fan is replaced by an
expansion shock.  All waves of that solution satisfy the Rankine-Hugoniot
conditions exactly; only the entropy condition fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import thermo
from .errors import DomainError, EntropyFloorError, NotConstructibleError, VacuumError
from .state import DefectState, FluidState, Grid, InitialDatum, Snapshot
from .thermo import GasConstants
from .trajectory import Trajectory

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class RiemannDatum:
    """Left and right primitive states ``(rho, u, p)``."""

    left: tuple[float, float, float]
    right: tuple[float, float, float]

    def __post_init__(self):
        for rho, _, p in (self.left, self.right):
            if not (rho > 0 and p > 0):
                raise DomainError("Riemann data need positive density and pressure")


def _wave_function(p, rho_k, p_k, c_k, gas, shock):
    """Velocity jump across a left/right wave and its derivative in ``p``."""
    g = gas.gamma
    if shock:
        A = 2.0 / ((g + 1.0) * rho_k)
        B = (g - 1.0) / (g + 1.0) * p_k
        if p + B <= 0:
            raise NotConstructibleError("pressure outside the Hugoniot locus")
        q = math.sqrt(A / (p + B))
        return (p - p_k) * q, q * (1.0 - 0.5 * (p - p_k) / (B + p))
    ratio = p / p_k
    f = 2.0 * c_k / (g - 1.0) * (ratio ** ((g - 1.0) / (2.0 * g)) - 1.0)
    df = ratio ** (-(g + 1.0) / (2.0 * g)) / (rho_k * c_k)
    return f, df


@dataclass(frozen=True)
class RiemannSolution:
    """Self-similar solution: two nonlinear waves separated by a contact."""

    datum: RiemannDatum
    gas: GasConstants
    p_star: float
    u_star: float
    rho_star_left: float
    rho_star_right: float
    left_shock: bool
    right_shock: bool
    residual: float
    admissible: bool = True

    # -- wave speeds -------------------------------------------------------

    def _side(self, which: str):
        rho, u, p = self.datum.left if which == "left" else self.datum.right
        return rho, u, p, math.sqrt(self.gas.gamma * p / rho)

    def _shock_speed(self, which: str) -> float:
        g = self.gas.gamma
        rho, u, p, c = self._side(which)
        factor = math.sqrt((g + 1.0) / (2.0 * g) * self.p_star / p + (g - 1.0) / (2.0 * g))
        return u - c * factor if which == "left" else u + c * factor

    def _star_sound_speed(self, which: str) -> float:
        rho_star = self.rho_star_left if which == "left" else self.rho_star_right
        return math.sqrt(self.gas.gamma * self.p_star / rho_star)

    def breakpoints(self) -> list[float]:
        """Similarity speeds where the solution is not smooth, in increasing order."""
        pts = []
        rho, u, p, c = self._side("left")
        if self.left_shock:
            pts.append(self._shock_speed("left"))
        else:
            pts += [u - c, self.u_star - self._star_sound_speed("left")]
        pts.append(self.u_star)
        rho, u, p, c = self._side("right")
        if self.right_shock:
            pts.append(self._shock_speed("right"))
        else:
            pts += [self.u_star + self._star_sound_speed("right"), u + c]
        return pts

    def wave_span(self) -> tuple[float, float]:
        pts = self.breakpoints()
        return min(pts), max(pts)

    # -- sampling ------------------------------------------------------------

    def sample(self, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Primitive variables at similarity coordinates ``xi = (x - x0)/t``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        g = self.gas.gamma
        rho = np.empty_like(xi)
        u = np.empty_like(xi)
        p = np.empty_like(xi)
        rl, ul, pl, cl = self._side("left")
        rr, ur, pr, cr = self._side("right")

        left_of_contact = xi < self.u_star
        # left wave
        if self.left_shock:
            sl = self._shock_speed("left")
            outer = xi < sl
            star = left_of_contact & ~outer
            fan = np.zeros_like(xi, dtype=bool)
        else:
            head, tail = ul - cl, self.u_star - self._star_sound_speed("left")
            outer = xi < head
            fan = left_of_contact & (xi >= head) & (xi < tail)
            star = left_of_contact & (xi >= tail)
        rho[outer], u[outer], p[outer] = rl, ul, pl
        rho[star], u[star], p[star] = self.rho_star_left, self.u_star, self.p_star
        if np.any(fan):
            c = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * (ul - xi[fan]))
            u[fan] = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * ul + xi[fan])
            rho[fan] = rl * (c / cl) ** (2.0 / (g - 1.0))
            p[fan] = pl * (c / cl) ** (2.0 * g / (g - 1.0))

        right_of_contact = ~left_of_contact
        if self.right_shock:
            sr = self._shock_speed("right")
            outer = xi > sr
            star = right_of_contact & ~outer
            fan = np.zeros_like(xi, dtype=bool)
        else:
            head, tail = ur + cr, self.u_star + self._star_sound_speed("right")
            outer = xi > head
            fan = right_of_contact & (xi <= head) & (xi > tail)
            star = right_of_contact & (xi <= tail)
        rho[outer], u[outer], p[outer] = rr, ur, pr
        rho[star], u[star], p[star] = self.rho_star_right, self.u_star, self.p_star
        if np.any(fan):
            c = 2.0 / (g + 1.0) * (cr - 0.5 * (g - 1.0) * (ur - xi[fan]))
            u[fan] = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * ur + xi[fan])
            rho[fan] = rr * (c / cr) ** (2.0 / (g - 1.0))
            p[fan] = pr * (c / cr) ** (2.0 * g / (g - 1.0))
        return rho, u, p

    def conserved_cell_averages(self, grid: Grid, t: float, x0: float):
        """Cell averages of (rho, m, E) at time ``t > 0``.

        Cells are split at the wave positions; on each piece an 8-point
        Gauss-Legendre rule integrates the (polynomial in x) fan exactly for
        the usual rational exponents.
        """
        g = self.gas.gamma
        cuts = np.array(self.breakpoints()) * t + x0
        out = np.zeros((3, grid.N))
        for i, (a, b) in enumerate(zip(grid.edges[:-1], grid.edges[1:])):
            pts = np.concatenate([[a], cuts[(cuts > a) & (cuts < b)], [b]])
            acc = np.zeros(3)
            for lo, hi in zip(pts[:-1], pts[1:]):
                x = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
                rho, u, p = self.sample((x - x0) / t)
                E = p / (g - 1.0) + 0.5 * rho * u**2
                w = 0.5 * (hi - lo) * _GL_WEIGHTS
                acc += [w @ rho, w @ (rho * u), w @ E]
            out[:, i] = acc / (b - a)
        return out

    def state_cell_averages(self, grid: Grid, t: float, x0: float):
        """Cell averages of the model variables (rho, m, S) at time ``t > 0``.

        Averaging ``S`` itself keeps ``int S dx`` equal to that of the exact
        solution; the energy of the averaged state falls short of the averaged
        energy by Jensen, and trajectories book that gap as an internal defect.
        """
        g, cv = self.gas.gamma, self.gas.c_v
        cuts = np.array(self.breakpoints()) * t + x0
        out = np.zeros((3, grid.N))
        for i, (a, b) in enumerate(zip(grid.edges[:-1], grid.edges[1:])):
            pts = np.concatenate([[a], cuts[(cuts > a) & (cuts < b)], [b]])
            acc = np.zeros(3)
            for lo, hi in zip(pts[:-1], pts[1:]):
                x = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
                rho, u, p = self.sample((x - x0) / t)
                S = cv * rho * np.log(p / rho**g)
                w = 0.5 * (hi - lo) * _GL_WEIGHTS
                acc += [w @ rho, w @ (rho * u), w @ S]
            out[:, i] = acc / (b - a)
        return out

    def rankine_hugoniot_residual(self) -> float:
        """Largest RH defect ``|s [U] - [F(U)]|`` over the discontinuous waves."""
        g = self.gas.gamma

        def cons_flux(rho, u, p):
            E = p / (g - 1.0) + 0.5 * rho * u**2
            return np.array([rho, rho * u, E]), np.array([rho * u, rho * u**2 + p, (E + p) * u])

        worst = 0.0
        pairs = []
        if self.left_shock:
            pairs.append((self._shock_speed("left"), self.datum.left, (self.rho_star_left, self.u_star, self.p_star)))
        if self.right_shock:
            pairs.append(
                (self._shock_speed("right"), (self.rho_star_right, self.u_star, self.p_star), self.datum.right)
            )
        # the contact carries only a density jump
        pairs.append(
            (self.u_star, (self.rho_star_left, self.u_star, self.p_star), (self.rho_star_right, self.u_star, self.p_star))
        )
        for s, a, b in pairs:
            Ua, Fa = cons_flux(*a)
            Ub, Fb = cons_flux(*b)
            scale = max(1.0, float(np.max(np.abs(Fa))))
            worst = max(worst, float(np.max(np.abs(s * (Ub - Ua) - (Fb - Fa)))) / scale)
        return worst


def _solve_star(rd: RiemannDatum, gas: GasConstants, force_shock: bool, tol: float = 1e-14, maxiter: int = 100):
    g = gas.gamma
    rl, ul, pl = rd.left
    rr, ur, pr = rd.right
    cl = math.sqrt(g * pl / rl)
    cr = math.sqrt(g * pr / rr)
    if 2.0 / (g - 1.0) * (cl + cr) <= ur - ul:
        raise VacuumError("the Riemann data generate vacuum")

    def branch(p, pk):
        return True if force_shock else p > pk

    def f(p):
        fl, dl = _wave_function(p, rl, pl, cl, gas, branch(p, pl))
        fr, dr = _wave_function(p, rr, pr, cr, gas, branch(p, pr))
        return fl + fr + (ur - ul), dl + dr, fl, fr

    # two-rarefaction guess; positive by construction
    z = (g - 1.0) / (2.0 * g)
    p = ((cl + cr - 0.5 * (g - 1.0) * (ur - ul)) / (cl / pl**z + cr / pr**z)) ** (1.0 / z)
    p = max(p, 1e-12 * min(pl, pr))
    scale = cl + cr + abs(ur - ul)
    for _ in range(maxiter):
        val, der, _, _ = f(p)
        if abs(val) <= tol * scale:
            break
        step = val / der
        lam = 1.0
        while True:
            trial = p - lam * step
            try:
                if trial > 0 and abs(f(trial)[0]) < abs(val):
                    break
            except NotConstructibleError:
                pass
            lam *= 0.5
            if lam < 1e-12:
                trial = p - lam * step
                break
        p = trial
    val, _, fl, fr = f(p)
    u = 0.5 * (ul + ur) + 0.5 * (fr - fl)
    return p, u, abs(val) / scale


def _star_density(p_star, rho_k, p_k, gas, shock):
    g = gas.gamma
    ratio = p_star / p_k
    if shock:
        G = (g - 1.0) / (g + 1.0)
        return rho_k * (ratio + G) / (G * ratio + 1.0)
    return rho_k * ratio ** (1.0 / g)


def solve_riemann(rd: RiemannDatum, gas: GasConstants = GasConstants()) -> RiemannSolution:
    """Entropy solution of the Riemann problem (damped Newton on the pressure function)."""
    p, u, res = _solve_star(rd, gas, force_shock=False)
    ls, rs = p > rd.left[2], p > rd.right[2]
    return RiemannSolution(
        rd,
        gas,
        p,
        u,
        _star_density(p, rd.left[0], rd.left[2], gas, ls),
        _star_density(p, rd.right[0], rd.right[2], gas, rs),
        ls,
        rs,
        res,
    )


def solve_expansion_shock(rd: RiemannDatum, gas: GasConstants = GasConstants()) -> RiemannSolution:
    """Weak solution with every rarefaction replaced by a Rankine-Hugoniot expansion shock."""
    exact = solve_riemann(rd, gas)
    # a genuine rarefaction needs p* strictly below the adjacent pressure
    slack = 1e-12 * max(rd.left[2], rd.right[2])
    if not (exact.p_star < rd.left[2] - slack or exact.p_star < rd.right[2] - slack):
        raise NotConstructibleError("the entropy solution contains no rarefaction wave")
    p, u, res = _solve_star(rd, gas, force_shock=True)
    sol = RiemannSolution(
        rd,
        gas,
        p,
        u,
        _star_density(p, rd.left[0], rd.left[2], gas, True),
        _star_density(p, rd.right[0], rd.right[2], gas, True),
        True,
        True,
        res,
        admissible=False,
    )
    if not (sol._shock_speed("left") < sol.u_star < sol._shock_speed("right")):
        raise NotConstructibleError("expansion shocks overtake the contact")
    return sol


def riemann_exact(rd: RiemannDatum, gas: GasConstants, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample the entropy solution at similarity coordinates ``xi = x/t``."""
    return solve_riemann(rd, gas).sample(xi)


# -- candidate trajectories ----------------------------------------------------


def riemann_initial_datum(rd: RiemannDatum, grid: Grid, gas: GasConstants, x0: float | None = None) -> InitialDatum:
    """Piecewise-constant datum with the jump at ``x0`` (default: mid-domain)."""
    x0 = 0.5 * grid.L if x0 is None else x0
    left = grid.centers < x0
    rho = np.where(left, rd.left[0], rd.right[0])
    u = np.where(left, rd.left[1], rd.right[1])
    p = np.where(left, rd.left[2], rd.right[2])
    m = rho * u
    S = rho * thermo.entropy_from_primitive(rho, p / rho, gas)
    return InitialDatum.from_state(FluidState(grid, rho, m, S), gas, riemann=rd, x0=x0)


def as_riemann_datum(datum: InitialDatum) -> tuple[RiemannDatum, float] | None:
    rd = datum.meta.get("riemann")
    if rd is None:
        return None
    return rd, datum.meta.get("x0", 0.5 * datum.grid.L)


def solution_trajectory(
    sol: RiemannSolution,
    datum: InitialDatum,
    n_out: int,
    dt_out: float,
    id: str,
    x0: float | None = None,
) -> Trajectory:
    """Cell-averaged trajectory of a self-similar solution on ``[0, n_out*dt_out]``."""
    grid, gas = datum.grid, sol.gas
    x0 = 0.5 * grid.L if x0 is None else x0
    lo, hi = sol.wave_span()
    T = n_out * dt_out
    if x0 + lo * T < 0 or x0 + hi * T > grid.L:
        raise NotConstructibleError("waves reach the walls before the horizon")
    snaps = [datum.initial_snapshot(gas)]
    for k in range(1, n_out + 1):
        state = FluidState(grid, *sol.state_cell_averages(grid, k * dt_out, x0))
        floor = state.min_entropy_violation(gas)
        if floor > 1e-10:
            raise EntropyFloorError(f"{id}: S < s0*rho by {floor:.3e} at t={k * dt_out:.6g}")
        deficit = max(0.0, datum.E0 - state.total_energy(gas))
        snaps.append(Snapshot(state, DefectState.internal(np.full(grid.N, deficit / grid.L))))
    meta = {"kind": "riemann", "admissible": sol.admissible, "p_star": sol.p_star}
    return Trajectory.right_continuous(datum, np.arange(n_out + 1), dt_out, snaps, id, gas, meta)


def riemann_exact_trajectory(rd, datum, n_out, dt_out, gas=GasConstants(), x0=None) -> Trajectory:
    sol = solve_riemann(rd, gas)
    return solution_trajectory(sol, datum, n_out, dt_out, f"riemann-exact-N{datum.grid.N}", x0)


def riemann_nonentropy(rd, datum, n_out, dt_out, gas=GasConstants(), x0=None) -> Trajectory:
    """Expansion-shock candidate; flagged ``admissible = False`` in its metadata."""
    sol = solve_expansion_shock(rd, gas)
    return solution_trajectory(sol, datum, n_out, dt_out, f"riemann-expansion-shock-N{datum.grid.N}", x0)

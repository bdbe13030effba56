"""Cell-averaged fields on a uniform 1D slab ``[0, L]`` with impermeable walls."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.linalg import solve_banded

from . import thermo
from .errors import DomainError, GridMismatchError
from .thermo import GasConstants


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    N: int
    L: float = 1.0

    def __post_init__(self):
        if self.N < 1 or self.L <= 0:
            raise DomainError(f"invalid grid N={self.N}, L={self.L}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dx

    @cached_property
    def edges(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dx

    def integrate(self, values) -> float:
        """Midpoint cell sum."""
        return float(np.sum(values) * self.dx)

    def cosine_mode(self, j: int) -> np.ndarray:
        return np.cos(j * np.pi * self.centers / self.L)

    def check_same(self, other: "Grid") -> None:
        if self != other:
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


@lru_cache(maxsize=32)
def _smoothing_banded(N: int, L: float) -> np.ndarray:
    # A = I - Delta_h, reflective ends
    dx = L / N
    k = 1.0 / dx**2
    ab = np.zeros((3, N))
    ab[0, 1:] = -k
    ab[1, :] = 1.0 + 2.0 * k
    ab[2, :-1] = -k
    ab[1, 0] -= k
    ab[1, -1] -= k
    ab.setflags(write=False)
    return ab


def negative_norm(grid: Grid, v) -> float:
    """Discrete negative-order norm ``||(I - Delta_h)^{-1} v||_{L2}``.

    Constants are fixed points of the smoothing operator, so for a spatially
    constant ``v = c`` the result is ``|c| * sqrt(L)``.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != grid.N:
        raise GridMismatchError("field length does not match grid")
    if grid.N == 1:
        w = v
    else:
        w = solve_banded((1, 1), _smoothing_banded(grid.N, grid.L), v.T).T
    return float(np.sqrt(np.sum(w**2, axis=-1) * grid.dx))


@dataclass(frozen=True, eq=False)
class FluidState:
    """Barycentric fields: density, momentum and total entropy per cell."""

    grid: Grid
    rho: np.ndarray
    m: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        for name in ("rho", "m", "S"):
            arr = _frozen(getattr(self, name))
            if arr.shape != (self.grid.N,):
                raise GridMismatchError(f"{name} has shape {arr.shape}, expected ({self.grid.N},)")
            object.__setattr__(self, name, arr)

    def equals(self, other: "FluidState") -> bool:
        return (
            self.grid == other.grid
            and np.array_equal(self.rho, other.rho)
            and np.array_equal(self.m, other.m)
            and np.array_equal(self.S, other.S)
        )

    def fields(self) -> np.ndarray:
        return np.stack([self.rho, self.m, self.S])

    def mass(self) -> float:
        return self.grid.integrate(self.rho)

    def total_entropy(self) -> float:
        return self.grid.integrate(self.S)

    def energy_density(self, gas: GasConstants) -> np.ndarray:
        return thermo.total_energy_density(self.rho, self.m, self.S, gas)

    def total_energy(self, gas: GasConstants) -> float:
        return self.grid.integrate(self.energy_density(gas))

    def min_entropy_violation(self, gas: GasConstants) -> float:
        """Largest amount by which ``S >= s0 rho`` fails (0 if it holds)."""
        pos = self.rho > 0
        if not np.any(pos):
            return 0.0
        return float(max(0.0, np.max(gas.s0 * self.rho[pos] - self.S[pos])))

    @classmethod
    def constant(cls, grid: Grid, rho: float, m: float = 0.0, S: float = 0.0) -> "FluidState":
        ones = np.ones(grid.N)
        return cls(grid, rho * ones, m * ones, S * ones)


@dataclass(frozen=True, eq=False)
class DefectState:
    """Nonnegative concentration defects per cell.

    ``c_plus``/``c_minus`` are the two directions of the convective defect in
    1D; they satisfy ``(c_plus + c_minus) / 2 = C_kin``.
    """

    C_kin: np.ndarray
    C_int: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray

    def __post_init__(self):
        for name in ("C_kin", "C_int", "c_plus", "c_minus"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @classmethod
    def zeros(cls, N: int) -> "DefectState":
        z = np.zeros(N)
        return cls(z, z, z, z)

    @classmethod
    def internal(cls, C_int) -> "DefectState":
        C_int = np.asarray(C_int, dtype=float)
        z = np.zeros_like(C_int)
        return cls(z, C_int, z, z)

    def total(self, grid: Grid) -> float:
        return grid.integrate(self.C_kin + self.C_int)

    def equals(self, other: "DefectState") -> bool:
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("C_kin", "C_int", "c_plus", "c_minus")
        )

    def check(self, atol: float = 1e-12) -> list[str]:
        problems = []
        for name in ("C_kin", "C_int", "c_plus", "c_minus"):
            if np.any(getattr(self, name) < -atol):
                problems.append(f"{name} has negative entries")
        if not np.allclose(0.5 * (self.c_plus + self.c_minus), self.C_kin, rtol=0, atol=atol):
            problems.append("convective defect does not match C_kin")
        return problems


@dataclass(frozen=True, eq=False)
class Snapshot:
    state: FluidState
    defects: DefectState

    def equals(self, other: "Snapshot") -> bool:
        return self.state.equals(other.state) and self.defects.equals(other.defects)

    def energy_budget(self, gas: GasConstants) -> float:
        """State energy plus defect mass; equals E0 along a dissipative solution."""
        return self.state.total_energy(gas) + self.defects.total(self.state.grid)


@dataclass(frozen=True, eq=False)
class InitialDatum:
    """Initial fields together with the total energy budget ``E0``."""

    state: FluidState
    E0: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def grid(self) -> Grid:
        return self.state.grid

    @classmethod
    def from_state(cls, state: FluidState, gas: GasConstants, E0: float | None = None, **meta):
        """Build a datum, taking ``E0`` as the state energy when not given."""
        if E0 is None:
            E0 = state.total_energy(gas)
        datum = cls(state, float(E0), dict(meta))
        datum.validate(gas)
        return datum

    def validate(self, gas: GasConstants, rtol: float = 1e-12) -> None:
        st = self.state
        if np.any(st.rho < 0):
            raise DomainError("initial density must be nonnegative")
        # rounding slack, e.g. for closed-form equilibria with S_bar = 0
        if st.min_entropy_violation(gas) > rtol * max(1.0, float(np.max(np.abs(st.S)))):
            raise DomainError("initial entropy violates S0 >= s0*rho0")
        energy = st.total_energy(gas)
        if not energy <= self.E0 * (1 + rtol) + rtol:
            raise DomainError(f"initial energy {energy} exceeds budget E0={self.E0}")

    def equals(self, other: "InitialDatum") -> bool:
        return self.state.equals(other.state) and self.E0 == other.E0

    def initial_snapshot(self, gas: GasConstants) -> Snapshot:
        """Datum plus the uniform internal defect that closes the energy budget."""
        grid = self.grid
        deficit = max(0.0, self.E0 - self.state.total_energy(gas))
        return Snapshot(self.state, DefectState.internal(np.full(grid.N, deficit / grid.L)))

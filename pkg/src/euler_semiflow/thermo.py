"""Ideal-gas thermodynamics in the (rho, m, S) phase variables.

All functions are vectorised over numpy arrays and return Python floats for
scalar input.  The pressure is written in terms of the total entropy
``S = rho * s`` as

    p(rho, S) = rho**gamma * exp(S / (c_v * rho)),

and extended to ``rho = 0`` as a convex lower semicontinuous function
(``0`` when ``S <= 0``, infinite otherwise).  Evaluation is done through the
logarithm so large arguments yield the :data:`INFINITE_ENERGY` sentinel
rather than a floating-point overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

INFINITE_ENERGY = math.inf
"""Sentinel returned by the convex extensions where they take the value +inf."""

# exp(x) is finite iff x < this
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class GasConstants:
    """Polytropic gas: adiabatic exponent, specific heat and entropy floor."""

    gamma: float = 1.4
    s0: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError(f"adiabatic exponent must exceed 1, got {self.gamma}")

    @property
    def c_v(self) -> float:
        return 1.0 / (self.gamma - 1.0)


@dataclass(frozen=True)
class ThermoPoint:
    """A single phase-space point (rho, m, S)."""

    rho: float
    momentum: float = 0.0
    S: float = 0.0

    def validate(self, gas: GasConstants, *, allow_infinite: bool = False) -> None:
        """Check admissibility; the infinite-energy corner is only allowed on request."""
        if self.rho < 0:
            raise DomainError(f"negative density {self.rho}")
        if self.rho > 0:
            if self.S < gas.s0 * self.rho:
                raise DomainError(
                    f"minimum-entropy principle violated: S={self.S} < s0*rho={gas.s0 * self.rho}"
                )
        else:
            if self.momentum != 0 and not allow_infinite:
                raise DomainError("vacuum point with nonzero momentum has infinite energy")
            if self.S > 0 and not allow_infinite:
                raise DomainError("vacuum point with positive entropy has infinite energy")


def _as_output(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _prepare(rho, *others):
    scalar = np.ndim(rho) == 0 and all(np.ndim(o) == 0 for o in others)
    arrays = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (rho, *others)))
    if np.any(arrays[0] < 0):
        raise DomainError("density must be nonnegative")
    return scalar, arrays


def _log_pressure(rho: np.ndarray, S: np.ndarray, gas: GasConstants) -> np.ndarray:
    return gas.gamma * np.log(rho) + S / (gas.c_v * rho)


def _exp_or_sentinel(logv: np.ndarray) -> np.ndarray:
    out = np.full(logv.shape, INFINITE_ENERGY)
    finite = logv < _LOG_MAX
    out[finite] = np.exp(logv[finite])
    return out


def pressure(rho, S, gas: GasConstants = GasConstants()):
    """Pressure ``rho**gamma * exp(S/(c_v rho))`` with its convex extension at vacuum."""
    scalar, (rho, S) = _prepare(rho, S)
    out = np.zeros(rho.shape)
    pos = rho > 0
    out[pos] = _exp_or_sentinel(_log_pressure(rho[pos], S[pos], gas))
    out[~pos & (S > 0)] = INFINITE_ENERGY
    return _as_output(out, scalar)


def internal_energy_density(rho, S, gas: GasConstants = GasConstants()):
    """``rho * e = c_v * p``; same extension as :func:`pressure`."""
    return gas.c_v * pressure(rho, S, gas)


def kinetic_energy_density(rho, momentum):
    """``|m|**2 / (2 rho)``, zero for ``m = 0`` and infinite for ``rho = 0, m != 0``."""
    scalar, (rho, m) = _prepare(rho, momentum)
    out = np.zeros(rho.shape)
    pos = rho > 0
    out[pos] = 0.5 * m[pos] ** 2 / rho[pos]
    out[~pos & (m != 0)] = INFINITE_ENERGY
    return _as_output(out, scalar)


def total_energy_density(rho, momentum, S, gas: GasConstants = GasConstants()):
    return kinetic_energy_density(rho, momentum) + internal_energy_density(rho, S, gas)


def temperature(rho, S, gas: GasConstants = GasConstants()):
    """Absolute temperature ``p / rho``; defined only for positive density."""
    scalar, (rho, S) = _prepare(rho, S)
    if np.any(rho <= 0):
        raise DomainError("temperature requires positive density")
    logt = (gas.gamma - 1.0) * np.log(rho) + S / (gas.c_v * rho)
    return _as_output(_exp_or_sentinel(logt), scalar)


def entropy_from_primitive(rho, theta, gas: GasConstants = GasConstants()):
    """Specific entropy ``s = c_v log(theta) - log(rho)``."""
    scalar = np.ndim(rho) == 0 and np.ndim(theta) == 0
    rho, theta = np.broadcast_arrays(np.asarray(rho, float), np.asarray(theta, float))
    if np.any(rho <= 0) or np.any(theta <= 0):
        raise DomainError("specific entropy requires positive density and temperature")
    return _as_output(gas.c_v * np.log(theta) - np.log(rho), scalar)


def entropy_from_conserved(rho, momentum, energy, gas: GasConstants = GasConstants()):
    """Total entropy ``S = rho * s`` recovered from (rho, m, E).

    Raises DomainError if the internal energy is not positive.
    """
    scalar, (rho, m, E) = _prepare(rho, momentum, energy)
    if np.any(rho <= 0):
        raise DomainError("entropy requires positive density")
    rho_e = E - 0.5 * m**2 / rho
    if np.any(rho_e <= 0):
        raise DomainError("nonpositive internal energy")
    theta = rho_e / (gas.c_v * rho)
    return _as_output(rho * (gas.c_v * np.log(theta) - np.log(rho)), scalar)


def pressure_hessian(rho, S, gas: GasConstants = GasConstants()):
    """Analytic Hessian of ``p(rho, S)``, ordered ``[[p_rr, p_rS], [p_rS, p_SS]]``.

    Returns an array of shape ``(..., 2, 2)``.
    """
    _, (rho, S) = _prepare(rho, S)
    if np.any(rho <= 0):
        raise DomainError("the Hessian is defined for positive density only")
    g, cv = gas.gamma, gas.c_v
    # common factor rho**(gamma-4) * exp(S/(c_v rho))
    w = _exp_or_sentinel((g - 4.0) * np.log(rho) + S / (cv * rho))
    p_rr = ((g - 1.0) * rho**2 + ((g - 1.0) * rho - S / cv) ** 2) * w
    p_ss = rho**2 / cv**2 * w
    p_rs = ((g - 1.0) / cv * rho**2 - S / cv**2 * rho) * w
    hess = np.empty(rho.shape + (2, 2))
    hess[..., 0, 0] = p_rr
    hess[..., 0, 1] = p_rs
    hess[..., 1, 0] = p_rs
    hess[..., 1, 1] = p_ss
    return hess


def pressure_hessian_determinant(rho, S, gas: GasConstants = GasConstants()):
    """Closed form ``(gamma - 1) p**2 / (c_v**2 rho**4)`` of the Hessian determinant.

    Positive for ``rho > 0``, which with the positive trace gives strict convexity.
    """
    scalar, (rho, S) = _prepare(rho, S)
    if np.any(rho <= 0):
        raise DomainError("the Hessian is defined for positive density only")
    logdet = math.log(gas.gamma - 1.0) - 2.0 * math.log(gas.c_v) + 2.0 * _log_pressure(rho, S, gas) - 4.0 * np.log(rho)
    return _as_output(_exp_or_sentinel(logdet), scalar)


def stated_determinant(rho, S, gas: GasConstants = GasConstants()):
    """Quoted closed form ``rho**gamma exp(S/(c_v rho)) / c_v**2`` for the Hessian determinant.

    It misses a factor ``(gamma - 1) p / rho**4``; kept only so the discrepancy stays checkable.
    """
    return pressure(rho, S, gas) / gas.c_v**2


def sound_speed(rho, p, gas: GasConstants = GasConstants()):
    return np.sqrt(gas.gamma * np.asarray(p) / np.asarray(rho))

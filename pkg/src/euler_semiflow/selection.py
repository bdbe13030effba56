"""Semiflow selection by successive extremization of Laplace-transform functionals.

The sieve first minimizes ``int exp(-lambda_0 t) alpha(int S dx) dt`` over the
candidate set (``alpha`` strictly decreasing, so this favours entropy
production), then breaks the remaining ties with the functionals
``int exp(-lambda_n t) beta_n(U(t)) dt`` for the arithmetic sequence
``lambda_n = lambda_0 + n * zeta``.

Every functional value comes with a certified tail: the trajectories are only
known up to a finite horizon ``H``, and a functional bounded by ``B``
contributes at most ``B exp(-lambda H) / lambda`` beyond it.  Candidates whose
value intervals overlap are treated as tied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DatumMismatchError, DomainError
from .solver import SchemeConfig, SolutionSet, generate_candidates, with_horizon
from .state import InitialDatum, Snapshot
from .thermo import GasConstants
from .trajectory import (
    Trajectory,
    entropy_production,
    evaluate,
    l1loc_distance,
    time_shift,
)


@dataclass(frozen=True)
class Functional:
    """A bounded continuous functional on snapshots: ``|func(snap)| <= bound``."""

    name: str
    func: Callable[[Snapshot], float]
    bound: float

    def __call__(self, snap: Snapshot) -> float:
        return self.func(snap)


def default_alpha(x_scale: float) -> Callable[[float], float]:
    return lambda x: -math.tanh(x / x_scale)


def moment_functionals(n_modes: int = 3, scale: float = 1.0) -> list[Functional]:
    """``tanh`` cut-offs of the cosine moments of rho, m and S (modes ``0..n_modes-1``)."""
    out = []
    for j in range(n_modes):
        for name in ("rho", "m", "S"):

            def f(snap, j=j, name=name):
                st = snap.state
                return math.tanh(st.grid.integrate(getattr(st, name) * st.grid.cosine_mode(j)) / scale)

            out.append(Functional(f"tanh({name}.cos{j})", f, 1.0))
    return out


@dataclass(frozen=True)
class SelectionParams:
    lambda0: float = 1.0
    zeta: float = 1.0
    n_funcs: int = 8
    x_scale: float = 1.0
    alpha: Callable[[float], float] | None = None
    alpha_bound: float = 1.0
    beta_family: tuple[Functional, ...] = field(default_factory=lambda: tuple(moment_functionals()))
    tie_tol: float = 1e-9

    def __post_init__(self):
        if self.lambda0 <= 0 or self.zeta <= 0:
            raise DomainError("lambda0 and zeta must be positive")
        if self.x_scale <= 0:
            raise DomainError("x_scale must be positive")
        if self.n_funcs < 0:
            raise DomainError("n_funcs must be nonnegative")
        if self.alpha is None:
            object.__setattr__(self, "alpha", default_alpha(self.x_scale))
        xs = np.linspace(-3.0, 3.0, 61) * self.x_scale
        vals = np.array([self.alpha(x) for x in xs])
        if np.any(np.diff(vals) >= 0):
            raise DomainError("alpha must be strictly decreasing")
        if not self.beta_family and self.n_funcs > 0:
            raise DomainError("tie-breaking stages need a nonempty beta_family")

    def lam(self, n: int) -> float:
        return self.lambda0 + n * self.zeta

    def entropy_functional(self) -> Functional:
        return Functional("alpha(int S)", lambda snap: beta_entropy(snap, self), self.alpha_bound)


def beta_entropy(snap: Snapshot, params: SelectionParams) -> float:
    """``alpha(int S dx)``: bounded, decreasing in the total entropy."""
    return float(params.alpha(snap.state.total_entropy()))


# -- scalar histories and Laplace transforms ----------------------------------------


@dataclass(frozen=True)
class ScalarHistory:
    """A bounded BV function of time sampled by one-sided values at nodes."""

    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    bound: float | None = None

    def __post_init__(self):
        for name in ("times", "left", "right"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.times.shape == self.left.shape == self.right.shape):
            raise DomainError("times and one-sided values must have equal length")
        if np.any(np.diff(self.times) <= 0) or self.times[0] != 0:
            raise DomainError("history nodes must start at 0 and increase")
        if self.bound is None:
            object.__setattr__(
                self, "bound", float(max(np.max(np.abs(self.left)), np.max(np.abs(self.right))))
            )

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @classmethod
    def from_trajectory(cls, traj: Trajectory, func: Callable[[Snapshot], float], bound=None):
        return cls(traj.times, [func(s) for s in traj.left], [func(s) for s in traj.right], bound)

    @classmethod
    def step(cls, times, values, bound=None):
        """Right-continuous step function: ``values[k]`` on ``[times[k], times[k+1])``."""
        values = np.asarray(values, dtype=float)
        left = np.concatenate([[values[0]], values[:-1]])
        return cls(times, left, values, bound)

    def value_right(self, t: float) -> float:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.right[k])


def laplace_integral(h: ScalarHistory, lam: float) -> float:
    """``int_0^H exp(-lam t) h(t) dt`` for the linear interpolant of ``h(t_k+), h(t_{k+1}-)``.

    The exponential weight is integrated exactly on every segment.
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    a, b = h.times[:-1], h.times[1:]
    fa, fb = h.right[:-1], h.left[1:]
    width = b - a
    x = lam * width
    Ea = np.exp(-lam * a)
    const = Ea * -np.expm1(-x) / lam
    # int_0^w exp(-lam s) s ds / w
    lin = Ea * (-np.expm1(-x) - x * np.exp(-x)) / (lam**2 * width)
    return float(np.sum(fa * const + (fb - fa) * lin))


@dataclass(frozen=True)
class LaplaceValue:
    lam: float
    value: float
    tail: float

    @property
    def interval(self) -> tuple[float, float]:
        return self.value - self.tail, self.value + self.tail


def laplace_of_history(h: ScalarHistory, lam: float) -> LaplaceValue:
    return LaplaceValue(lam, laplace_integral(h, lam), h.bound * math.exp(-lam * h.horizon) / lam)


def laplace_functional(traj: Trajectory, lam: float, beta: Functional) -> LaplaceValue:
    """``int_0^inf exp(-lam t) beta(traj(t)) dt`` as value plus certified tail bound."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    return laplace_of_history(ScalarHistory.from_trajectory(traj, beta, beta.bound), lam)


# -- the sieve -------------------------------------------------------------------------


@dataclass(frozen=True)
class StageRecord:
    stage: int
    lam: float
    functional: str
    values: dict
    survivors: tuple[str, ...]


@dataclass(frozen=True)
class SelectionResult:
    selected: Trajectory
    stages: tuple[StageRecord, ...]
    tie_break: bool

    @property
    def id(self) -> str:
        return self.selected.id


def _argmin_set(values: Mapping[str, LaplaceValue], tie_tol: float) -> list[str]:
    best_upper = min(v.value + v.tail for v in values.values())
    scale = max(1.0, min(abs(v.value) for v in values.values()))
    return [k for k, v in values.items() if v.value - v.tail <= best_upper + tie_tol * scale]


def sieve_select(candidates: SolutionSet | Sequence[Trajectory], params: SelectionParams = SelectionParams()):
    """Reduce a candidate family to one trajectory; returns a :class:`SelectionResult`."""
    trajs = list(candidates)
    if not trajs:
        raise DomainError("cannot select from an empty set")
    datum = trajs[0].datum
    for tr in trajs[1:]:
        if not tr.datum.equals(datum):
            raise DatumMismatchError(f"{tr.id} does not share the initial datum")
    trajs.sort(key=lambda t: t.id)
    pool = {t.id: t for t in trajs}
    if len(pool) != len(trajs):
        raise DomainError("candidate ids must be unique")
    horizon = min(t.horizon for t in trajs)
    stages = []
    schedule = [(0, params.lam(0), params.entropy_functional())]
    schedule += [
        (n, params.lam(n), params.beta_family[(n - 1) % len(params.beta_family)])
        for n in range(1, params.n_funcs + 1)
    ]
    for n, lam, beta in schedule:
        values = {}
        for tid, tr in pool.items():
            h = ScalarHistory.from_trajectory(tr, beta, beta.bound)
            h = _truncate(h, horizon)
            values[tid] = laplace_of_history(h, lam)
        survivors = _argmin_set(values, params.tie_tol)
        stages.append(StageRecord(n, lam, beta.name, values, tuple(survivors)))
        pool = {k: pool[k] for k in survivors}
        if len(pool) == 1:
            break
    chosen = sorted(pool)[0]
    return SelectionResult(pool[chosen], tuple(stages), len(pool) > 1)


def _truncate(h: ScalarHistory, horizon: float) -> ScalarHistory:
    if h.horizon <= horizon:
        return h
    keep = h.times <= horizon * (1 + 1e-12)
    return ScalarHistory(h.times[keep], h.left[keep], h.right[keep], h.bound)


# -- partial orders --------------------------------------------------------------------


@dataclass(frozen=True)
class OrderVerdict:
    relation: str  # succeeds | precedes | equivalent | incomparable
    witness: float | None = None
    tau: float | None = None


def _first_time(times, mask) -> float | None:
    idx = np.flatnonzero(mask)
    return float(times[idx[0]]) if len(idx) else None


def _verdict_from_differences(times, d, tol) -> OrderVerdict:
    d = np.asarray(d, dtype=float)
    times = np.asarray(times, dtype=float)
    pos, neg = d > tol, d < -tol
    if not pos.any() and not neg.any():
        return OrderVerdict("equivalent", None)
    if not neg.any():
        return OrderVerdict("succeeds", _first_time(times, pos))
    if not pos.any():
        return OrderVerdict("precedes", _first_time(times, neg))
    first_sign = pos[np.flatnonzero(pos | neg)[0]]
    reversal = neg if first_sign else pos
    return OrderVerdict("incomparable", _first_time(times, reversal))


def _check_shared_datum(a: Trajectory, b: Trajectory) -> None:
    if not a.datum.equals(b.datum):
        raise DatumMismatchError(f"{a.id} and {b.id} start from different data")


def _merged_node_times(a: Trajectory, b: Trajectory) -> np.ndarray:
    horizon = min(a.horizon, b.horizon)
    ts = np.unique(np.concatenate([a.times, b.times]))
    return ts[ts <= horizon * (1 + 1e-12)]


def order_sigma(first: Trajectory, second: Trajectory, tol: float = 1e-10) -> OrderVerdict:
    """Compare entropy production ``sigma(t+-)`` at every node and side."""
    _check_shared_datum(first, second)
    times, diffs = [], []
    for t in _merged_node_times(first, second):
        for side in ("left", "right"):
            times.append(t)
            diffs.append(entropy_production(first, t, side) - entropy_production(second, t, side))
    return _verdict_from_differences(times, diffs, tol)


def _agreement_time(first: Trajectory, second: Trajectory, tol: float):
    """Largest node time tau with agreement of full states on [0, tau], or None if identical.

    Returns ``(tau, index)`` with ``index`` the position of tau in the merged node list.
    """
    times = _merged_node_times(first, second)

    def same(side, t):
        a = evaluate(first, t, side).state.fields()
        b = evaluate(second, t, side).state.fields()
        return float(np.max(np.abs(a - b))) <= tol

    for i, t in enumerate(times):
        if not same("left", t):
            return (times[i - 1] if i else 0.0), max(i - 1, 0), times
        if not same("right", t):
            return t, i, times
    return None, None, times


def _entropy_window(first, second, times, start, K):
    ts = times[start : start + K + 1]
    d = [
        first.grid.integrate(evaluate(first, t).state.S) - second.grid.integrate(evaluate(second, t).state.S)
        for t in ts
    ]
    return ts, np.array(d)


def _dominates_D(d, tol) -> bool:
    return bool(np.all(d >= -tol))


def _dominates_F(d, tol, block) -> bool:
    """Dominance recurs in every complete block of ``block`` consecutive samples."""
    if len(d) == 0:
        return True
    ok = d >= -tol
    if len(ok) < block:
        return bool(ok.any())
    n_full = len(ok) - len(ok) % block
    return all(ok[i : i + block].any() for i in range(0, n_full, block))


def _window_verdict_D(ts, d, tol, tau) -> OrderVerdict:
    v = _verdict_from_differences(ts, d, tol)
    return OrderVerdict(v.relation, v.witness if v.witness is not None else tau, tau)


def _window_verdict_F(ts, d, tol, block, tau) -> OrderVerdict:
    if np.all(np.abs(d) <= tol):
        return OrderVerdict("equivalent", tau, tau)
    fwd, bwd = _dominates_F(d, tol, block), _dominates_F(-d, tol, block)
    if fwd:
        return OrderVerdict("succeeds", tau, tau)
    if bwd:
        return OrderVerdict("precedes", tau, tau)
    return OrderVerdict("incomparable", _first_time(ts, d < -tol), tau)


def order_dafermos(first: Trajectory, second: Trajectory, tol: float = 1e-10, K: int = 6) -> OrderVerdict:
    """Agreement up to tau, then one-sided total-entropy dominance on the next K nodes."""
    _check_shared_datum(first, second)
    tau, i, times = _agreement_time(first, second, tol)
    if tau is None:
        return OrderVerdict("equivalent", None, times[-1])
    ts, d = _entropy_window(first, second, times, i, K)
    return _window_verdict_D(ts, d, tol, tau)


def order_F(first: Trajectory, second: Trajectory, tol: float = 1e-10, K: int = 6, block: int = 2) -> OrderVerdict:
    """Weaker order: entropy dominance recurs in every block of nodes after tau.

    ``succeeds`` means ``first`` dominates somewhere in every block; for
    trajectories oscillating around each other both directions succeed.
    """
    _check_shared_datum(first, second)
    tau, i, times = _agreement_time(first, second, tol)
    if tau is None:
        return OrderVerdict("equivalent", None, times[-1])
    ts, d = _entropy_window(first, second, times, i, K)
    return _window_verdict_F(ts, d, tol, block, tau)


def history_order_D(F: ScalarHistory, G: ScalarHistory, tol: float = 1e-12, K: int = 6) -> OrderVerdict:
    n = min(len(F.times), len(G.times), K + 1)
    ts = F.times[:n]
    d = np.array([F.value_right(t) - G.value_right(t) for t in ts])
    return _window_verdict_D(ts, d, tol, 0.0)


def history_order_F(
    F: ScalarHistory, G: ScalarHistory, tol: float = 1e-12, K: int = 6, block: int = 2
) -> OrderVerdict:
    n = min(len(F.times), len(G.times), K + 1)
    ts = F.times[:n]
    d = np.array([F.value_right(t) - G.value_right(t) for t in ts])
    return _window_verdict_F(ts, d, tol, block, 0.0)


def sigma_dominators(selected: Trajectory, candidates, tol: float = 1e-10) -> list[str]:
    """Ids of candidates that strictly dominate ``selected`` in entropy production."""
    return [
        tr.id
        for tr in candidates
        if tr.id != selected.id and order_sigma(tr, selected, tol).relation == "succeeds"
    ]


# -- audits ------------------------------------------------------------------------------


@dataclass(frozen=True)
class DichotomyReport:
    hypothesis_holds: bool
    hypothesis_failures: tuple[tuple[str, float], ...]
    verdicts: dict
    maximal: bool


def dichotomy_audit(
    family: Mapping[str, ScalarHistory],
    F: str,
    params: SelectionParams = SelectionParams(),
    tol: float = 1e-12,
    K: int = 6,
    block: int = 2,
) -> DichotomyReport:
    """Check the dichotomy for a Laplace-maximal entropy history ``family[F]``.

    If ``F`` maximizes every ``lambda_n``-Laplace value then each other member
    ``G`` must satisfy ``F >_D G`` or ``F ~_F G``; ``maximal`` reports whether
    that holds.  A failed hypothesis is reported, not raised.
    """
    f = family[F]
    failures = []
    for n in range(params.n_funcs + 1):
        lam = params.lam(n)
        lf = laplace_of_history(f, lam)
        for name, g in family.items():
            if name == F:
                continue
            lg = laplace_of_history(g, lam)
            if lf.value - lg.value < -(lf.tail + lg.tail) - tol:
                failures.append((name, lam))
    verdicts = {}
    for name, g in family.items():
        if name == F:
            continue
        if history_order_D(f, g, tol, K).relation in ("succeeds", "equivalent"):
            verdicts[name] = "dafermos"
        elif (
            history_order_F(f, g, tol, K, block).relation in ("succeeds", "equivalent")
            and history_order_F(g, f, tol, K, block).relation in ("succeeds", "equivalent")
        ):
            verdicts[name] = "F-equivalent"
        else:
            verdicts[name] = "violation"
    holds = not failures
    maximal = holds and all(v != "violation" for v in verdicts.values())
    return DichotomyReport(holds, tuple(failures), verdicts, maximal)


@dataclass(frozen=True)
class SeparationResult:
    stage: int | None
    lam: float | None
    value: float | None
    certificate: float | None

    @property
    def distinguished(self) -> bool:
        return self.stage is not None


def separation_audit(
    f1: ScalarHistory,
    f2: ScalarHistory,
    params: SelectionParams = SelectionParams(),
    K: int | None = None,
    quad_tol: float = 1e-12,
) -> SeparationResult:
    """First stage ``n <= K`` whose Laplace value separates ``f1`` from ``f2``.

    Separation requires ``|L(f1 - f2)(lambda_n)|`` to exceed the combined tail
    certificate plus ``quad_tol``.
    """
    K = params.n_funcs if K is None else K
    for n in range(K + 1):
        lam = params.lam(n)
        a, b = laplace_of_history(f1, lam), laplace_of_history(f2, lam)
        diff = a.value - b.value
        cert = a.tail + b.tail + quad_tol
        if abs(diff) > cert:
            return SeparationResult(n, lam, diff, cert)
    return SeparationResult(None, None, None, None)


@dataclass(frozen=True)
class SemiflowReport:
    distance: float
    passed: bool
    first_selection: str | None
    second_selection: str | None


def semiflow_audit(
    datum: InitialDatum,
    t1: float,
    t2: float,
    suite: Sequence[SchemeConfig],
    params: SelectionParams = SelectionParams(),
    gas: GasConstants = GasConstants(),
    tol: float = 1e-10,
) -> SemiflowReport:
    """Compare ``U[t1 + t2; U0]`` with ``U[t2; U[t1; U0]]`` in the l1loc metric."""
    if t1 == 0:
        return SemiflowReport(0.0, True, None, None)
    full = sieve_select(generate_candidates(datum, with_horizon(suite, t1 + t2), gas), params).selected
    restart_state = evaluate(full, t1, "left").state
    restart = InitialDatum(restart_state, datum.E0)
    restart.validate(gas)
    second = sieve_select(generate_candidates(restart, with_horizon(suite, t2), gas), params).selected
    d = l1loc_distance(time_shift(full, t1), second, t2)
    return SemiflowReport(d, d <= tol, full.id, second.id)

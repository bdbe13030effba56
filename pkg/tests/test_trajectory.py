import math

import numpy as np
import pytest

from conftest import constant_entropy_trajectory, random_trajectory
from euler_semiflow.errors import ContinuationError, DomainError, GridMismatchError, HorizonError
from euler_semiflow.solver import SchemeConfig, equilibrium_datum, simulate, sod_datum
from euler_semiflow.state import FluidState, Grid, InitialDatum, negative_norm
from euler_semiflow.thermo import GasConstants
from euler_semiflow.trajectory import (
    check_trajectory,
    concatenate,
    entropy_production,
    evaluate,
    l1loc_distance,
    renormalized_entropy_residual,
    time_shift,
    total_entropy_series,
)

GAS = GasConstants()
GRID = Grid(8)


def jump_fixture(t_jump_tick=1, n=4, time_unit=1.0):
    """S = 0 before the jump node, S = 1 from its right value on."""
    S_left = [0.0 if k <= t_jump_tick else 1.0 for k in range(n)]
    S_right = [0.0 if k < t_jump_tick else 1.0 for k in range(n)]
    return constant_entropy_trajectory(GRID, range(n), time_unit, S_left, S_right)


def constant_fixture(n=5, time_unit=0.5):
    return constant_entropy_trajectory(GRID, range(n), time_unit, [0.0] * n, [0.0] * n, id="const")


class TestEvaluate:
    def test_constant(self):
        tr = constant_fixture()
        for t in (0.0, 0.3, 0.5, 1.7, 2.0):
            for side in ("left", "right"):
                assert evaluate(tr, t, side).state.equals(tr.datum.state)

    def test_left_at_zero_is_datum(self):
        tr = jump_fixture(0)
        assert np.array_equal(evaluate(tr, 0, "left").state.S, tr.datum.state.S)
        assert np.all(evaluate(tr, 0, "right").state.S == 1.0)

    def test_jump(self):
        tr = jump_fixture(1)
        assert np.all(evaluate(tr, 1.0, "left").state.S == 0.0)
        assert np.all(evaluate(tr, 1.0, "right").state.S == 1.0)
        assert np.all(evaluate(tr, 0.5).state.S == 0.0)
        assert np.all(evaluate(tr, 1.5).state.S == 1.0)

    def test_beyond_horizon(self):
        with pytest.raises(HorizonError):
            evaluate(jump_fixture(), 3.5)
        with pytest.raises(HorizonError):
            evaluate(jump_fixture(), -1)

    def test_bad_side(self):
        with pytest.raises(DomainError):
            evaluate(jump_fixture(), 1.0, "up")


class TestConstruction:
    def test_density_must_be_continuous(self):
        tr = jump_fixture()
        bad_right = list(tr.right)
        st = bad_right[2].state
        bad_right[2] = type(bad_right[2])(FluidState(st.grid, st.rho * 1.1, st.m, st.S), bad_right[2].defects)
        with pytest.raises(DomainError):
            type(tr)(tr.datum, tr.ticks, tr.time_unit, tr.left, bad_right, "bad")

    def test_ticks_increase(self):
        tr = jump_fixture()
        with pytest.raises(DomainError):
            type(tr)(tr.datum, [0, 2, 1, 3], tr.time_unit, tr.left, tr.right, "bad")


class TestShift:
    def test_constant_invariant(self):
        tr = constant_fixture()
        sh = time_shift(tr, 1.0)
        assert all(s.equals(tr.right[0]) for s in sh.right)
        assert sh.datum.state.equals(tr.datum.state)

    def test_jump_moves(self):
        tr = jump_fixture(2)
        sh = time_shift(tr, 1.0)
        assert np.all(evaluate(sh, 1.0, "left").state.S == 0.0)
        assert np.all(evaluate(sh, 1.0, "right").state.S == 1.0)
        assert evaluate(sh, 1.0, "left").equals(evaluate(tr, 2.0, "left"))

    def test_between_nodes(self):
        tr = jump_fixture(2, time_unit=0.5)
        sh = time_shift(tr, 0.5)
        assert sh.horizon == pytest.approx(1.0)

    def test_composition(self):
        tr = jump_fixture(2, n=6)
        a = time_shift(time_shift(tr, 1.0), 2.0)
        b = time_shift(tr, 3.0)
        assert a.same_nodes(b) and a.id == b.id

    def test_errors(self):
        tr = jump_fixture()
        with pytest.raises(HorizonError):
            time_shift(tr, 3.0)
        with pytest.raises(DomainError):
            time_shift(tr, 0.0)
        with pytest.raises(DomainError):
            time_shift(tr, 0.37)


class TestConcatenate:
    def test_self_continuation(self):
        tr = jump_fixture(2, n=6)
        for T in (1.0, 2.0, 3.0):
            assert concatenate(tr, T, time_shift(tr, T)).same_nodes(tr)

    def test_left_value_from_first(self):
        tr = jump_fixture(2, n=6)
        glued = concatenate(tr, 2.0, time_shift(tr, 2.0))
        assert evaluate(glued, 2.0, "left").equals(evaluate(tr, 2.0, "left"))

    def test_mismatched_datum(self):
        tr = jump_fixture(2, n=6)
        other = constant_entropy_trajectory(GRID, range(3), 1.0, [0.5] * 3, [0.5] * 3)
        with pytest.raises(ContinuationError):
            concatenate(tr, 1.0, other)

    def test_monotone_entropy_preserved(self):
        gas = GasConstants(s0=-1.0)
        grid = Grid(100)
        cfg = SchemeConfig("lax_friedrichs", 0.0, 0.5, 100, 1.0, 0.1, 0.01)
        first = simulate(sod_datum(grid, gas), cfg, gas)
        restart = InitialDatum(evaluate(first, 0.05, "left").state, first.E0)
        second = simulate(restart, SchemeConfig("hllc", 0.0, 0.5, 100, 1.0, 0.05, 0.01), gas)
        glued = concatenate(first, 0.05, second)
        left, right = total_entropy_series(glued)
        seq = np.ravel(np.column_stack([left, right]))
        assert np.all(np.diff(seq) >= -1e-12)
        assert all(r.passed for r in check_trajectory(glued, gas))


class TestDistance:
    def test_self_and_symmetry(self, rng):
        a = random_trajectory(rng, GRID, n_nodes=5)
        b = random_trajectory(np.random.default_rng(7), GRID, n_nodes=5)
        assert l1loc_distance(a, a) == 0.0
        h = min(a.horizon, b.horizon)
        assert l1loc_distance(a, b, h) == pytest.approx(l1loc_distance(b, a, h), rel=1e-14)

    def test_constant_entropy_gap(self):
        # S = 1 vs S = 0 on [0, 1]: the S-weighted negative norm of a constant 1 is sqrt(L)
        one = constant_entropy_trajectory(GRID, range(3), 0.5, [1.0] * 3, [1.0] * 3)
        zero = constant_entropy_trajectory(GRID, range(3), 0.5, [0.0] * 3, [0.0] * 3)
        w = 0.7
        d = l1loc_distance(one, zero, 1.0, weights=(0.0, 0.0, w))
        assert d == pytest.approx(min(1.0, w * math.sqrt(GRID.L)), rel=1e-12)
        assert negative_norm(GRID, np.ones(GRID.N)) == pytest.approx(1.0, rel=1e-12)

    def test_long_horizon_terms(self):
        one = constant_entropy_trajectory(GRID, range(5), 1.0, [1.0] * 5, [1.0] * 5)
        zero = constant_entropy_trajectory(GRID, range(5), 1.0, [0.0] * 5, [0.0] * 5)
        w = 0.1
        d = l1loc_distance(one, zero, 4.0, weights=(0, 0, w))
        expected = sum(2.0**-k * min(1.0, w * min(4, k)) for k in range(1, 200))
        assert d == pytest.approx(expected, rel=1e-12)

    def test_grid_mismatch(self):
        other = constant_entropy_trajectory(Grid(9), range(3), 0.5, [0.0] * 3, [0.0] * 3)
        with pytest.raises(GridMismatchError):
            l1loc_distance(constant_fixture(), other, 1.0)


class TestEntropyDiagnostics:
    def test_equilibrium_sigma_zero(self):
        grid = Grid(32)
        tr = simulate(equilibrium_datum(grid), SchemeConfig("hllc", N=32, t_end=0.1, dt_out=0.02))
        assert all(entropy_production(tr, t) == 0.0 for t in tr.times)

    def test_jump_sigma(self):
        tr = jump_fixture(1)
        assert entropy_production(tr, 1.0, "left") == 0.0
        assert entropy_production(tr, 1.0, "right") == pytest.approx(1.0)

    def test_shock_sigma_positive(self):
        gas = GasConstants(s0=-1.0)
        tr = simulate(sod_datum(Grid(200), gas), SchemeConfig("rusanov", N=200, t_end=0.2, dt_out=0.05), gas)
        assert entropy_production(tr, 0.2) > 0

    def test_renormalized_constant_Z(self):
        gas = GasConstants(s0=-1.0)
        tr = simulate(sod_datum(Grid(100), gas), SchemeConfig("lax_friedrichs", N=100, t_end=0.1, dt_out=0.02), gas)
        r = renormalized_entropy_residual(tr, lambda s: np.full_like(s, 3.0))
        assert abs(r) <= 1e-12

    def test_renormalized_equilibrium(self):
        grid = Grid(32)
        tr = simulate(equilibrium_datum(grid), SchemeConfig("hllc", N=32, t_end=0.1, dt_out=0.02))
        Z = lambda s: np.clip(s, -10, 10)
        assert renormalized_entropy_residual(tr, Z) == 0.0

    def test_renormalized_shock_run(self):
        gas = GasConstants(s0=-1.0)
        tr = simulate(sod_datum(Grid(200), gas), SchemeConfig("lax_friedrichs", N=200, t_end=0.2, dt_out=0.01), gas)
        Z = lambda s: np.clip(s, -10, 10)
        scale = max(1.0, abs(tr.datum.state.total_entropy()))
        assert renormalized_entropy_residual(tr, Z) >= -1e-10 * scale

    def test_negative_test_function_rejected(self):
        with pytest.raises(DomainError):
            renormalized_entropy_residual(jump_fixture(), lambda s: s, -np.ones(GRID.N))


class TestChecks:
    def test_fixture_passes(self):
        assert all(r.passed for r in check_trajectory(jump_fixture(), GAS))

    def test_corrupt_ledger_detected(self, rng):
        tr = random_trajectory(rng, GRID)
        snaps = list(tr.right)
        d = snaps[1].defects
        snaps[1] = type(snaps[1])(snaps[1].state, type(d)(d.C_kin, d.C_int + 0.5, d.c_plus, d.c_minus))
        bad = type(tr)(tr.datum, tr.ticks, tr.time_unit, tr.left, snaps, "bad")
        verdict = {r.name: r.passed for r in check_trajectory(bad, GAS)}
        assert not verdict["energy_ledger"]


class TestRandomAlgebra:
    @pytest.mark.parametrize("seed", range(20))
    def test_shift_and_continuation(self, seed):
        rng = np.random.default_rng(seed)
        tr = random_trajectory(rng)
        assert all(r.passed for r in check_trajectory(tr, GAS)), check_trajectory(tr, GAS)
        last = int(tr.ticks[-1])
        a = int(rng.integers(1, last))
        b = int(rng.integers(1, last - a + 1)) if last - a > 1 else None
        u = tr.time_unit
        if b is not None and a + b < last:
            assert time_shift(time_shift(tr, a * u), b * u).same_nodes(time_shift(tr, (a + b) * u))
        T = int(rng.choice(tr.ticks[1:-1])) * u
        assert concatenate(tr, T, time_shift(tr, T)).same_nodes(tr)

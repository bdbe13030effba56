import numpy as np
import pytest

from euler_semiflow.riemann import RiemannDatum
from euler_semiflow.solver import default_suite, generate_candidates, sod_datum
from euler_semiflow.state import DefectState, FluidState, Grid, InitialDatum, Snapshot
from euler_semiflow.thermo import GasConstants
from euler_semiflow.trajectory import Trajectory

SOD = RiemannDatum((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
# the expansion-shock candidate dips below S = 0, so Sod sets use a lower floor
SOD_GAS = GasConstants(s0=-1.0)


def closing_snapshot(state: FluidState, E0: float, gas: GasConstants) -> Snapshot:
    deficit = E0 - state.total_energy(gas)
    assert deficit >= -1e-12
    return Snapshot(state, DefectState.internal(np.full(state.grid.N, max(deficit, 0.0) / state.grid.L)))


def constant_entropy_trajectory(
    grid, ticks, time_unit, S_left, S_right, gas=GasConstants(), rho=1.0, id="fixture", E0=None
):
    """Spatially constant rho, m = 0 and S given per node and side; E0 defaults to the largest energy."""
    ticks = list(ticks)
    S_all = list(S_left) + list(S_right)
    states = lambda vals: [FluidState.constant(grid, rho, 0.0, s) for s in vals]
    if E0 is None:
        E0 = max(st.total_energy(gas) for st in states(S_all))
    left = [closing_snapshot(st, E0, gas) for st in states(S_left)]
    right = [closing_snapshot(st, E0, gas) for st in states(S_right)]
    datum = InitialDatum(left[0].state, E0)
    return Trajectory(datum, ticks, time_unit, left, right, id)


def random_trajectory(rng, grid=None, gas=GasConstants(), n_nodes=None, id="rand"):
    """Random admissible fixture: fixed rho and m, random nondecreasing S with jumps at nodes."""
    grid = grid or Grid(int(rng.integers(4, 12)))
    n = n_nodes or int(rng.integers(3, 9))
    ticks = np.concatenate([[0], np.cumsum(rng.integers(1, 4, size=n - 1))])
    rho = rng.uniform(0.5, 2.0, grid.N)
    m = rng.normal(0, 0.3, grid.N)
    S0 = rho * rng.uniform(0.0, 0.5, grid.N)
    incr = np.cumsum(rng.uniform(0, 0.05, size=(2 * n, grid.N)), axis=0)
    fields = [S0 + rho * incr[j] for j in range(2 * n)]
    left_S = [S0] + [fields[2 * k - 1] for k in range(1, n)]
    right_S = [fields[2 * k] for k in range(n)]
    mk = lambda S: FluidState(grid, rho, m, S)
    E0 = max(mk(S).total_energy(gas) for S in left_S + right_S) * 1.01
    left = [closing_snapshot(mk(S), E0, gas) for S in left_S]
    right = [closing_snapshot(mk(S), E0, gas) for S in right_S]
    return Trajectory(InitialDatum(mk(S0), E0), ticks, float(rng.choice([0.01, 0.1, 0.25])), left, right, id)


@pytest.fixture(scope="session")
def sod_set_400():
    grid = Grid(400)
    datum = sod_datum(grid, SOD_GAS)
    return generate_candidates(datum, default_suite(400, 0.2, 0.01), SOD_GAS)


def entropy_path_pair(F_right, G_right, time_unit=1.0, id_F="F", id_G="G", grid=Grid(4)):
    """Two fixtures from the datum S = 0 whose entropy jumps at nodes to the given right values.

    Between nodes the entropy is constant, so each left value is the previous right value.
    Returned trajectories share their datum, including E0.
    """
    L = grid.L
    vals = [v / L for v in list(F_right) + list(G_right)] + [0.0]
    E0 = max(FluidState.constant(grid, 1.0, 0.0, s).total_energy(GasConstants()) for s in vals)

    def build(right, id_):
        right = [v / L for v in right]
        left = [0.0] + right[:-1]
        return constant_entropy_trajectory(grid, range(len(right)), time_unit, left, right, id=id_, E0=E0)

    return build(F_right, id_F), build(G_right, id_G)


def sod_pair(N=400, t_end=0.2, dt_out=0.01):
    """The exact Sod solution and its expansion-shock rival on a shared datum."""
    from euler_semiflow.riemann import riemann_exact_trajectory, riemann_initial_datum, riemann_nonentropy

    datum = riemann_initial_datum(SOD, Grid(N), SOD_GAS)
    n = int(round(t_end / dt_out))
    return (
        riemann_exact_trajectory(SOD, datum, n, dt_out, SOD_GAS),
        riemann_nonentropy(SOD, datum, n, dt_out, SOD_GAS),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.acceptance_lines():
        terminalreporter.write_line(line)

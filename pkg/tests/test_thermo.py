import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from euler_semiflow.errors import DomainError
from euler_semiflow.thermo import (
    INFINITE_ENERGY,
    GasConstants,
    ThermoPoint,
    entropy_from_conserved,
    entropy_from_primitive,
    internal_energy_density,
    kinetic_energy_density,
    pressure,
    pressure_hessian,
    pressure_hessian_determinant,
    stated_determinant,
    temperature,
    total_energy_density,
)

GAS = GasConstants()
CV = GAS.c_v


def fd_hessian(rho, S, gas=GAS, h=1e-4):
    """Central second differences with steps scaled to each variable."""
    hr = h * rho
    hs = h * rho * gas.c_v
    p = lambda r, s: pressure(r, s, gas)
    f0 = p(rho, S)
    prr = (p(rho + hr, S) - 2 * f0 + p(rho - hr, S)) / hr**2
    pss = (p(rho, S + hs) - 2 * f0 + p(rho, S - hs)) / hs**2
    prs = (p(rho + hr, S + hs) - p(rho + hr, S - hs) - p(rho - hr, S + hs) + p(rho - hr, S - hs)) / (4 * hr * hs)
    H = np.empty(np.shape(rho) + (2, 2))
    H[..., 0, 0], H[..., 0, 1], H[..., 1, 0], H[..., 1, 1] = prr, prs, prs, pss
    return H


def sample_states(n, rng):
    rho = 10 ** rng.uniform(-3, 3, n)
    S = rho * rng.uniform(-10, 10, n)
    return rho, S


class TestGasConstants:
    def test_cv(self):
        assert GAS.c_v == pytest.approx(2.5, rel=1e-15)
        assert GasConstants(5 / 3).c_v == pytest.approx(1.5, rel=1e-15)

    def test_gamma_must_exceed_one(self):
        with pytest.raises(DomainError):
            GasConstants(1.0)


class TestPressure:
    def test_unit_state(self):
        assert pressure(1.0, 0.0) == 1.0

    def test_vacuum_nonpositive_entropy(self):
        assert pressure(0.0, -1.0) == 0.0
        assert pressure(0.0, 0.0) == 0.0

    def test_vacuum_positive_entropy_is_sentinel(self):
        assert pressure(0.0, 1.0) == INFINITE_ENERGY

    def test_power_law(self):
        # 2**1.4 = 2 * 2**(2/5); fifth power of 2**1.4 is 2**7
        value = pressure(2.0, 0.0)
        assert value == pytest.approx(2.639016, abs=1e-6)
        assert value**5 == pytest.approx(2.0**7, rel=1e-13)

    def test_overflow_maps_to_sentinel(self):
        assert pressure(1.0, 1e4) == INFINITE_ENERGY
        assert pressure(1e-3, 1e2) == INFINITE_ENERGY

    def test_negative_density_rejected(self):
        with pytest.raises(DomainError):
            pressure(-1.0, 0.0)

    def test_vectorised(self):
        out = pressure(np.array([1.0, 2.0]), np.array([0.0, 0.0]))
        assert out.shape == (2,)


class TestEnergies:
    def test_internal(self):
        assert internal_energy_density(1.0, 0.0) == pytest.approx(2.5)
        assert internal_energy_density(0.0, 0.0) == 0.0
        assert internal_energy_density(1.0, CV) == pytest.approx(2.5 * math.e, rel=1e-14)
        assert internal_energy_density(1.0, CV) == pytest.approx(6.795705, abs=1e-6)

    def test_kinetic(self):
        assert kinetic_energy_density(2.0, 2.0) == 1.0
        assert kinetic_energy_density(0.0, 0.0) == 0.0
        assert kinetic_energy_density(0.5, 3.0) == 9.0
        assert kinetic_energy_density(0.0, 1.0) == INFINITE_ENERGY

    def test_total(self):
        assert total_energy_density(1.0, 0.0, 0.0) == pytest.approx(2.5)
        assert total_energy_density(1.0, 1.0, 0.0) == pytest.approx(3.0)
        assert total_energy_density(0.0, 0.0, -1.0) == 0.0


class TestTemperatureEntropy:
    def test_temperature(self):
        assert temperature(1.0, 0.0) == pytest.approx(1.0)
        assert temperature(1.0, CV) == pytest.approx(math.e, rel=1e-14)
        assert temperature(2.0, 0.0) == pytest.approx(2**0.4, rel=1e-14)
        assert temperature(2.0, 0.0) == pytest.approx(1.319508, abs=1e-6)

    def test_temperature_needs_density(self):
        with pytest.raises(DomainError):
            temperature(0.0, 0.0)

    def test_specific_entropy(self):
        assert entropy_from_primitive(1.0, 1.0) == 0.0
        assert entropy_from_primitive(1.0, math.e) == pytest.approx(2.5, rel=1e-15)
        assert entropy_from_primitive(math.e, 1.0) == pytest.approx(-1.0, rel=1e-15)

    def test_specific_entropy_domain(self):
        with pytest.raises(DomainError):
            entropy_from_primitive(1.0, 0.0)
        with pytest.raises(DomainError):
            entropy_from_primitive(0.0, 1.0)

    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
    def test_round_trip(self, rho, theta):
        s = entropy_from_primitive(rho, theta)
        assert temperature(rho, rho * s) == pytest.approx(theta, rel=1e-12)

    @given(st.floats(1e-2, 1e2), st.floats(-10, 10), st.floats(-5, 5))
    def test_conserved_inversion(self, rho, s, u):
        S, m = rho * s, rho * u
        E = total_energy_density(rho, m, S)
        assert entropy_from_conserved(rho, m, E) == pytest.approx(S, rel=1e-9, abs=1e-9)


class TestThermoPoint:
    def test_minimum_entropy(self):
        ThermoPoint(1.0, 0.0, 0.0).validate(GAS)
        with pytest.raises(DomainError):
            ThermoPoint(1.0, 0.0, -0.1).validate(GAS)

    def test_vacuum(self):
        ThermoPoint(0.0, 0.0, -1.0).validate(GAS)
        with pytest.raises(DomainError):
            ThermoPoint(0.0, 1.0, 0.0).validate(GAS)
        with pytest.raises(DomainError):
            ThermoPoint(0.0, 0.0, 1.0).validate(GAS)
        ThermoPoint(0.0, 0.0, 1.0).validate(GAS, allow_infinite=True)

    def test_negative_density(self):
        with pytest.raises(DomainError):
            ThermoPoint(-1.0).validate(GAS)


class TestHessian:
    def test_unit_state(self):
        H = pressure_hessian(1.0, 0.0)
        fd = fd_hessian(1.0, 0.0)
        assert H[1, 1] == pytest.approx(0.16, rel=1e-12)
        assert fd[1, 1] == pytest.approx(0.16, rel=1e-5)
        # p_rr = gamma (gamma - 1), p_rS = (gamma - 1) / c_v at the unit state
        np.testing.assert_allclose(H, [[0.56, 0.16], [0.16, 0.16]], rtol=1e-12)
        assert np.linalg.det(H) == pytest.approx(0.064, rel=1e-12)
        assert np.linalg.det(fd) == pytest.approx(0.064, rel=1e-5)

    def test_stated_determinant_disagrees(self):
        # the quoted closed form misses (gamma - 1) p / rho**4
        assert stated_determinant(1.0, 0.0) == pytest.approx(0.16)
        assert np.linalg.det(fd_hessian(1.0, 0.0)) != pytest.approx(0.16, rel=1e-2)

    def test_matches_finite_differences(self, rng):
        rho, S = sample_states(200, rng)
        H, F = pressure_hessian(rho, S), fd_hessian(rho, S)
        err = np.linalg.norm(H - F, axis=(1, 2)) / np.linalg.norm(H, axis=(1, 2))
        assert err.max() <= 1e-5

    def test_determinant_closed_form(self, rng):
        rho, S = sample_states(200, rng)
        H = pressure_hessian(rho, S)
        det = H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] ** 2
        np.testing.assert_allclose(det, pressure_hessian_determinant(rho, S), rtol=1e-10)

    @given(st.floats(1e-3, 1e3), st.floats(-10, 10))
    def test_positive_definite(self, rho, s):
        H = pressure_hessian(rho, rho * s)
        assert np.all(np.linalg.eigvalsh(H / np.abs(H).max()) > 0)
        assert np.trace(H) > 0

    def test_vacuum_rejected(self):
        with pytest.raises(DomainError):
            pressure_hessian(0.0, 0.0)


class TestConvexityConsequences:
    @settings(max_examples=200)
    @given(
        st.lists(
            st.tuples(st.floats(1e-2, 10), st.floats(-5, 5), st.floats(-3, 3), st.floats(0.01, 1)),
            min_size=1,
            max_size=6,
        )
    )
    def test_jensen(self, atoms):
        rho = np.array([a[0] for a in atoms])
        m = np.array([a[1] for a in atoms])
        S = rho * np.array([a[2] for a in atoms])
        w = np.array([a[3] for a in atoms])
        w /= w.sum()
        mean = total_energy_density(w @ rho, w @ m, w @ S)
        assert mean <= w @ total_energy_density(rho, m, S) * (1 + 1e-12) + 1e-12

    def test_momentum_bound_constant(self, rng):
        # weighted AM-GM gives sup = th**th (1-th)**(1-th) with th = 1/(gamma+1)
        g = GAS.gamma
        rho = 10 ** rng.uniform(-3, 3, 200_000)
        m = rng.choice([-1, 1], rho.size) * 10 ** rng.uniform(-4, 4, rho.size)
        ratio = np.abs(m) ** (2 * g / (g + 1)) / (rho**g + m**2 / rho)
        th = 1 / (g + 1)
        sup = th**th * (1 - th) ** (1 - th)
        assert ratio.max() <= sup * (1 + 1e-12)
        assert ratio.max() >= 0.99 * sup
        assert sup <= 1.0

    def test_entropy_bound_constants(self, rng):
        g = GAS.gamma
        rho = 10 ** rng.uniform(-3, 3, 200_000)
        x = rng.uniform(0, 40, rho.size)
        S = rho * x
        p = pressure(rho, S)
        c1 = (g * CV) ** g * math.exp(-g)
        c2 = (2 * g * CV) ** (2 * g) * math.exp(-2 * g)
        r1 = S**g / p
        r2 = (S / np.sqrt(rho)) ** (2 * g) / p
        assert r1.max() <= c1 * (1 + 1e-12)
        assert r2.max() <= c2 * (1 + 1e-12)
        assert r1.max() >= 0.99 * c1 and r2.max() >= 0.99 * c2

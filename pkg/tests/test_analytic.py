"""Tests for the closed-form reference formulas."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from quantum_dynamo.analytic import (
    KondoParams,
    OneModeParams,
    adiabatic_renormalized_sz,
    bethe_c1,
    bethe_sx,
    dynamo_predictions,
    free_spin,
    free_spin_sz_dot,
    frozen_field,
    gkls_orbit,
    kondo_scale,
    one_mode_energies,
    one_mode_weak_energy_dis,
    one_mode_weak_field,
    orbit_partner,
    orbit_state,
    renormalized_tunneling,
)
from quantum_dynamo.exceptions import DomainError
from quantum_dynamo.model.params import ModelParams


def _schrodinger_free(H: float, v: float, t: np.ndarray) -> np.ndarray:
    """Bloch vector of the free spin by direct integration."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0 + 0j, -1.0])

    def rhs(tt, psi):
        h = -(H / 2) * (np.cos(v * tt) * sz + np.sin(v * tt) * sx)
        return -1j * h @ psi

    sol = solve_ivp(rhs, (0, t[-1]), np.array([1.0 + 0j, 0.0]), t_eval=t, method="DOP853", rtol=1e-12, atol=1e-12)
    psi = sol.y
    return np.array([np.real(np.einsum("in,ij,jn->n", psi.conj(), op, psi)) for op in (sx, sy, sz)])


class TestFreeSpin:
    def test_matches_schrodinger_equation(self):
        t = np.linspace(0, 20, 81)
        sx, sy, sz = free_spin(t, 1.0, 0.7)
        reference = _schrodinger_free(1.0, 0.7, t)
        np.testing.assert_allclose(np.stack([sx, sy, sz]), reference, atol=1e-8)

    def test_sy_reaches_one(self):
        W = np.sqrt(2.0)
        _, sy, _ = free_spin(np.pi / W, 1.0, 1.0)
        assert sy == pytest.approx(1.0)

    def test_unit_length(self):
        sx, sy, sz = free_spin(np.linspace(0, 50, 200), 1.0, 0.3)
        np.testing.assert_allclose(sx**2 + sy**2 + sz**2, 1.0)

    def test_slow_drive_follows_field(self):
        t = np.linspace(0, np.pi / 0.01, 400)
        _, _, sz = free_spin(t, 1.0, 0.01)
        assert np.max(np.abs(sz - np.cos(0.01 * t))) < 2e-2

    def test_sz_dot_is_derivative(self):
        t = np.linspace(0, 10, 10001)
        _, _, sz = free_spin(t, 1.0, 0.5)
        numeric = np.gradient(sz, t)
        np.testing.assert_allclose(free_spin_sz_dot(t, 1.0, 0.5)[1:-1], numeric[1:-1], atol=1e-5)


class TestOneMode:
    def test_resonant_flag(self):
        assert OneModeParams(omega=0.04, g=0.01, v=0.04).resonant
        assert not OneModeParams(omega=0.05, g=0.01, v=0.04).resonant

    def test_resonant_field_envelope(self):
        pm = OneModeParams(omega=0.04, g=0.01, v=0.04)
        t = np.array([0.0, np.pi / 0.08])
        h = one_mode_weak_field(t, pm)
        assert h[0] == pytest.approx(-0.01**2 / 0.04)
        assert h[1] == pytest.approx(-0.5 * 0.01**2 * t[1])

    def test_off_resonance_tends_to_resonance(self):
        t = np.linspace(0, 300, 50)
        resonant = one_mode_weak_field(t, OneModeParams(omega=0.04, g=0.01, v=0.04))
        near = one_mode_weak_field(t, OneModeParams(omega=0.04 * (1 + 1e-6), g=0.01, v=0.04))
        np.testing.assert_allclose(near, resonant, atol=1e-6)

    def test_off_resonance_starts_from_preparation(self):
        p1 = OneModeParams(omega=0.1, g=0.02, v=0.04)
        p2 = OneModeParams(omega=0.1, g=0.02, v=0.04, preparation="P2")
        assert one_mode_weak_field(0.0, p1) == pytest.approx(-0.02**2 / 0.1)
        assert one_mode_weak_field(0.0, p2) == pytest.approx(0.0)

    def test_energies_at_half_periods(self):
        pm = OneModeParams(omega=0.04, g=0.01, v=0.04)
        t = np.array([np.pi / 0.04, 2 * np.pi / 0.04])
        e_dyn, w_dr, e_fluct = one_mode_energies(t, pm)
        n = np.array([1, 2])
        np.testing.assert_allclose(e_dyn, n**2 * 0.01**2 * np.pi**2 / (16 * 0.04))
        np.testing.assert_allclose(w_dr, e_dyn)
        np.testing.assert_allclose(e_fluct, 0.0, atol=1e-15)

    def test_energies_start_at_zero(self):
        pm = OneModeParams(omega=0.04, g=0.01, v=0.04)
        for series in one_mode_energies(np.array([0.0]), pm):
            assert series[0] == 0.0

    def test_quarter_period_difference(self):
        pm = OneModeParams(omega=0.04, g=0.01, v=0.04, preparation="P2")
        t = np.pi / (2 * 0.04)
        e_dyn, w_dr, _ = one_mode_energies(np.array([t]), pm)
        assert (w_dr - e_dyn)[0] == pytest.approx(0.01**2 / (32 * 0.04) * 4 * (1 - np.cos(np.pi)))

    def test_energies_need_resonance(self):
        with pytest.raises(DomainError):
            one_mode_energies(1.0, OneModeParams(omega=0.1, g=0.01, v=0.04))

    def test_dis_energy_starts_at_zero(self):
        pm = OneModeParams(omega=0.04, g=0.01, v=0.04)
        assert one_mode_weak_energy_dis(np.array([0.0]), pm)[0] == pytest.approx(0.0, abs=1e-15)

    def test_frozen_field(self):
        t = np.linspace(0, 100, 11)
        np.testing.assert_allclose(frozen_field(t, OneModeParams(omega=0.04, g=1.0, v=0.04)), -25.0)
        p2 = frozen_field(t, OneModeParams(omega=0.04, g=1.0, v=0.04, preparation="P2"))
        assert p2[0] == pytest.approx(0.0)


class TestKondo:
    def test_renormalized_tunneling(self):
        k = KondoParams(Delta=1.0, alpha=0.2, omega_c=100.0)
        assert renormalized_tunneling(k) == pytest.approx(0.01**0.25)

    def test_renormalized_tunneling_domain(self):
        with pytest.raises(DomainError):
            renormalized_tunneling(KondoParams(Delta=1.0, alpha=1.0, omega_c=100.0))

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 0.7])
    def test_bethe_range(self, alpha):
        with pytest.raises(DomainError):
            bethe_sx(KondoParams(Delta=1.0, alpha=alpha, omega_c=100.0))

    def test_c1_tends_to_one_for_small_alpha(self):
        assert bethe_c1(1e-6) == pytest.approx(1.0, abs=1e-3)

    def test_small_alpha_limit(self):
        k = KondoParams(Delta=1.0, alpha=1e-4, omega_c=100.0)
        _, T_K, _ = kondo_scale(k)
        assert T_K == pytest.approx(1.0, rel=1e-2)
        assert bethe_sx(k) == pytest.approx(1 - 1.0 / 100.0, abs=5e-3)

    def test_sx_in_unit_interval(self):
        values = [bethe_sx(KondoParams(Delta=1.0, alpha=a, omega_c=100.0)) for a in (0.05, 0.1, 0.2, 0.3)]
        assert all(0 < x < 1 for x in values)


class TestOrbits:
    def test_orbits_are_orthonormal(self):
        t = np.linspace(0, 100, 7)
        psi = orbit_state(t, 1.0, 0.3)
        partner = orbit_partner(t, 1.0, 0.3)
        np.testing.assert_allclose(np.sum(np.abs(psi) ** 2, axis=-1), 1.0)
        np.testing.assert_allclose(np.abs(np.sum(np.conj(psi) * partner, axis=-1)), 0.0, atol=1e-14)

    def test_orbit_bloch_coordinates(self):
        t = np.linspace(0, 100, 7)
        psi = orbit_state(t, 1.0, 0.3)
        rho12 = psi[..., 0] * np.conj(psi[..., 1])
        sx = 2 * rho12.real
        sy = -2 * rho12.imag
        sz = np.abs(psi[..., 0]) ** 2 - np.abs(psi[..., 1]) ** 2
        ox, oy, oz = gkls_orbit(t, 1.0, 0.3)
        np.testing.assert_allclose(sx, ox, atol=1e-12)
        np.testing.assert_allclose(sy, oy, atol=1e-12)
        np.testing.assert_allclose(sz, oz, atol=1e-12)

    def test_adiabatic_renormalized_sz(self):
        p = ModelParams(H=1.0, v=0.01, alpha=0.2, omega_c=100.0)
        t = np.array([0.0, np.pi / 0.02, np.pi / 0.01])
        sz = adiabatic_renormalized_sz(t, p)
        assert sz[0] == pytest.approx(1.0)
        assert sz[1] == pytest.approx(0.0, abs=1e-12)
        assert sz[2] == pytest.approx(-1.0)


class TestDynamoPredictions:
    def test_equal_field_and_drive(self):
        p = ModelParams(H=1.0, v=1.0, alpha=0.01, omega_c=100.0)
        pred = dynamo_predictions(p)
        assert pred.C_dyn == pytest.approx(1 / np.sqrt(2))
        assert pred.dE_dyn_half == pytest.approx(0.01 * np.pi**2 / 8)
        assert pred.dE_dyn_topological == pytest.approx(pred.dE_dyn_half)
        assert pred.dE_dyn_one_mode is None

    def test_zero_coupling(self):
        pred = dynamo_predictions(ModelParams(H=1.0, v=0.04, alpha=0.0))
        assert pred.W_flow == 0.0
        assert pred.dE_dyn_half == 0.0

    def test_one_mode_form(self):
        pred = dynamo_predictions(ModelParams(H=1.0, v=0.04), g=0.01)
        c2 = 1 / (1 + 0.04**2)
        assert pred.dE_dyn_one_mode == pytest.approx(0.01**2 * np.pi**2 / (16 * 0.04) * c2)

import math

import numpy as np
import pytest

from dualbath.bath import (BathKernels, BathParams, DiscreteBath,
                           QuadratureError, d_m, d_phase,
                           displacement_correlators, f_mqs, phi,
                           polaron_constants, psi, psi_offset,
                           spectral_density)


def bp(**kw):
    base = dict(kappa1=0.05, kappa2=0.0, kappa3=0.0, omega_c=2.0, beta=2.0)
    base.update(kw)
    return BathParams(**base)


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

def test_cauchy_schwarz_bound_enforced():
    with pytest.raises(ValueError, match="kappa2"):
        BathParams(kappa1=0.05, kappa2=0.1, kappa3=0.05, omega_c=2.0, beta=2.0)
    # boundary case is admissible
    BathParams(kappa1=0.05, kappa2=0.05, kappa3=0.05, omega_c=2.0, beta=2.0)


@pytest.mark.parametrize("field,value", [
    ("kappa1", -0.1), ("kappa3", -1.0), ("omega_c", 0.0), ("beta", -2.0),
])
def test_invalid_parameters_rejected(field, value):
    kw = dict(kappa1=0.05, kappa2=0.0, kappa3=0.0, omega_c=2.0, beta=2.0)
    kw[field] = value
    with pytest.raises(ValueError):
        BathParams(**kw)


# ---------------------------------------------------------------------------
# spectral density
# ---------------------------------------------------------------------------

def test_spectral_density_values():
    p = bp()
    assert spectral_density("TT", 0.0, p) == 0.0
    # kappa * w^3 e^{-w/wc}: 0.05 * 8 * e^{-1}
    assert spectral_density("TT", 2.0, p) == pytest.approx(0.05 * 8 * math.exp(-1), rel=1e-14)
    p2 = BathParams(kappa1=0.05, kappa2=0.02, kappa3=0.05, omega_c=2.0, beta=2.0)
    assert spectral_density("TS", 1.0, p2) == pytest.approx(0.02 * math.exp(-0.5), rel=1e-14)


def test_spectral_density_rejects_negative_frequency():
    with pytest.raises(ValueError):
        spectral_density("TT", -1.0, bp())


def test_unknown_channel_rejected():
    with pytest.raises(ValueError):
        spectral_density("XX", 1.0, bp())


# ---------------------------------------------------------------------------
# phi
# ---------------------------------------------------------------------------

def test_phi_at_zero_cold_limit():
    # phi1(0) -> kappa1 wc^2 = 0.2 as T -> 0
    p = bp(beta=1e6)
    val = phi(0.0, p)
    assert val == pytest.approx(0.2, abs=1e-9)
    assert abs(val.imag) < 1e-15


def test_phi_imaginary_part_closed_form():
    p = bp()
    # phi2(1) = 2 kappa1 t wc^3 / (1 + t^2 wc^2)^2 = 2*0.05*8/25
    assert complex(phi(1.0, p)).imag == pytest.approx(-0.032, abs=1e-14)


def test_phi_vanishes_without_coupling():
    p = bp(kappa1=0.0)
    t = np.linspace(0.0, 7.0, 23)
    assert np.max(np.abs(phi(t, p))) == 0.0


def test_phi_quadrature_matches_cold_closed_form():
    # pointwise-coth quadrature against the T = 0 closed form.  The lower
    # beta edge sits at 3e4, not 1e3: the exact thermal correction
    # 2 kappa psi'(1)/beta^2 already exceeds 1e-8 near beta = 1e3, so no
    # scheme could pass there.
    rng = np.random.default_rng(42)
    for draw in range(100):
        k1 = rng.uniform(0.005, 0.2)
        wc = rng.uniform(1.0, 3.0)
        beta = math.inf if draw % 4 == 0 else 10.0 ** rng.uniform(4.5, 6.0)
        t = rng.uniform(0.0, 3.0)
        p = BathParams(kappa1=k1, kappa2=0.0, kappa3=0.0, omega_c=wc, beta=beta)
        q = complex(phi(t, p, method="quadrature", nodes=400))
        x = (t * wc) ** 2
        phi1_cold = k1 * wc**2 * (1 - x) / (1 + x) ** 2
        phi2 = 2 * k1 * t * wc**3 / (1 + x) ** 2
        assert abs(q.real - phi1_cold) < 1e-8
        assert abs(q.imag + phi2) < 1e-8


def test_phi_quadrature_matches_thermal_closed_form():
    # at moderate beta the trigamma resummation and the quadrature agree
    for beta in (2.0, 20.0):
        p = bp(beta=beta)
        for t in (0.0, 0.7, 2.1):
            assert complex(phi(t, p, method="quadrature")) == pytest.approx(
                complex(phi(t, p)), abs=2e-9)


def test_phi_quadrature_detects_unresolved_oscillation():
    with pytest.raises(QuadratureError):
        phi(60.0, bp(), method="quadrature")


# ---------------------------------------------------------------------------
# polaron constants
# ---------------------------------------------------------------------------

def test_polaron_constants_cold_dressing():
    consts = polaron_constants(1.0, 0.6, bp(beta=1e8))
    assert consts.theta == pytest.approx(math.exp(-0.1), abs=1e-8)
    assert consts.j_tilde == pytest.approx(math.exp(-0.1), abs=1e-8)


def test_polaron_constants_renormalized_couplings():
    p = BathParams(kappa1=0.05, kappa2=0.02, kappa3=0.5, omega_c=2.0, beta=2.0)
    consts = polaron_constants(1.0, 0.6, p)
    assert consts.gamma_tilde == pytest.approx(0.6 - 2 * 0.02 * 8, rel=1e-14)
    p2 = BathParams(kappa1=0.0, kappa2=0.0, kappa3=0.5, omega_c=1.0, beta=2.0)
    assert polaron_constants(1.0, 0.0, p2).eta == pytest.approx(1.0, rel=1e-14)


def test_theta_is_one_iff_no_tt_coupling():
    assert polaron_constants(1.0, 0.0, bp(kappa1=0.0)).theta == 1.0
    for k1 in (1e-4, 0.05, 0.3):
        th = polaron_constants(1.0, 0.0, bp(kappa1=k1)).theta
        assert 0.0 < th < 1.0


# ---------------------------------------------------------------------------
# psi and the cross channel
# ---------------------------------------------------------------------------

def test_psi_low_temperature_value():
    p = BathParams(kappa1=0.0, kappa2=0.0, kappa3=0.5, omega_c=1.0, beta=100.0)
    assert complex(psi(0.0, p)).real == pytest.approx(0.5, abs=1e-3)


def test_psi_proportionality_shortcut():
    # psi1 = (kappa3/kappa1) phi1 for the shared cubic shape
    p = BathParams(kappa1=0.05, kappa2=0.02, kappa3=0.5, omega_c=2.0, beta=2.0)
    t = np.linspace(0.0, 6.0, 31)
    direct = psi(t, p)
    shortcut = (p.kappa3 / p.kappa1) * phi(t, p)
    assert np.max(np.abs(direct - shortcut)) < 1e-12


def test_psi_quadrature_agrees_with_shortcut():
    p = BathParams(kappa1=0.05, kappa2=0.02, kappa3=0.5, omega_c=2.0, beta=2.0)
    for t in (0.3, 1.1, 2.4):
        quad = complex(psi(t, p, method="quadrature"))
        shortcut = (p.kappa3 / p.kappa1) * complex(phi(t, p))
        assert abs(quad - shortcut) < 1e-9 * p.kappa3 * p.omega_c**2


def test_psi_offset_prefactor():
    p = BathParams(kappa1=0.05, kappa2=0.05, kappa3=0.05, omega_c=2.0, beta=2.0)
    t = np.linspace(0.0, 4.0, 17)
    assert np.max(np.abs(psi_offset(0, t, p))) == 0.0
    # equal couplings, m - n = 1: psi_off = phi1
    assert np.allclose(psi_offset(1, t, p), phi(t, p).real, atol=1e-13)


def test_psi_works_without_tt_coupling():
    p = BathParams(kappa1=0.0, kappa2=0.0, kappa3=0.5, omega_c=1.0, beta=5.0)
    assert np.isfinite(complex(psi(1.0, p)))


# ---------------------------------------------------------------------------
# initial-slip function d_m
# ---------------------------------------------------------------------------

def test_d_m_values():
    p = bp()
    assert d_m(0, 0.0, p) == pytest.approx(0.0)
    expected = np.exp(-1j * 0.032) - 1.0   # phase -phi2(1) for m = 0
    assert complex(d_m(0, 1.0, p)) == pytest.approx(expected, abs=1e-14)


def test_d_m_unimodular_and_decaying():
    p = BathParams(kappa1=0.05, kappa2=0.02, kappa3=0.05, omega_c=2.0, beta=2.0)
    t = np.linspace(0.0, 20.0, 400)
    d = d_m(np.arange(-5, 6), t, p)
    assert np.max(np.abs(np.abs(d + 1.0) - 1.0)) < 1e-12
    assert np.max(np.abs(d_m(np.arange(-5, 6), 1e3, p))) < 1e-4


def test_d_m_zero_without_tt_coupling():
    p = bp(kappa1=0.0)
    assert np.max(np.abs(d_m(np.arange(-3, 4), np.linspace(0, 9, 50), p))) == 0.0


def test_d_phase_matches_channel_split():
    p = BathParams(kappa1=0.05, kappa2=0.02, kappa3=0.05, omega_c=2.0, beta=2.0)
    t = 1.7
    lam = float(d_phase(3, t, p))
    sine_shape = 2 * t * 8 / (1 + 4 * t * t) ** 2   # per unit kappa
    expected = (2 * 3 * 0.02 - 0.05) * sine_shape
    assert lam == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# superposition phase function
# ---------------------------------------------------------------------------

def test_f_mqs_values(mqs_bath):
    assert f_mqs(0.0, mqs_bath) == pytest.approx(0.0)
    t = 1.685
    f = float(f_mqs(t, mqs_bath))
    assert f == pytest.approx(1.0 - 1.0 / (1 + t * t) ** 2, rel=1e-14)
    assert f == pytest.approx(0.9322, abs=2e-4)
    assert t * f == pytest.approx(math.pi / 2.0, abs=2e-4)
    assert float(f_mqs(1e6, mqs_bath)) == pytest.approx(1.0, abs=1e-10)


def test_f_mqs_monotone(mqs_bath):
    t = np.linspace(0.0, 50.0, 4000)
    f = f_mqs(t, mqs_bath)
    assert np.all(np.diff(f) >= 0.0)


def test_f_mqs_discrete_bath_matches_sum():
    db = DiscreteBath(omega=np.array([0.5, 1.5]), xi=np.zeros(2),
                      eta=np.array([0.3, 0.2]), beta=10.0)
    t = 2.0
    expected = sum(e**2 / w * (1 - math.sin(w * t) / (w * t))
                   for w, e in zip(db.omega, db.eta))
    assert float(f_mqs(t, db)) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# displacement correlators and kernel tables
# ---------------------------------------------------------------------------

def test_displacement_correlators_equal_time():
    # phi(0) = 0.2 exactly in the cold limit
    p = bp(beta=1e9)
    k = BathKernels.build(p, J=1.0, gamma=0.0, t_max=1.0, dt=0.01)
    dd, ddd = displacement_correlators(0.5, 0.5, k)
    assert complex(dd) == pytest.approx(math.exp(-0.2) * (math.exp(-0.2) - 1), abs=1e-9)
    assert complex(ddd) == pytest.approx(math.exp(-0.2) * (math.exp(0.2) - 1), abs=1e-9)


def test_displacement_correlators_vanish_without_coupling():
    p = bp(kappa1=0.0)
    k = BathKernels.build(p, J=1.0, gamma=0.0, t_max=1.0, dt=0.01)
    dd, ddd = displacement_correlators(0.7, 0.1, k)
    assert dd == 0.0 and ddd == 0.0


def test_kernel_table_invariants():
    p = BathParams(kappa1=0.05, kappa2=0.02, kappa3=0.5, omega_c=2.0, beta=2.0)
    k = BathKernels.build(p, J=1.0, gamma=0.6, t_max=5.0, dt=0.005)
    assert k.phi2[0] == 0.0
    assert k.theta_factor == pytest.approx(math.exp(-k.phi1[0] / 2.0), rel=1e-14)
    assert 0.0 < k.theta_factor <= 1.0
    assert k.eta >= 0.0
    assert k.gamma_tilde == pytest.approx(0.6 - 2 * 0.02 * 8, rel=1e-12)
    # ratio identities across channels
    assert np.allclose(k.psi1, (p.kappa3 / p.kappa1) * k.phi1, atol=1e-12)
    assert np.allclose(k.chi2, (p.kappa2 / p.kappa1) * k.phi2, atol=1e-12)


def test_kernel_interpolation_budget():
    # validated at the spacing the integrator actually uses (dt/2 of the
    # step policy ceiling)
    p = BathParams(kappa1=0.05, kappa2=0.0, kappa3=0.0, omega_c=2.0, beta=2.0)
    k = BathKernels.build(p, J=1.0, gamma=0.0, t_max=5.0, dt=0.005)
    mids = k.grid[:-1] + k.dt / 2.0
    exact = p.corr_cos(mids, "TT")
    assert np.max(np.abs(k.interp("phi1", mids) - exact)) < 1e-8
    assert np.max(np.abs(k.interp("phi2", mids) - p.corr_sin(mids, "TT"))) < 1e-8


def test_kernel_index_lookup():
    p = bp()
    k = BathKernels.build(p, J=1.0, gamma=0.0, t_max=2.0, dt=0.01)
    assert k.index_of(1.0) == 100
    with pytest.raises(ValueError):
        k.index_of(3.0)
    with pytest.raises(ValueError):
        k.index_of(0.005)

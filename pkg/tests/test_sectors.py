import math

import numpy as np
import pytest

from dualbath.bath import PolaronConstants
from dualbath.sectors import (degeneracy, kernel_K, kernel_K_tilde,
                              pair_eigens, q_coeffs, sector_eigens,
                              sector_spectrum, sector_table,
                              spin_coherent_coeffs, x_state_coeffs)


def consts(theta=1.0, j_tilde=1.0, gamma_tilde=0.0, eta=0.0):
    return PolaronConstants(theta=theta, j_tilde=j_tilde,
                            gamma_tilde=gamma_tilde, eta=eta)


# ---------------------------------------------------------------------------
# degeneracies
# ---------------------------------------------------------------------------

def test_degeneracy_examples():
    assert degeneracy(5, 10) == 1
    assert degeneracy(0, 10) == math.comb(10, 5) - math.comb(10, 6)  # 42
    assert degeneracy(0, 10) == 42


@pytest.mark.parametrize("N", [2, 4, 6, 8, 10, 12, 14, 16])
def test_degeneracy_sum_rule(N):
    assert sum(degeneracy(l, N) * (2 * l + 1) for l in range(N // 2 + 1)) == 2**N
    assert sector_table(N).total_states() == 2**N


def test_degeneracy_rejects_odd_N():
    with pytest.raises(ValueError):
        degeneracy(1, 5)


def test_degeneracy_rejects_out_of_range_l():
    with pytest.raises(ValueError):
        degeneracy(6, 10)


# ---------------------------------------------------------------------------
# sector eigensystem
# ---------------------------------------------------------------------------

def test_sector_eigens_symmetric_point():
    # eps_tilde = 0, Jt = 1: theta = pi/2, gap 2, C = 0, S = 1
    eig = sector_eigens(0.0, 0.0, consts(j_tilde=1.0), alpha=0.0)
    assert eig.theta == pytest.approx(math.pi / 2.0)
    assert eig.eps == pytest.approx(2.0)
    assert eig.C == pytest.approx(0.0, abs=1e-15)
    assert eig.S == pytest.approx(1.0)


def test_sector_eigens_eighth_turn():
    # eps_tilde = 2 Jt: tan(theta) = 1
    eig = sector_eigens(0.0, 2.0, consts(j_tilde=1.0), alpha=0.0)
    assert eig.theta == pytest.approx(math.pi / 4.0)


def test_sector_eigens_generic_point():
    c = consts(theta=math.exp(-0.1), j_tilde=math.exp(-0.1),
               gamma_tilde=0.28, eta=0.3)
    eig = sector_eigens(-5.0, 1.0, c, alpha=1.0)
    eps_t = 1.0 + 2 * 0.28 * (-5.0)
    assert eig.eps_tilde == pytest.approx(eps_t)
    assert eig.eps == pytest.approx(math.hypot(2 * math.exp(-0.1), eps_t), rel=1e-14)
    shift = 1.0 * (-5.0) - 0.3 * 25.0
    assert eig.E_plus - eig.E_minus == pytest.approx(eig.eps)
    assert eig.E_plus + eig.E_minus == pytest.approx(2 * shift)
    assert eig.S > 0  # branch keeps sin(theta) > 0 for Jt > 0


def test_sector_eigens_matches_dense_diagonalization():
    # oracle: eigendecomposition of the dressed 2x2 block
    c = consts(theta=0.9, j_tilde=0.9, gamma_tilde=0.28, eta=0.4)
    for m in (-3.0, 0.0, 2.0):
        eig = sector_eigens(m, 1.3, c, alpha=0.7)
        h = np.array([[1.3 / 2 + c.gamma_tilde * m, c.j_tilde],
                      [c.j_tilde, -1.3 / 2 - c.gamma_tilde * m]])
        h += (0.7 * m - c.eta * m * m) * np.eye(2)
        vals, vecs = np.linalg.eigh(h)
        assert eig.E_minus == pytest.approx(vals[0], rel=1e-14)
        assert eig.E_plus == pytest.approx(vals[1], rel=1e-14)
        # |phi+> = (cos(theta/2), sin(theta/2)) up to sign
        plus = vecs[:, 1] * np.sign(vecs[0, 1])
        assert plus[0] == pytest.approx(math.cos(eig.theta / 2), rel=1e-12)
        assert plus[1] == pytest.approx(math.sin(eig.theta / 2), rel=1e-12)


def test_degenerate_sector_flagged():
    eig = sector_eigens(0.0, 0.0, consts(j_tilde=0.0), alpha=0.0)
    assert eig.degenerate
    assert eig.theta == pytest.approx(math.pi / 2.0)


# ---------------------------------------------------------------------------
# jump kernels
# ---------------------------------------------------------------------------

def test_kernel_K_values():
    eig = sector_eigens(0.0, 0.0, consts(j_tilde=1.0), alpha=0.0)  # theta=pi/2
    for t in (0.0, 0.3, 2.0):
        assert kernel_K("z", t, eig) == pytest.approx(0.5)
    eig2 = sector_eigens(1.0, 0.8, consts(j_tilde=0.7, gamma_tilde=0.1), 0.5)
    assert complex(kernel_K("x", 0.0, eig2)) == pytest.approx(eig2.C / 2.0)
    assert complex(kernel_K("y", 0.0, eig2)) == pytest.approx(0.5j)


def test_kernel_K_time_reflection():
    # reflection structure of the jump kernels: K^x(-t) = +conj(K^x(t)),
    # K^y(-t) = -conj(K^y(t)) (both follow from the two-exponential form)
    eig = sector_eigens(2.0, 1.0, consts(j_tilde=0.9, gamma_tilde=0.3), 1.0)
    t = np.linspace(0.0, 5.0, 40)
    kx = kernel_K("x", t, eig)
    ky = kernel_K("y", t, eig)
    assert np.allclose(kernel_K("x", -t, eig), np.conj(kx), atol=1e-14)
    assert np.allclose(kernel_K("y", -t, eig), -np.conj(ky), atol=1e-14)


def test_kernel_K_tilde_rotation():
    # theta -> 0 (eps_tilde >> Jt): rotation approaches identity
    eig = sector_eigens(0.0, 1e8, consts(j_tilde=1.0), alpha=0.0)
    t = 0.37
    for comp in ("x", "y", "z"):
        assert complex(kernel_K_tilde(comp, t, eig)) == pytest.approx(
            complex(kernel_K(comp, t, eig)), abs=1e-7)
    # theta = pi/2 at t = 0: Kt^x = S * K^z = 1/2
    eig2 = sector_eigens(0.0, 0.0, consts(j_tilde=1.0), alpha=0.0)
    assert complex(kernel_K_tilde("x", 0.0, eig2)) == pytest.approx(0.5)
    # Kt^y = K^y always
    eig3 = sector_eigens(1.0, 0.7, consts(j_tilde=0.4, gamma_tilde=0.2), 0.3)
    t = np.linspace(0, 3, 11)
    assert np.allclose(kernel_K_tilde("y", t, eig3), kernel_K("y", t, eig3))


# ---------------------------------------------------------------------------
# sector pairs
# ---------------------------------------------------------------------------

def test_pair_eigens_identical_sectors():
    spectrum = sector_spectrum(4, 1.0, consts(j_tilde=0.9, gamma_tilde=0.3, eta=0.2), 0.7)
    pair = pair_eigens(1.0, 1.0, spectrum)
    assert pair.E_nm == 0.0
    assert pair.theta_nm == 0.0
    assert pair.E_plus == 0.0 and pair.E_minus == 0.0


def test_pair_eigens_uniform_sectors_collapse():
    # gamma_tilde = 0 makes all sector gaps equal: E_nm = 0 and the
    # eigenenergies reduce to the bare shift alpha(n-m) - eta(n^2-m^2)
    spectrum = sector_spectrum(6, 1.0, consts(j_tilde=0.9, gamma_tilde=0.0, eta=0.2), 0.7)
    pair = pair_eigens(2.0, -1.0, spectrum)
    assert pair.E_nm == pytest.approx(0.0, abs=1e-14)
    shift = 0.7 * 3.0 - 0.2 * (4.0 - 1.0)
    assert pair.E_plus == pytest.approx(shift)
    assert pair.E_minus == pytest.approx(shift)


def test_pair_eigens_against_dense_2x2():
    c = consts(theta=0.9, j_tilde=0.9, gamma_tilde=0.28, eta=0.15)
    spectrum = sector_spectrum(10, 0.1, c, alpha=0.5)

    def block(m):
        h = np.array([[0.1 / 2 + c.gamma_tilde * m, c.j_tilde],
                      [c.j_tilde, -0.1 / 2 - c.gamma_tilde * m]], dtype=float)
        return h + (0.5 * m - c.eta * m * m) * np.eye(2)

    for n, m in [(1.0, 0.0), (3.0, -2.0), (-4.0, 5.0)]:
        pair = pair_eigens(n, m, spectrum)
        vals = np.linalg.eigvalsh(block(n) - block(m))
        assert pair.E_minus == pytest.approx(vals[0], rel=1e-12, abs=1e-12)
        assert pair.E_plus == pytest.approx(vals[1], rel=1e-12, abs=1e-12)


def test_pair_eigens_reciprocity():
    spectrum = sector_spectrum(8, 1.0, consts(j_tilde=0.8, gamma_tilde=0.25, eta=0.1), 0.6)
    for n, m in [(2.0, -1.0), (4.0, 1.0)]:
        a = pair_eigens(n, m, spectrum)
        b = pair_eigens(m, n, spectrum)
        assert a.E_nm == pytest.approx(b.E_nm, rel=1e-14)
        assert a.E_plus == pytest.approx(-b.E_minus, rel=1e-12)
        assert a.E_minus == pytest.approx(-b.E_plus, rel=1e-12)


# ---------------------------------------------------------------------------
# collective states
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("N", [2, 4, 10, 16])
def test_q_coeffs_normalized(N):
    q = q_coeffs(N)
    assert np.sum(q**2) == pytest.approx(1.0, rel=1e-14)


def test_q_coeffs_values():
    q = q_coeffs(10)
    assert q[5] == pytest.approx(math.sqrt(252) / 32.0)     # m = 0
    assert q[0] == pytest.approx(1.0 / 32.0)                # m = -5
    assert q[-1] == pytest.approx(1.0 / 32.0)               # m = +5


@pytest.mark.parametrize("N", [2, 4, 6, 8, 10, 12, 14, 16])
def test_x_states_orthogonal(N):
    plus = x_state_coeffs(+1, N)
    minus = x_state_coeffs(-1, N)
    assert abs(np.dot(plus, minus)) < 1e-14
    assert np.dot(plus, plus) == pytest.approx(1.0, rel=1e-13)


def test_spin_coherent_reduces_to_x_states():
    # (theta, phi) = (pi/2, pi/2 -+ pi/2) gives |+-x> up to a global phase
    for sign, ph in ((+1, 0.0), (-1, math.pi)):
        c = spin_coherent_coeffs(math.pi / 2.0, ph, 6)
        ref = x_state_coeffs(sign, 6)
        # align global phase on the largest component
        k = np.argmax(np.abs(ref))
        c = c * (ref[k] / c[k])
        assert np.allclose(c, ref, atol=1e-12)


def test_spin_coherent_normalized_generic():
    c = spin_coherent_coeffs(0.7, 1.3, 8)
    assert np.vdot(c, c).real == pytest.approx(1.0, rel=1e-12)

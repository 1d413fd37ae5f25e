"""Reduced dynamics of the spin ensemble in its maximal-spin sector.

The ensemble starts in the fully polarized coherent state |+x> (l = N/2);
total spin is conserved, so its reduced density matrix Theta_S lives in the
(N+1)-dimensional maximal sector.  Theta_S splits into a relevant part,
driven by the matrix elements

    h_{s m, s' m'}(t) = <s m| sigma_I(t) |s' m'>

of the interaction-picture joint density operator (s labels the two-level
states, m the ensemble quantum number), and an irrelevant part fixed by the
projected-out share of the correlated initial polaron-frame state, which is
known in closed form.

h obeys a time-local second-order master equation whose memory integrals
couple every pair of sectors.  All two-time bath objects factorize into a
window in (t - tau) times per-sector functions of tau, so each step costs
one batch of matrix contractions and the full propagation O(n_t^2 (N+1)^2).

The macroscopic-superposition witness is the quadruple of overlaps
Theta_{++}, Theta_{+-}, Theta_{-+}, Theta_{--} with the |+-x> coherent
states; the decoherence-free reference evolution and the superposition
formation time tau_MQS (root of t f(t) = pi/2) are provided for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bath import BathKernels, f_mqs
from .sectors import SectorSpectrum, _kernel_table, q_coeffs

__all__ = [
    "HEvolutionError",
    "initial_h",
    "q_correlator_D",
    "q_correlator_DD",
    "PairTables",
    "pair_tables",
    "h_rhs",
    "relevant_theta",
    "irrelevant_theta",
    "theta_pm",
    "mqs_reference",
    "tau_mqs",
    "MQSTrajectory",
    "run_mqs",
]


class HEvolutionError(RuntimeError):
    """Non-finite matrix element during propagation; names the entry."""


# ---------------------------------------------------------------------------
# initial condition and closed-form bath objects
# ---------------------------------------------------------------------------

def initial_h(N: int, kernels: BathKernels) -> np.ndarray:
    """h(0) for the |+x> (x) |lower> product start, shape (2, N+1, 2, N+1).

    Only the lower-lower block is populated.  Tracing the displaced bath
    factor of the polaron-frame initial state leaves the Gaussian overlap
    exp(-(m-m')^2 psi1(0)/2) on top of q_m q_m'; this normalization makes
    the combined relevant + irrelevant density matrix reproduce rho_S(0)
    exactly and keeps its trace at 1.
    """
    q = q_coeffs(N)
    nm = len(q)
    psi10 = float(kernels.psi1[0])
    dm = np.arange(-N // 2, N // 2 + 1, dtype=float)
    gauss = np.exp(-0.5 * np.subtract.outer(dm, dm) ** 2 * psi10)
    h = np.zeros((2, nm, 2, nm), dtype=complex)
    h[1, :, 1, :] = np.outer(q, q) * gauss
    return h


def _dress_scalar(m, mp, t, kernels):
    """a_{mm'}(t) = exp(-psi_{mm'}(t)) * [(d_m+1)(d_{m'}+1)]^{1/2} via phases."""
    bath = kernels.bath
    chi1 = np.asarray(bath.corr_cos(t, "TS"))
    chi2 = np.asarray(bath.corr_sin(t, "TS"))
    phi2 = np.asarray(bath.corr_sin(t, "TT"))
    return np.exp(-(m - mp) * chi1 + 1j * ((m + mp) * chi2 - phi2))


def q_correlator_D(m, mp, t, kernels: BathKernels):
    """<D(t)>_{Q m m'} against the projected-out initial bath component.

    Closed form: theta exp(-(m-m')^2 psi1(0)/2) [a_{mm'}(t) - 1] with the
    dress factor a_{mm'} = e^{-psi_{mm'}} [(d_m+1)(d_{m'}+1)]^{1/2}; the
    square root is taken on the phases, never through a branch cut.
    """
    psi10 = float(kernels.psi1[0])
    pref = kernels.theta_factor * math.exp(-0.5 * (m - mp) ** 2 * psi10)
    return pref * (_dress_scalar(m, mp, t, kernels) - 1.0)


def q_correlator_DD(kind: str, m, mp, t, s, kernels: BathKernels):
    """Two-time correlators <D..(t) D..(s)>_{Q m m'}, kind in {DD, DDd, DdD, DdDd}.

    All four share the structure pref * [F a a' - a - a' - F + 2] with
    F = exp(-+phi(t-s)) and a-factors replaced by their inverses for each
    daggered operator; DdDd is fixed by <Dd(t)Dd(s)>_{Qmm'} =
    conj(<D(s)D(t)>_{Qm'm}).
    """
    psi10 = float(kernels.psi1[0])
    phi10 = float(kernels.phi1[0])
    pref = math.exp(-0.5 * (m - mp) ** 2 * psi10) * math.exp(-phi10)
    ph = kernels.phi_at(np.asarray(t, float) - np.asarray(s, float))
    a_t = _dress_scalar(m, mp, t, kernels)
    a_s = _dress_scalar(m, mp, s, kernels)
    if kind == "DD":
        F = np.exp(-ph)
        return pref * (F * a_t * a_s - a_t - a_s - F + 2.0)
    if kind == "DDd":
        F = np.exp(ph)
        return pref * (F * a_t / a_s - a_t - 1.0 / a_s - F + 2.0)
    if kind == "DdD":
        F = np.exp(ph)
        return pref * (F * a_s / a_t - 1.0 / a_t - a_s - F + 2.0)
    if kind == "DdDd":
        F = np.exp(-ph)
        return pref * (F / (a_t * a_s) - 1.0 / a_t - 1.0 / a_s - F + 2.0)
    raise ValueError(f"kind must be DD, DDd, DdD or DdDd; got {kind!r}")


# ---------------------------------------------------------------------------
# sector-pair spectral data
# ---------------------------------------------------------------------------

@dataclass
class PairTables:
    """Eigensystem of H_n - H_m for every sector pair, matrices indexed [m, n]."""

    theta_nm: np.ndarray
    E_nm: np.ndarray
    E_plus: np.ndarray
    E_minus: np.ndarray
    cos2: np.ndarray     # cos^2(theta_nm / 2)
    sin2: np.ndarray
    cossin: np.ndarray


def pair_tables(spectrum: SectorSpectrum) -> PairTables:
    ec = spectrum.eps * spectrum.C
    es = spectrum.eps * spectrum.S
    dc = ec[None, :] - ec[:, None]          # ec[n] - ec[m], indexed [m, n]
    ds = es[None, :] - es[:, None]
    gap = np.hypot(dc, ds)
    theta = np.where(gap > 0, np.arctan2(ds, dc), 0.0)
    ms = spectrum.ms
    shift = (spectrum.alpha * (ms[None, :] - ms[:, None])
             - spectrum.eta * (ms[None, :] ** 2 - ms[:, None] ** 2))
    half = theta / 2.0
    return PairTables(
        theta_nm=theta,
        E_nm=gap,
        E_plus=shift + gap / 2.0,
        E_minus=shift - gap / 2.0,
        cos2=np.cos(half) ** 2,
        sin2=np.sin(half) ** 2,
        cossin=np.cos(half) * np.sin(half),
    )


# ---------------------------------------------------------------------------
# observable assembly
# ---------------------------------------------------------------------------

def relevant_theta(h: np.ndarray, t: float, kernels: BathKernels,
                   pairs: PairTables) -> np.ndarray:
    """Relevant part [Theta_S]^P_{mn} from the h matrix at time t."""
    psi10 = float(kernels.psi1[0])
    nm = h.shape[1]
    dm = np.arange(nm, dtype=float)
    gauss = np.exp(-0.5 * np.subtract.outer(dm, dm) ** 2 * psi10)
    ep = np.exp(1j * pairs.E_plus * t)
    em = np.exp(1j * pairs.E_minus * t)
    upper = pairs.cos2 * ep + pairs.sin2 * em
    lower = pairs.sin2 * ep + pairs.cos2 * em
    cross = pairs.cossin * (ep - em)
    return gauss * (upper * h[0, :, 0, :]
                    + cross * (h[0, :, 1, :] + h[1, :, 0, :])
                    + lower * h[1, :, 1, :])


def irrelevant_theta(t: float, N: int, kernels: BathKernels,
                     pairs: PairTables) -> np.ndarray:
    """Irrelevant part [Theta_S]^Q_{mn}, known in closed form for the |+x> start.

    [Theta]^Q_{mn} = q_m q_n e^{-(m-n)^2 psi1(0)}
                     (sin^2(theta_nm/2) e^{i E+ t} + cos^2 e^{i E- t})
                     (e^{(n-m)[(n-m) psi1(t) + i (n+m) psi2(t) - i chi2(t)]} - 1).

    It vanishes identically for m = n (the exponent carries a factor n - m),
    and for all pairs when the ensemble-bath channels are off.
    """
    q = q_coeffs(N)
    ms = np.arange(-N // 2, N // 2 + 1, dtype=float)
    it = kernels.index_of(t)
    psi10 = float(kernels.psi1[0])
    psi1_t = float(kernels.psi1[it])
    psi2_t = float(kernels.psi2[it])
    chi2_t = float(kernels.chi2[it])
    dnm = ms[None, :] - ms[:, None]          # n - m indexed [m, n]
    snm = ms[None, :] + ms[:, None]          # n + m
    phase = pairs.sin2 * np.exp(1j * pairs.E_plus * t) \
        + pairs.cos2 * np.exp(1j * pairs.E_minus * t)
    grow = np.exp(dnm * (dnm * psi1_t + 1j * (snm * psi2_t - chi2_t))) - 1.0
    return np.outer(q, q) * np.exp(-dnm**2 * psi10) * phase * grow


def theta_pm(theta_s: np.ndarray, sign_row: int, sign_col: int, N: int) -> complex:
    """Coherent-state overlap <sr x| Theta_S |sc x> = sum (sr)^m (sc)^n q_m q_n [Theta]_{mn}."""
    q = q_coeffs(N)
    ms = np.arange(-N // 2, N // 2 + 1)
    vr = (float(sign_row)) ** ms * q
    vc = (float(sign_col)) ** ms * q
    return complex(vr @ theta_s @ vc)


def mqs_reference(t: float, N: int, bath) -> np.ndarray:
    """Decoherence-free reference [Theta_S]_{mn} = q_m q_n e^{-i t f(t)(m^2 - n^2)}."""
    q = q_coeffs(N)
    ms = np.arange(-N // 2, N // 2 + 1, dtype=float)
    f = float(np.asarray(f_mqs(t, bath)))
    return np.outer(q, q) * np.exp(-1j * t * f * np.subtract.outer(ms**2, ms**2))


def tau_mqs(bath, bracket_factor: float = 10.0) -> float:
    """Superposition formation time: root of t f(t) = pi/2.

    Solved by bracketed root finding on (0, bracket_factor/omega_c];
    raises if the phase never reaches pi/2 there (coupling too small).
    """
    omega_c = getattr(bath, "omega_c", 1.0)
    hi = bracket_factor / omega_c

    def g(t):
        return t * float(np.asarray(f_mqs(t, bath))) - math.pi / 2.0

    if g(hi) < 0:
        raise ValueError(
            "t f(t) stays below pi/2 on the bracket: ensemble-bath coupling "
            "too weak for superposition formation")
    return float(brentq(g, 1e-12, hi, xtol=1e-12, rtol=1e-14))


# ---------------------------------------------------------------------------
# equation of motion for h
# ---------------------------------------------------------------------------

class _EOMTables:
    """Grid-sampled ingredients of the h equation of motion."""

    def __init__(self, kernels: BathKernels, spectrum: SectorSpectrum, J: float,
                 N: int):
        self.kernels = kernels
        self.spectrum = spectrum
        self.J = J
        grid = kernels.grid
        self.nt = len(grid)
        self.dt = kernels.dt
        nm = len(spectrum)
        self.nm = nm
        self.q = q_coeffs(N)
        self.qq = np.outer(self.q, self.q)

        kt = _kernel_table(spectrum, grid)              # (3, nm, nt)
        self.kt6 = np.concatenate([kt, np.conj(kt)])    # components then conj
        self.w_minus = kernels.w_minus                  # <D(t)D(0)> on grid
        self.w_plus = kernels.w_plus

        ms = spectrum.ms
        psi10 = float(kernels.psi1[0])
        self.pref1 = kernels.theta_factor * np.exp(
            -0.5 * np.subtract.outer(ms, ms) ** 2 * psi10)
        self.pref2 = math.exp(-float(kernels.phi1[0])) * np.exp(
            -0.5 * np.subtract.outer(ms, ms) ** 2 * psi10)

        # dress factorization a_{mm'}(t) = v_m(t) vt_{m'}(t) w0(t)
        zeta = kernels.chi1 - 1j * kernels.chi2
        self.v = np.exp(-np.multiply.outer(ms, zeta))           # (nm, nt)
        self.vt = np.exp(np.multiply.outer(ms, np.conj(zeta)))
        self.w0 = np.exp(-1j * kernels.phi2)
        self.a = self.v[:, None, :] * self.vt[None, :, :] * self.w0  # (nm,nm,nt)
        self.a_inv = 1.0 / self.a
        self.dq_t = self.pref1[:, :, None] * (self.a - 1.0)     # <D(t)>_Q table

        self.F_minus = kernels.exp_phi_minus
        self.F_plus = kernels.exp_phi_plus

        # the full memory machinery switches off exactly when both the
        # system-bath and cross channels vanish (phi = chi = 0)
        self.frozen = not (np.any(kernels.phi1) or np.any(kernels.phi2)
                           or np.any(kernels.chi1) or np.any(kernels.chi2))

    # -- per-step history integrals -------------------------------------

    def _trap_weights(self, it):
        tw = np.full(it + 1, self.dt)
        tw[0] = tw[-1] = self.dt / 2.0
        return tw

    def homogeneous_coefficients(self, it: int):
        """Coefficient tensors (Cs, Cfa, Cfb, Cfab) of the homogeneous term.

        The rate contribution is dh[s,m,s',m'] = 2 J^2 (Cs h + Cfa h[flip s]
        + Cfb h[flip s'] + Cfab h[flip both]); each coefficient collects the
        windowed memory integrals V[c, w, m] = int_0^t Kc_m(tau) W_w(t - tau)
        dtau paired with kernel values at the current time.
        """
        nm = self.nm
        tw = self._trap_weights(it)
        wm = self.w_minus[it::-1]
        wp = self.w_plus[it::-1]
        windows = np.stack([wm, wp, np.conj(wm), np.conj(wp)]) * tw
        V = np.einsum("cmj,wj->cwm", self.kt6[:, :, :it + 1], windows,
                      optimize=True)                      # (6, 4, nm)
        kt_t = self.kt6[:, :, it]                         # (6, nm)

        X, Y, Z = 0, 1, 2
        WM, WP, WMC, WPC = 0, 1, 2, 3

        def pm(i, conj_a, w, b_vals):
            """int Re[A_m(tau) B(t)] W dtau -> outer [m, mp] with B over mp."""
            va = V[i + 3 * conj_a, w]
            vb = V[i + 3 * (1 - conj_a), w]
            return 0.5 * (np.outer(va, b_vals) + np.outer(vb, np.conj(b_vals)))

        def pp(i, conj_a, w, b_vals):
            """Same with the integrated factor on the m' side, B over m."""
            va = V[i + 3 * conj_a, w]
            vb = V[i + 3 * (1 - conj_a), w]
            return 0.5 * (np.outer(b_vals, va) + np.outer(np.conj(b_vals), vb))

        def pm_diag(i, conj_a, w, b_vals):
            """Both factors on the m side: column vector over m."""
            va = V[i + 3 * conj_a, w]
            vb = V[i + 3 * (1 - conj_a), w]
            return (0.5 * (b_vals * va + np.conj(b_vals) * vb))[:, None]

        def pp_diag(i, conj_a, w, b_vals):
            """Both factors on the m' side: row vector over m'."""
            va = V[i + 3 * conj_a, w]
            vb = V[i + 3 * (1 - conj_a), w]
            return (0.5 * (b_vals * va + np.conj(b_vals) * vb))[None, :]

        kx, ky, kz = kt_t[X], kt_t[Y], kt_t[Z]
        kxc, kyc, kzc = np.conj(kx), np.conj(ky), np.conj(kz)

        shape = (2, nm, 2, nm)
        Cs = np.zeros(shape, complex)
        Cfa = np.zeros(shape, complex)
        Cfb = np.zeros(shape, complex)
        Cfab = np.zeros(shape, complex)

        # m-side dot products and cross components for groups 5 and 6
        dot_m = sum(pm_diag(i, 0, WM, kt_t[i]) for i in (X, Y, Z))
        dotc_m = sum(pm_diag(i, 0, WP, np.conj(kt_t[i])) for i in (X, Y, Z))
        mz_m = pm_diag(Y, 0, WM, kx) - pm_diag(X, 0, WM, ky)
        nz_m = pm_diag(Y, 0, WP, kxc) - pm_diag(X, 0, WP, kyc)
        my_m = pm_diag(X, 0, WM, kz) - pm_diag(Z, 0, WM, kx)
        mx_m = pm_diag(Z, 0, WM, ky) - pm_diag(Y, 0, WM, kz)
        ny_m = pm_diag(X, 0, WP, kzc) - pm_diag(Z, 0, WP, kxc)
        nx_m = pm_diag(Z, 0, WP, kyc) - pm_diag(Y, 0, WP, kzc)

        # m'-side equivalents for groups 7 and 8
        dot_p = sum(pp_diag(i, 0, WMC, kt_t[i]) for i in (X, Y, Z))
        dotc_p = sum(pp_diag(i, 1, WPC, kt_t[i]) for i in (X, Y, Z))
        mz_p = pp_diag(Y, 0, WMC, kx) - pp_diag(X, 0, WMC, ky)
        nsz_p = pp_diag(Y, 1, WPC, kx) - pp_diag(X, 1, WPC, ky)
        my_p = pp_diag(X, 0, WMC, kz) - pp_diag(Z, 0, WMC, kx)
        mx_p = pp_diag(Z, 0, WMC, ky) - pp_diag(Y, 0, WMC, kz)
        nsy_p = pp_diag(X, 1, WPC, kz) - pp_diag(Z, 1, WPC, kx)
        nsx_p = pp_diag(Z, 1, WPC, ky) - pp_diag(Y, 1, WPC, kz)

        for ia, s in enumerate((1.0, -1.0)):
            for ib, sp_ in enumerate((1.0, -1.0)):
                # group 1 -> same-index h
                g1 = (s * sp_) * (pm(Z, 0, WM, kz) + pm(Z, 1, WP, kz)
                                  + pp(Z, 0, WMC, kz) + pp(Z, 0, WPC, kzc))
                # group 2 -> h with s flipped
                g2 = sp_ * (pm(X, 0, WM, kz) - 1j * s * pm(Y, 0, WM, kz)
                            + pm(X, 0, WP, kzc) - 1j * s * pm(Y, 0, WP, kzc)
                            + pp(Z, 0, WMC, kx) - 1j * s * pp(Z, 0, WMC, ky)
                            + pp(Z, 1, WPC, kx) - 1j * s * pp(Z, 1, WPC, ky))
                # group 3 -> h with s' flipped
                g3 = s * (pm(Z, 0, WM, kx) + 1j * sp_ * pm(Z, 0, WM, ky)
                          + pm(Z, 0, WP, kxc) + 1j * sp_ * pm(Z, 0, WP, kyc)
                          + pp(X, 0, WMC, kz) + 1j * sp_ * pp(Y, 0, WMC, kz)
                          + pp(X, 1, WPC, kz) + 1j * sp_ * pp(Y, 1, WPC, kz))
                # group 4 -> h with both flipped
                g4 = (pm(X, 0, WM, kx) - 1j * s * pm(Y, 0, WM, kx)
                      + 1j * sp_ * pm(X, 0, WM, ky) + s * sp_ * pm(Y, 0, WM, ky)
                      + pm(X, 0, WP, kxc) - 1j * s * pm(Y, 0, WP, kxc)
                      + 1j * sp_ * pm(X, 0, WP, kyc) + s * sp_ * pm(Y, 0, WP, kyc)
                      + pp(X, 0, WMC, kx) - 1j * s * pp(X, 0, WMC, ky)
                      + 1j * sp_ * pp(Y, 0, WMC, kx) + s * sp_ * pp(Y, 0, WMC, ky)
                      + pp(X, 1, WPC, kx) - 1j * s * pp(X, 1, WPC, ky)
                      + 1j * sp_ * pp(Y, 1, WPC, kx) + s * sp_ * pp(Y, 1, WPC, ky))
                # groups 5-8 carry the minus sign of the anticommutator side
                g5 = (dot_m + 1j * s * mz_m) + (dotc_m + 1j * s * nz_m)
                g6 = (s * my_m + 1j * mx_m) + (s * ny_m + 1j * nx_m)
                g7 = (dot_p - 1j * sp_ * mz_p) + (dotc_p - 1j * sp_ * nsz_p)
                g8 = (sp_ * my_p - 1j * mx_p) + (sp_ * nsy_p - 1j * nsx_p)

                Cs[ia, :, ib, :] = g1 - g5 - g7
                Cfa[ia, :, ib, :] = g2 - g6
                Cfb[ia, :, ib, :] = g3 - g8
                Cfab[ia, :, ib, :] = g4
        return Cs, Cfa, Cfb, Cfab

    def ih1(self, it: int) -> np.ndarray:
        """First-order inhomogeneous drive at grid index it, shape (2,nm,2,nm)."""
        kt_t = self.kt6[:, :, it]
        kx, ky, kz = kt_t[0], kt_t[1], kt_t[2]
        kxc, kyc, kzc = np.conj(kx), np.conj(ky), np.conj(kz)
        dq = self.dq_t[:, :, it]                     # <D(t)>_{Qmm'}
        dqd = np.conj(self.dq_t[:, :, it].T)         # <D^dag(t)>_{Qmm'}
        out = np.zeros((2, self.nm, 2, self.nm), complex)
        J = self.J
        qq = self.qq
        out[0, :, 1, :] = -1j * J * qq * ((kx - 1j * ky)[:, None] * dq
                                          + (kxc - 1j * kyc)[:, None] * dqd)
        out[1, :, 0, :] = 1j * J * qq * ((kx + 1j * ky)[None, :] * dq
                                         + (kxc + 1j * kyc)[None, :] * dqd)
        out[1, :, 1, :] = 1j * J * qq * (
            np.subtract.outer(kz, kz) * dq + np.subtract.outer(kzc, kzc) * dqd)
        return out

    def _elementary(self, it: int):
        """History integrals E[c, u, f][m, m'] of kernel x dress x window.

        c indexes the six kernel components (x, y, z, then conjugates),
        u in {0: a-dress, 1: inverse dress, 2: none} and f in
        {0: e^{-phi}, 1: e^{+phi}, 2, 3: their conjugates, 4: no window}.
        Returned as (E_m, E_p): integrated kernel attached to the m side or
        the m' side respectively.
        """
        tw = self._trap_weights(it)
        fm = self.F_minus[it::-1]
        fp = self.F_plus[it::-1]
        ones = np.ones(it + 1)
        wins = np.stack([fm, fp, np.conj(fm), np.conj(fp), ones]) * tw  # (5, j)

        kt = self.kt6[:, :, :it + 1]
        v = self.v[:, :it + 1]
        vt = self.vt[:, :it + 1]
        w0 = self.w0[:it + 1]

        E_m = np.empty((6, 3, 5, self.nm, self.nm), complex)
        E_p = np.empty((6, 3, 5, self.nm, self.nm), complex)
        # u = 0: dress a = v_m vt_m' w0
        E_m[:, 0] = np.einsum("cmj,fj,pj->cfmp", kt * v[None], wins * w0, vt,
                              optimize=True)
        E_p[:, 0] = np.einsum("cpj,fj,mj->cfmp", kt * vt[None], wins * w0, v,
                              optimize=True)
        # u = 1: inverse dress
        E_m[:, 1] = np.einsum("cmj,fj,pj->cfmp", kt / v[None], wins / w0,
                              1.0 / vt, optimize=True)
        E_p[:, 1] = np.einsum("cpj,fj,mj->cfmp", kt / vt[None], wins / w0,
                              1.0 / v, optimize=True)
        # u = 2: no dress; m-side is m'-independent and vice versa
        plain = np.einsum("cmj,fj->cfm", kt, wins, optimize=True)
        E_m[:, 2] = plain[:, :, :, None]
        E_p[:, 2] = plain[:, :, None, :]
        return E_m, E_p

    def ih2(self, it: int) -> np.ndarray:
        """Second-order inhomogeneous drive at grid index it, shape (2,nm,2,nm)."""
        out = np.zeros((2, self.nm, 2, self.nm), complex)
        if it == 0:
            return out
        E_m, E_p = self._elementary(it)
        a_t = self.a[:, :, it]
        ai_t = self.a_inv[:, :, it]
        kt_t = self.kt6[:, :, it]

        FM, FP, FMC, FPC, NONE = range(5)
        ADRESS, INV, NO = range(3)

        # reversing the time arguments (t, tau) -> (tau, t) conjugates the
        # phi window and trades a_t for a_tau in the mixed correlators:
        # <D(tau) D^dag(t)> has the a-structure of <D^dag(t) D(tau)> and
        # vice versa, while DD and DdDd keep theirs.
        rev_kind = {"DD": "DD", "DdDd": "DdDd", "DDd": "DdD", "DdD": "DDd"}

        def _qint(E, kind, rev):
            if rev:
                kind = rev_kind[kind]
            fmi = FMC if rev else FM
            fpi = FPC if rev else FP
            base = 2.0 * E[NO, NONE]
            if kind == "DD":
                return self.pref2 * (a_t * E[ADRESS, fmi] - E[ADRESS, NONE]
                                     - E[NO, fmi] + base - a_t * E[NO, NONE])
            if kind == "DDd":
                return self.pref2 * (a_t * E[INV, fpi] - E[INV, NONE]
                                     - E[NO, fpi] + base - a_t * E[NO, NONE])
            if kind == "DdD":
                return self.pref2 * (ai_t * E[ADRESS, fpi] - E[ADRESS, NONE]
                                     - E[NO, fpi] + base - ai_t * E[NO, NONE])
            # DdDd
            return self.pref2 * (ai_t * E[INV, fmi] - E[INV, NONE]
                                 - E[NO, fmi] + base - ai_t * E[NO, NONE])

        def qm(c, kind, rev):
            """int g^c_m(tau) <...>_{Q}(args) dtau; rev means args (tau, t)."""
            return _qint(E_m[c], kind, rev)

        def qp(c, kind, rev):
            """Same with the integrated kernel factor attached to the m' side."""
            return _qint(E_p[c], kind, rev)

        X, Y, Z, XC, YC, ZC = range(6)
        kx, ky, kz = kt_t[X], kt_t[Y], kt_t[Z]
        kxc, kyc, kzc = kt_t[XC], kt_t[YC], kt_t[ZC]
        j2 = self.J * self.J
        qq = self.qq

        def col(vec):
            return vec[:, None]

        def row(vec):
            return vec[None, :]

        # ---- block (1, 1) -------------------------------------------------
        gA = lambda kind, rev: qm(X, kind, rev) - 1j * qm(Y, kind, rev)      # noqa: E731
        gAc = lambda kind, rev: qm(XC, kind, rev) - 1j * qm(YC, kind, rev)   # noqa: E731
        gB = lambda kind, rev: qp(X, kind, rev) + 1j * qp(Y, kind, rev)      # noqa: E731
        gBc = lambda kind, rev: qp(XC, kind, rev) + 1j * qp(YC, kind, rev)   # noqa: E731

        kp_t = row(kx + 1j * ky)        # (Kx + i Ky)_{m'}(t)
        kpc_t = row(kxc + 1j * kyc)
        km_t = col(kx - 1j * ky)        # (Kx - i Ky)_m(t)
        kmc_t = col(kxc - 1j * kyc)

        out[0, :, 0, :] = qq * j2 * (
            kp_t * gA("DD", False) + kp_t * gAc("DDd", False)
            + kpc_t * gA("DdD", False) + kpc_t * gAc("DdDd", False)
            + km_t * gB("DD", True) + kmc_t * gB("DDd", True)
            + km_t * gBc("DdD", True) + kmc_t * gBc("DdDd", True))

        # ---- block (1, 1bar) ----------------------------------------------
        # bracket with swap, then the one-sided cross-product terms
        br = (row(kz) * gA("DD", False) + row(kz) * gAc("DDd", False)
              + row(kzc) * gA("DdD", False) + row(kzc) * gAc("DdDd", False)
              + km_t * qp(Z, "DD", True) + kmc_t * qp(Z, "DDd", True)
              + km_t * qp(ZC, "DdD", True) + kmc_t * qp(ZC, "DdDd", True))
        my = lambda kind, rev: (col(kz) * qm(X, kind, rev)                  # noqa: E731
                                - col(kx) * qm(Z, kind, rev))
        mx = lambda kind, rev: (col(ky) * qm(Z, kind, rev)                  # noqa: E731
                                - col(kz) * qm(Y, kind, rev))
        ny = lambda kind, rev: (col(kzc) * qm(X, kind, rev)                 # noqa: E731
                                - col(kxc) * qm(Z, kind, rev))
        nx = lambda kind, rev: (col(kyc) * qm(Z, kind, rev)                 # noqa: E731
                                - col(kzc) * qm(Y, kind, rev))
        nsy = lambda kind, rev: (col(kz) * qm(XC, kind, rev)                # noqa: E731
                                 - col(kx) * qm(ZC, kind, rev))
        nsx = lambda kind, rev: (col(ky) * qm(ZC, kind, rev)                # noqa: E731
                                 - col(kz) * qm(YC, kind, rev))
        msy = lambda kind, rev: (col(kzc) * qm(XC, kind, rev)               # noqa: E731
                                 - col(kxc) * qm(ZC, kind, rev))
        msx = lambda kind, rev: (col(kyc) * qm(ZC, kind, rev)               # noqa: E731
                                 - col(kzc) * qm(YC, kind, rev))
        out[0, :, 1, :] = -qq * j2 * (
            br
            + my("DD", False) + 1j * mx("DD", False)
            + ny("DdD", False) + 1j * nx("DdD", False)
            + nsy("DDd", False) + 1j * nsx("DDd", False)
            + msy("DdDd", False) + 1j * msx("DdDd", False))

        # ---- block (1bar, 1) ----------------------------------------------
        br = (kp_t * qm(Z, "DD", False) + kp_t * qm(ZC, "DDd", False)
              + kpc_t * qm(Z, "DdD", False) + kpc_t * qm(ZC, "DdDd", False)
              + col(kz) * gB("DD", True) + col(kzc) * gB("DDd", True)
              + col(kz) * gBc("DdD", True) + col(kzc) * gBc("DdDd", True))
        pmy = lambda kind, rev: (row(kz) * qp(X, kind, rev)                 # noqa: E731
                                 - row(kx) * qp(Z, kind, rev))
        pmx = lambda kind, rev: (row(ky) * qp(Z, kind, rev)                 # noqa: E731
                                 - row(kz) * qp(Y, kind, rev))
        pny = lambda kind, rev: (row(kzc) * qp(X, kind, rev)                # noqa: E731
                                 - row(kxc) * qp(Z, kind, rev))
        pnx = lambda kind, rev: (row(kyc) * qp(Z, kind, rev)                # noqa: E731
                                 - row(kzc) * qp(Y, kind, rev))
        pnsy = lambda kind, rev: (row(kz) * qp(XC, kind, rev)               # noqa: E731
                                  - row(kx) * qp(ZC, kind, rev))
        pnsx = lambda kind, rev: (row(ky) * qp(ZC, kind, rev)               # noqa: E731
                                  - row(kz) * qp(YC, kind, rev))
        pmsy = lambda kind, rev: (row(kzc) * qp(XC, kind, rev)              # noqa: E731
                                  - row(kxc) * qp(ZC, kind, rev))
        pmsx = lambda kind, rev: (row(kyc) * qp(ZC, kind, rev)              # noqa: E731
                                  - row(kzc) * qp(YC, kind, rev))
        out[1, :, 0, :] = -qq * j2 * (
            br
            + pmy("DD", True) - 1j * pmx("DD", True)
            + pnsy("DdD", True) - 1j * pnsx("DdD", True)
            + pny("DDd", True) - 1j * pnx("DDd", True)
            + pmsy("DdDd", True) - 1j * pmsx("DdDd", True))

        # ---- block (1bar, 1bar) --------------------------------------------
        br = (row(kz) * qm(Z, "DD", False) + row(kz) * qm(ZC, "DDd", False)
              + row(kzc) * qm(Z, "DdD", False) + row(kzc) * qm(ZC, "DdDd", False)
              + col(kz) * qp(Z, "DD", True) + col(kzc) * qp(Z, "DDd", True)
              + col(kz) * qp(ZC, "DdD", True) + col(kzc) * qp(ZC, "DdDd", True))

        def dot_m_side(conj_t, conj_tau, kind, rev):
            comps = (XC, YC, ZC) if conj_tau else (X, Y, Z)
            vals = (kxc, kyc, kzc) if conj_t else (kx, ky, kz)
            return sum(col(v) * qm(c, kind, rev) for v, c in zip(vals, comps))

        def dot_p_side(conj_t, conj_tau, kind, rev):
            comps = (XC, YC, ZC) if conj_tau else (X, Y, Z)
            vals = (kxc, kyc, kzc) if conj_t else (kx, ky, kz)
            return sum(row(v) * qp(c, kind, rev) for v, c in zip(vals, comps))

        mz_m = lambda kind, rev: (col(kx) * qm(Y, kind, rev)                # noqa: E731
                                  - col(ky) * qm(X, kind, rev))
        nz_m = lambda kind, rev: (col(kxc) * qm(Y, kind, rev)               # noqa: E731
                                  - col(kyc) * qm(X, kind, rev))
        nsz_m = lambda kind, rev: (col(kx) * qm(YC, kind, rev)              # noqa: E731
                                   - col(ky) * qm(XC, kind, rev))
        msz_m = lambda kind, rev: (col(kxc) * qm(YC, kind, rev)             # noqa: E731
                                   - col(kyc) * qm(XC, kind, rev))
        mz_p = lambda kind, rev: (row(kx) * qp(Y, kind, rev)                # noqa: E731
                                  - row(ky) * qp(X, kind, rev))
        nz_p = lambda kind, rev: (row(kxc) * qp(Y, kind, rev)               # noqa: E731
                                  - row(kyc) * qp(X, kind, rev))
        nsz_p = lambda kind, rev: (row(kx) * qp(YC, kind, rev)              # noqa: E731
                                   - row(ky) * qp(XC, kind, rev))
        msz_p = lambda kind, rev: (row(kxc) * qp(YC, kind, rev)             # noqa: E731
                                   - row(kyc) * qp(XC, kind, rev))

        same_side = (
            (dot_m_side(0, 0, "DD", False) - 1j * mz_m("DD", False))
            + (dot_m_side(1, 0, "DdD", False) - 1j * nz_m("DdD", False))
            + (dot_m_side(0, 1, "DDd", False) - 1j * nsz_m("DDd", False))
            + (dot_m_side(1, 1, "DdDd", False) - 1j * msz_m("DdDd", False))
            + (dot_p_side(0, 0, "DD", True) + 1j * mz_p("DD", True))
            + (dot_p_side(0, 1, "DdD", True) + 1j * nsz_p("DdD", True))
            + (dot_p_side(1, 0, "DDd", True) + 1j * nz_p("DDd", True))
            + (dot_p_side(1, 1, "DdDd", True) + 1j * msz_p("DdDd", True)))
        out[1, :, 1, :] = qq * j2 * (br - same_side)
        return out


def _h_rhs(h, coeffs, ih1_now, ih2_now, J):
    Cs, Cfa, Cfb, Cfab = coeffs
    hom = (Cs * h + Cfa * h[::-1] + Cfb * h[:, :, ::-1]
           + Cfab * h[::-1, :, ::-1])
    return 2.0 * J * J * hom + ih1_now + ih2_now


def h_rhs(h: np.ndarray, t: float, kernels: BathKernels,
          spectrum: SectorSpectrum, J: float, N: int) -> np.ndarray:
    """One-shot dh/dt at a grid time (homogeneous + both inhomogeneous drives).

    Convenience wrapper around the stepper's internals for inspection and
    testing; the propagation loop reuses the table object across steps
    instead.
    """
    tables = _EOMTables(kernels, spectrum, J, N)
    it = kernels.index_of(t)
    if tables.frozen:
        return np.zeros_like(h)
    return _h_rhs(h, tables.homogeneous_coefficients(it), tables.ih1(it),
                  tables.ih2(it), J)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

@dataclass
class MQSTrajectory:
    """Witness elements and diagnostics on the output grid."""

    t: np.ndarray
    theta_pp: np.ndarray
    theta_pm: np.ndarray
    theta_mp: np.ndarray
    theta_mm: np.ndarray
    trace: np.ndarray
    hermiticity_defect: float
    theta_series: np.ndarray | None = None   # (n_out, nm, nm) when stored
    h_final: np.ndarray | None = None
    dt: float = 0.0


def run_mqs(system, bath, t_max: float, dt: float,
            store_matrices: bool = False) -> MQSTrajectory:
    """Evolve h with fixed-step RK4 and assemble the witness elements.

    History integrals and the second-order drive are frozen at the step
    start (they vary on the kernel scale, not the step scale); the local
    first-order drive is evaluated at every stage.  The kernel grid carries
    spacing dt/2 so stages never interpolate.
    """
    from .bath import polaron_constants
    from .sectors import sector_spectrum

    N = system.N
    consts = polaron_constants(system.J, system.gamma, bath)
    spectrum = sector_spectrum(N, system.eps, consts, system.alpha)
    kernels = BathKernels.build(bath, system.J, system.gamma, t_max, dt / 2.0)
    pairs = pair_tables(spectrum)
    tables = _EOMTables(kernels, spectrum, system.J, N)

    h = initial_h(N, kernels)
    n_steps = (len(kernels.grid) - 1) // 2
    hh = kernels.dt

    nm = len(spectrum)
    n_out = n_steps + 1
    t_out = dt * np.arange(n_out)
    th = {k: np.empty(n_out, complex) for k in ("pp", "pm", "mp", "mm")}
    trace = np.empty(n_out)
    series = np.empty((n_out, nm, nm), complex) if store_matrices else None
    herm = 0.0

    def record(i_out, h_now, t_now):
        theta = relevant_theta(h_now, t_now, kernels, pairs) \
            + irrelevant_theta(t_now, N, kernels, pairs)
        th["pp"][i_out] = theta_pm(theta, +1, +1, N)
        th["pm"][i_out] = theta_pm(theta, +1, -1, N)
        th["mp"][i_out] = theta_pm(theta, -1, +1, N)
        th["mm"][i_out] = theta_pm(theta, -1, -1, N)
        trace[i_out] = np.trace(theta).real
        if series is not None:
            series[i_out] = theta
        return theta

    record(0, h, 0.0)

    zero = np.zeros_like(h)
    for k in range(n_steps):
        i0 = 2 * k
        if tables.frozen:
            coeffs = (zero, zero, zero, zero)
            ih2_now = zero
            ih1_a = ih1_b = ih1_c = zero
        else:
            coeffs = tables.homogeneous_coefficients(i0)
            ih2_now = tables.ih2(i0)
            ih1_a = tables.ih1(i0)
            ih1_b = tables.ih1(i0 + 1)
            ih1_c = tables.ih1(i0 + 2)
        k1 = _h_rhs(h, coeffs, ih1_a, ih2_now, system.J)
        k2 = _h_rhs(h + hh * k1, coeffs, ih1_b, ih2_now, system.J)
        k3 = _h_rhs(h + hh * k2, coeffs, ih1_b, ih2_now, system.J)
        k4 = _h_rhs(h + dt * k3, coeffs, ih1_c, ih2_now, system.J)
        h = h + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(h)):
            bad = np.argwhere(~np.isfinite(h))[0]
            raise HEvolutionError(
                f"non-finite h entry (s, m, s', m') = {tuple(bad)} at "
                f"t = {(k + 1) * dt:g}")
        herm = max(herm, float(np.max(np.abs(
            h - np.conj(np.transpose(h, (2, 3, 0, 1)))))))
        record(k + 1, h, (k + 1) * dt)

    return MQSTrajectory(
        t=t_out, theta_pp=th["pp"], theta_pm=th["pm"], theta_mp=th["mp"],
        theta_mm=th["mm"], trace=trace, hermiticity_defect=herm,
        theta_series=series, h_final=h, dt=dt,
    )

"""Dicke sectors of the spin ensemble and the per-sector dressed eigensystem.

The ensemble Hamiltonian conserves L^2 and L_z, so the joint dynamics block
diagonalizes over (l, m) sectors with multiplicities

    nu(l, N/2) = C(N, l + N/2) - C(N, l + 1 + N/2).

Within each sector the dressed two-level Hamiltonian is a 2x2 problem with
gap eps_m = sqrt(4 Jt^2 + (eps + 2 gt m)^2) and mixing angle
theta_m = atan2(2 Jt, eps + 2 gt m); the interaction-picture jump kernels
K^i_m(t) and their rotated versions Kt^i_m(t) are simple trigonometric
functions of these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import PolaronConstants

__all__ = [
    "degeneracy",
    "SectorTable",
    "sector_table",
    "m_weights",
    "SectorEigens",
    "sector_eigens",
    "SectorSpectrum",
    "sector_spectrum",
    "PairEigens",
    "pair_eigens",
    "kernel_K",
    "kernel_K_tilde",
    "spin_coherent_coeffs",
    "x_state_coeffs",
]


def degeneracy(l: int, N: int) -> int:
    """Multiplicity nu(l, N/2) of the total-spin-l sector for N spins (N even)."""
    if N % 2 != 0 or N < 0:
        raise ValueError("spin count N must be even and nonnegative")
    if l < 0 or l > N // 2:
        raise ValueError(f"total spin l must lie in [0, {N // 2}]")
    upper = l + 1 + N // 2
    second = math.comb(N, upper) if upper <= N else 0
    return math.comb(N, l + N // 2) - second


@dataclass(frozen=True)
class SectorTable:
    """All (l, m, nu) sectors of an N-spin ensemble."""

    N: int
    entries: tuple  # ((l, m, nu), ...) ordered by l ascending, m ascending

    def total_states(self) -> int:
        """sum_{l,m} nu(l) = 2^N."""
        return sum(nu for (_, _, nu) in self.entries)


def sector_table(N: int) -> SectorTable:
    entries = []
    for l in range(N // 2 + 1):
        nu = degeneracy(l, N)
        for m in range(-l, l + 1):
            entries.append((l, m, nu))
    table = SectorTable(N=N, entries=tuple(entries))
    if sum(degeneracy(l, N) * (2 * l + 1) for l in range(N // 2 + 1)) != 2**N:
        raise AssertionError("degeneracy sum rule violated")  # pragma: no cover
    return table


def m_weights(N: int) -> np.ndarray:
    """Total multiplicity sum_{l >= |m|} nu(l) attached to each m = -N/2..N/2."""
    return np.array(
        [sum(degeneracy(l, N) for l in range(abs(m), N // 2 + 1))
         for m in range(-N // 2, N // 2 + 1)],
        dtype=float,
    )


@dataclass(frozen=True)
class SectorEigens:
    """Dressed 2x2 eigensystem of one m sector."""

    m: float
    eps_tilde: float   # eps + 2 gamma_tilde m
    eps: float         # gap sqrt(4 Jt^2 + eps_tilde^2)
    theta: float       # mixing angle, atan2(2 Jt, eps_tilde) in (0, pi) for Jt > 0
    C: float           # cos(theta)
    S: float           # sin(theta)
    E_plus: float      # (alpha m - eta m^2) + eps/2
    E_minus: float     # (alpha m - eta m^2) - eps/2
    degenerate: bool = False


def sector_eigens(m: float, eps: float, consts: PolaronConstants,
                  alpha: float) -> SectorEigens:
    """Diagonalize the dressed sector Hamiltonian for quantum number m.

    When both the renormalized tunneling and the detuning vanish the 2x2
    block is proportional to the identity; theta is then fixed to pi/2 by
    convention and the sector flagged degenerate.
    """
    jt = consts.j_tilde
    eps_t = eps + 2.0 * consts.gamma_tilde * m
    gap = math.hypot(2.0 * jt, eps_t)
    degenerate = gap == 0.0
    theta = math.pi / 2.0 if degenerate else math.atan2(2.0 * jt, eps_t)
    shift = alpha * m - consts.eta * m * m
    return SectorEigens(
        m=m,
        eps_tilde=eps_t,
        eps=gap,
        theta=theta,
        C=math.cos(theta),
        S=math.sin(theta),
        E_plus=shift + gap / 2.0,
        E_minus=shift - gap / 2.0,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class SectorSpectrum:
    """Vectorized sector eigensystem over the full m ladder of one N."""

    ms: np.ndarray
    eps_tilde: np.ndarray
    eps: np.ndarray
    theta: np.ndarray
    C: np.ndarray
    S: np.ndarray
    E_plus: np.ndarray
    E_minus: np.ndarray
    alpha: float
    eta: float
    j_tilde: float

    def at(self, m) -> SectorEigens:
        idx = int(np.flatnonzero(self.ms == m)[0])
        return SectorEigens(
            m=float(self.ms[idx]),
            eps_tilde=float(self.eps_tilde[idx]),
            eps=float(self.eps[idx]),
            theta=float(self.theta[idx]),
            C=float(self.C[idx]),
            S=float(self.S[idx]),
            E_plus=float(self.E_plus[idx]),
            E_minus=float(self.E_minus[idx]),
        )

    def __len__(self):
        return len(self.ms)


def sector_spectrum(N: int, eps: float, consts: PolaronConstants,
                    alpha: float) -> SectorSpectrum:
    ms = np.arange(-N // 2, N // 2 + 1, dtype=float)
    rows = [sector_eigens(m, eps, consts, alpha) for m in ms]
    return SectorSpectrum(
        ms=ms,
        eps_tilde=np.array([r.eps_tilde for r in rows]),
        eps=np.array([r.eps for r in rows]),
        theta=np.array([r.theta for r in rows]),
        C=np.array([r.C for r in rows]),
        S=np.array([r.S for r in rows]),
        E_plus=np.array([r.E_plus for r in rows]),
        E_minus=np.array([r.E_minus for r in rows]),
        alpha=alpha,
        eta=consts.eta,
        j_tilde=consts.j_tilde,
    )


@dataclass(frozen=True)
class PairEigens:
    """Eigensystem of the sector-difference operator H_n - H_m."""

    n: float
    m: float
    theta_nm: float
    E_nm: float
    E_plus: float
    E_minus: float


def pair_eigens(n, m, spectrum: SectorSpectrum) -> PairEigens:
    """Diagonalize H_n - H_m in the bare two-level basis.

    theta_nm = atan2(eps_n S_n - eps_m S_m, eps_n C_n - eps_m C_m) and
    E_nm = |(eps_n C_n - eps_m C_m, eps_n S_n - eps_m S_m)|; for n = m both
    components vanish and theta_nm = 0 by convention (the phase factors are
    then equal, so the convention is immaterial).
    """
    en = spectrum.at(n)
    em = spectrum.at(m)
    dc = en.eps * en.C - em.eps * em.C
    ds = en.eps * en.S - em.eps * em.S
    gap = math.hypot(dc, ds)
    theta = 0.0 if gap == 0.0 else math.atan2(ds, dc)
    shift = spectrum.alpha * (n - m) - spectrum.eta * (n * n - m * m)
    return PairEigens(n=float(n), m=float(m), theta_nm=theta, E_nm=gap,
                      E_plus=shift + gap / 2.0, E_minus=shift - gap / 2.0)


# ---------------------------------------------------------------------------
# interaction-picture kernels
# ---------------------------------------------------------------------------

def kernel_K(component: str, t, eig: SectorEigens):
    """Jump kernel K^i_m(t) of the sector raising operator.

    K^x = [(1+C) e^{i eps t} - (1-C) e^{-i eps t}] / 4,
    K^y = i [(1+C) e^{i eps t} + (1-C) e^{-i eps t}] / 4,
    K^z = S / 2 (time independent).
    """
    t = np.asarray(t, dtype=float)
    if component == "z":
        out = np.full(t.shape, eig.S / 2.0 + 0.0j)
        return out if t.shape else complex(out)
    ep = np.exp(1j * eig.eps * t)
    en = np.conj(ep)
    if component == "x":
        return 0.25 * ((1.0 + eig.C) * ep - (1.0 - eig.C) * en)
    if component == "y":
        return 0.25j * ((1.0 + eig.C) * ep + (1.0 - eig.C) * en)
    raise ValueError(f"component must be one of x, y, z; got {component!r}")


def kernel_K_tilde(component: str, t, eig: SectorEigens):
    """Kernels rotated into the sector eigenbasis.

    Kt^x = C K^x + S K^z,  Kt^y = K^y,  Kt^z = -S K^x + C K^z.
    """
    if component == "x":
        return eig.C * kernel_K("x", t, eig) + eig.S * kernel_K("z", t, eig)
    if component == "y":
        return kernel_K("y", t, eig)
    if component == "z":
        return -eig.S * kernel_K("x", t, eig) + eig.C * kernel_K("z", t, eig)
    raise ValueError(f"component must be one of x, y, z; got {component!r}")


def kernel_K_tilde_pm(component: str, sign: int, t, eig: SectorEigens):
    """Kt^{i+} = Kt + conj(Kt) or Kt^{i-} = Kt - conj(Kt)."""
    k = kernel_K_tilde(component, t, eig)
    return k + np.conj(k) if sign > 0 else k - np.conj(k)


def _kernel_table(spectrum: SectorSpectrum, t: np.ndarray) -> np.ndarray:
    """All rotated kernels on a grid: shape (3, n_m, n_t), components x, y, z."""
    t = np.asarray(t, dtype=float)
    C = spectrum.C[:, None]
    S = spectrum.S[:, None]
    ep = np.exp(1j * np.multiply.outer(spectrum.eps, t))
    en = np.conj(ep)
    kx = 0.25 * ((1.0 + C) * ep - (1.0 - C) * en)
    ky = 0.25j * ((1.0 + C) * ep + (1.0 - C) * en)
    kz = np.broadcast_to(S / 2.0 + 0.0j, ep.shape)
    return np.stack([C * kx + S * kz, ky, -S * kx + C * kz])


# ---------------------------------------------------------------------------
# collective spin states
# ---------------------------------------------------------------------------

def spin_coherent_coeffs(theta: float, phi: float, N: int) -> np.ndarray:
    """Coefficients of the spin coherent state |Omega> over m = -N/2..N/2.

    c_m = sqrt(N!) u^{N/2+m} v^{N/2-m} / sqrt((N/2-m)! (N/2+m)!) with
    u = cos(theta/2) e^{-i phi/2}, v = sin(theta/2) e^{i phi/2} (gauge angle
    zero).  Normalized for any N by the binomial theorem.
    """
    if N % 2 != 0 or N < 0:
        raise ValueError("spin count N must be even and nonnegative")
    u = math.cos(theta / 2.0) * np.exp(-0.5j * phi)
    v = math.sin(theta / 2.0) * np.exp(0.5j * phi)
    ms = np.arange(-N // 2, N // 2 + 1)
    coeffs = np.array(
        [math.sqrt(math.comb(N, N // 2 + m)) * u ** (N // 2 + m) * v ** (N // 2 - m)
         for m in ms]
    )
    return coeffs


def x_state_coeffs(sign: int, N: int) -> np.ndarray:
    """Coefficients (+-1)^m q_m of |+-x>, q_m = 2^{-N/2} sqrt(C(N, N/2+m))."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    ms = np.arange(-N // 2, N // 2 + 1)
    q = np.array([math.sqrt(math.comb(N, N // 2 + m)) for m in ms]) / 2 ** (N / 2)
    return (float(sign)) ** ms * q


def q_coeffs(N: int) -> np.ndarray:
    """q_m = 2^{-N/2} sqrt(C(N, N/2+m)) for m = -N/2..N/2."""
    ms = np.arange(-N // 2, N // 2 + 1)
    return np.array([math.sqrt(math.comb(N, N // 2 + m)) for m in ms]) / 2 ** (N / 2)

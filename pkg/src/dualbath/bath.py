"""Boson-bath spectral densities, correlation functions and polaron constants.

The boson bath couples to the two-level system (TT channel), to the spin
ensemble (SS channel) and to both at once (TS cross channel).  All three
channels carry the same cubic spectral shape

    J_c(w) = kappa_c * w^3 * exp(-w/omega_c) / omega_ph^2,

so every correlation function factorizes into a coupling constant times one
of two shape integrals:

    C(t) = int_0^inf dw (J/kappa)(w) / w^2 * coth(beta w / 2) * cos(w t)
    S(t) = int_0^inf dw (J/kappa)(w) / w^2 * sin(w t)

Both have closed forms.  S(t) is temperature independent,

    S(t) = 2 t omega_c^3 / (1 + t^2 omega_c^2)^2  (per unit kappa),

while C(t) splits into the zero-temperature part

    omega_c^2 (1 - t^2 omega_c^2) / (1 + t^2 omega_c^2)^2

plus a thermal correction that resums the Bose factor exactly through the
trigamma function,

    (2 / beta^2) Re psi'(1 + (1/omega_c - i t)/beta).

A direct Gauss-Laguerre evaluation with pointwise coth is kept as an
independent cross-check (``method="quadrature"``); it self-monitors by
comparing node counts and raises :class:`QuadratureError` when the
oscillatory factor cos(w t) is no longer resolved.

Discrete mode sets (for benchmarking against exact diagonalization) provide
the same interface through :class:`DiscreteBath`, where the shape integrals
become finite sums over (omega_k, xi_k, eta_k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._special import gauss_laguerre, trigamma

__all__ = [
    "BathParams",
    "DiscreteBath",
    "BathKernels",
    "PolaronConstants",
    "QuadratureError",
    "spectral_density",
    "phi",
    "psi",
    "psi_offset",
    "polaron_constants",
    "d_m",
    "d_phase",
    "f_mqs",
    "displacement_correlators",
]

CHANNELS = ("TT", "SS", "TS")

_COTH_CAP = 350.0  # argument beyond which coth(x) == 1.0 in double precision


class QuadratureError(RuntimeError):
    """Raised when the frequency quadrature fails its self-consistency check."""


@dataclass(frozen=True)
class BathParams:
    """Couplings and thermodynamic state of the cubic boson bath.

    Parameters
    ----------
    kappa1, kappa2, kappa3 : float
        Dimensionless couplings of the TT, TS and SS channels.  The cross
        coupling must satisfy the pointwise Cauchy-Schwarz bound
        kappa2^2 <= kappa1 * kappa3.
    omega_c : float
        Exponential cutoff frequency.
    beta : float
        Inverse temperature.  ``math.inf`` selects the T = 0 limit.
    omega_ph : float
        Characteristic phonon frequency used as the energy unit.
    """

    kappa1: float
    kappa2: float
    kappa3: float
    omega_c: float
    beta: float
    omega_ph: float = 1.0

    def __post_init__(self):
        if self.kappa1 < 0 or self.kappa3 < 0:
            raise ValueError("kappa1 and kappa3 must be nonnegative")
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.omega_ph > 0:
            raise ValueError("omega_ph must be positive")
        if self.kappa2**2 > self.kappa1 * self.kappa3 + 1e-12:
            raise ValueError(
                "kappa2^2 <= kappa1*kappa3 violated: "
                f"{self.kappa2**2:g} > {self.kappa1 * self.kappa3:g}"
            )

    def coupling(self, channel: str) -> float:
        if channel == "TT":
            return self.kappa1
        if channel == "SS":
            return self.kappa3
        if channel == "TS":
            return self.kappa2
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")

    # -- shape integrals (per unit kappa, omega_ph folded in) ---------------

    def _scale(self, channel: str) -> float:
        return self.coupling(channel) / self.omega_ph**2

    def corr_cos(self, t, channel: str = "TT"):
        """Finite-temperature cosine transform of J_c/w^2 (closed form)."""
        t = np.asarray(t, dtype=float)
        wc = self.omega_c
        x = (t * wc) ** 2
        cold = wc**2 * (1.0 - x) / (1.0 + x) ** 2
        if math.isinf(self.beta):
            thermal = 0.0
        else:
            z = 1.0 + (1.0 / wc - 1j * t) / self.beta
            thermal = (2.0 / self.beta**2) * trigamma(z).real
        return self._scale(channel) * (cold + thermal)

    def corr_sin(self, t, channel: str = "TT"):
        """Sine transform of J_c/w^2 (temperature independent, closed form)."""
        t = np.asarray(t, dtype=float)
        wc = self.omega_c
        return self._scale(channel) * 2.0 * t * wc**3 / (1.0 + (t * wc) ** 2) ** 2

    def moment_inv_omega(self, channel: str) -> float:
        """int J_c(w)/w dw = 2 kappa_c omega_c^3 / omega_ph^2."""
        return self._scale(channel) * 2.0 * self.omega_c**3

    def corr_cos_quad(self, t, channel: str = "TT", nodes: int = 200,
                      rtol: float = 1e-9):
        """Cosine transform by Gauss-Laguerre quadrature with pointwise coth.

        The integrand w * coth(beta w/2) * cos(w t) is sampled on nodes of
        the weight exp(-w/omega_c); the w -> 0 end is regular (w coth -> 2/beta)
        and never evaluated at w = 0.  Convergence is checked by doubling the
        node count; disagreement beyond ``rtol`` of the kernel scale raises
        :class:`QuadratureError` (this happens once cos(w t) oscillates faster
        than the node spacing, i.e. for large t).
        """
        coarse = self._corr_cos_gl(t, channel, nodes)
        fine = self._corr_cos_gl(t, channel, 2 * nodes)
        scale = max(abs(self.coupling(channel)) * self.omega_c**2 / self.omega_ph**2,
                    1e-300)
        err = np.max(np.abs(coarse - fine))
        if err > rtol * scale:
            raise QuadratureError(
                f"Gauss-Laguerre transform not converged: |I_{nodes} - I_{2*nodes}|"
                f" = {err:.3e} > {rtol:g} * scale {scale:g}"
                f" (channel {channel}, max t = {np.max(np.atleast_1d(t)):g})"
            )
        return fine

    def _corr_cos_gl(self, t, channel, nodes):
        x, w = gauss_laguerre(nodes)
        om = self.omega_c * x
        if math.isinf(self.beta):
            cth = np.ones_like(om)
        else:
            cth = 1.0 / np.tanh(np.minimum(self.beta * om / 2.0, _COTH_CAP))
        t = np.asarray(t, dtype=float)
        osc = np.cos(np.multiply.outer(t, om))
        return self._scale(channel) * self.omega_c**2 * (osc * (w * x * cth)).sum(axis=-1)

    def corr_sin_quad(self, t, channel: str = "TT", nodes: int = 200,
                      rtol: float = 1e-9):
        """Sine transform by Gauss-Laguerre quadrature (cross-check path)."""
        coarse = self._corr_sin_gl(t, channel, nodes)
        fine = self._corr_sin_gl(t, channel, 2 * nodes)
        scale = max(abs(self.coupling(channel)) * self.omega_c**2 / self.omega_ph**2,
                    1e-300)
        err = np.max(np.abs(coarse - fine))
        if err > rtol * scale:
            raise QuadratureError(
                f"Gauss-Laguerre sine transform not converged: err = {err:.3e}"
            )
        return fine

    def _corr_sin_gl(self, t, channel, nodes):
        x, w = gauss_laguerre(nodes)
        om = self.omega_c * x
        t = np.asarray(t, dtype=float)
        osc = np.sin(np.multiply.outer(t, om))
        return self._scale(channel) * self.omega_c**2 * (osc * (w * x)).sum(axis=-1)


@dataclass(frozen=True)
class DiscreteBath:
    """Finite mode set (omega_k, xi_k, eta_k) with the same interface.

    Used to drive the master-equation machinery with exactly the bath seen
    by the truncated exact-diagonalization benchmark.
    """

    omega: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    beta: float

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))
        if np.any(om <= 0):
            raise ValueError("mode frequencies must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def _weights(self, channel: str) -> np.ndarray:
        if channel == "TT":
            return self.xi**2
        if channel == "SS":
            return self.eta**2
        if channel == "TS":
            return self.xi * self.eta
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")

    def coupling(self, channel: str) -> float:
        # effective kappa-like scale, used only for error normalization
        return float(np.sum(np.abs(self._weights(channel)) / self.omega**2))

    def corr_cos(self, t, channel: str = "TT"):
        g = self._weights(channel) / self.omega**2
        if math.isinf(self.beta):
            cth = np.ones_like(self.omega)
        else:
            cth = 1.0 / np.tanh(np.minimum(self.beta * self.omega / 2.0, _COTH_CAP))
        t = np.asarray(t, dtype=float)
        return (np.cos(np.multiply.outer(t, self.omega)) * (g * cth)).sum(axis=-1)

    def corr_sin(self, t, channel: str = "TT"):
        g = self._weights(channel) / self.omega**2
        t = np.asarray(t, dtype=float)
        return (np.sin(np.multiply.outer(t, self.omega)) * g).sum(axis=-1)

    def moment_inv_omega(self, channel: str) -> float:
        return float(np.sum(self._weights(channel) / self.omega))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def spectral_density(channel: str, omega, p: BathParams):
    """Cubic spectral density J_c(w) = kappa_c w^3 exp(-w/omega_c)/omega_ph^2."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("spectral density defined for omega >= 0")
    return p.coupling(channel) * omega**3 * np.exp(-omega / p.omega_c) / p.omega_ph**2


def phi(t, p, method: str = "closed", nodes: int = 200):
    """TT bath correlation function phi(t) = phi1(t) - i phi2(t).

    ``method="closed"`` uses the exact trigamma-resummed form; ``"quadrature"``
    evaluates coth pointwise on a Gauss-Laguerre grid and is retained as an
    independent validation path.
    """
    if method == "closed":
        c = p.corr_cos(t, "TT")
    elif method == "quadrature":
        c = p.corr_cos_quad(t, "TT", nodes=nodes)
    else:
        raise ValueError(f"unknown method {method!r}")
    return c - 1j * p.corr_sin(t, "TT")


def psi(t, p, method: str = "closed", nodes: int = 200):
    """SS bath correlation function psi(t) = psi1(t) - i psi2(t).

    For the shared cubic shape psi1 = (kappa3/kappa1) phi1 whenever
    kappa1 > 0; this routine evaluates the SS channel directly so the
    identity holds by construction and kappa1 = 0 needs no special case.
    """
    if method == "closed":
        c = p.corr_cos(t, "SS")
    elif method == "quadrature":
        c = p.corr_cos_quad(t, "SS", nodes=nodes)
    else:
        raise ValueError(f"unknown method {method!r}")
    return c - 1j * p.corr_sin(t, "SS")


def psi_offset(delta_m: int, t, p, method: str = "closed"):
    """Cross correlation psi_{mn}(t) = (m - n) * [TS cosine transform].

    Equal to (m - n)(kappa2/kappa1) phi1(t) for the cubic shape.
    """
    if method == "closed":
        c = p.corr_cos(t, "TS")
    elif method == "quadrature":
        c = p.corr_cos_quad(t, "TS")
    else:
        raise ValueError(f"unknown method {method!r}")
    return delta_m * c


@dataclass(frozen=True)
class PolaronConstants:
    """Dressing factor and renormalized couplings produced by the polaron shift."""

    theta: float        # <cosh B2> = exp(-phi1(0)/2)
    j_tilde: float      # J * theta
    gamma_tilde: float  # gamma - sum_k xi_k eta_k / omega_k
    eta: float          # sum_k eta_k^2 / omega_k

    def __iter__(self):
        return iter((self.theta, self.j_tilde, self.gamma_tilde, self.eta))


def polaron_constants(J: float, gamma: float, p) -> PolaronConstants:
    """Thermal displacement average and renormalized couplings.

    theta = exp(-phi1(0)/2) follows from the Gaussian average of cosh(B2)
    over the bath; for the cubic density the first inverse-frequency moments
    give gamma_tilde = gamma - 2 kappa2 omega_c^3 and eta = 2 kappa3 omega_c^3
    (in units of omega_ph^2).
    """
    phi1_0 = float(p.corr_cos(0.0, "TT"))
    theta = math.exp(-phi1_0 / 2.0)
    return PolaronConstants(
        theta=theta,
        j_tilde=J * theta,
        gamma_tilde=gamma - p.moment_inv_omega("TS"),
        eta=p.moment_inv_omega("SS"),
    )


def d_phase(m, t, p):
    """Phase lambda_m(t) of the initial-slip function: d_m(t) = exp(i lambda) - 1.

    lambda_m(t) = sum_k xi_k sin(w_k t)(2 m eta_k - xi_k)/w_k^2
                = 2 m * [TS sine transform] - phi2(t).
    """
    return 2.0 * np.multiply.outer(np.asarray(m, dtype=float), p.corr_sin(t, "TS")) \
        - p.corr_sin(t, "TT")


def d_m(m, t, p):
    """Initial-slip auxiliary function d_m(t); |d_m + 1| = 1 identically."""
    return np.exp(1j * d_phase(m, t, p)) - 1.0


def f_mqs(t, p):
    """Phase-accumulation rate f(t) = sum_k (eta_k^2/w_k)(1 - sinc(w_k t)).

    Closed form for the cubic SS channel:
    f(t) = 2 kappa3 omega_c^3 [1 - 1/(1 + t^2 omega_c^2)^2]; f(0) = 0 and
    f(inf) = eta.  For discrete baths the finite sum is evaluated directly.
    """
    t = np.asarray(t, dtype=float)
    if isinstance(p, DiscreteBath):
        om = p.omega
        g = p.eta**2 / om
        return (g * (1.0 - np.sinc(np.multiply.outer(t, om) / np.pi))).sum(axis=-1)
    eta = p.moment_inv_omega("SS")
    return eta * (1.0 - 1.0 / (1.0 + (t * p.omega_c) ** 2) ** 2)


def displacement_correlators(t, s, kernels: "BathKernels"):
    """Two-time polaron fluctuation correlators of D(t) = e^{B2(t)} - theta.

    Gaussian displacement algebra gives
        <D(t) D(s)>      = theta^2 (exp(-phi(t-s)) - 1)
        <D(t) D^dag(s)>  = theta^2 (exp(+phi(t-s)) - 1)
    with phi evaluated at the time difference.  Both vanish when the TT
    coupling is zero.
    """
    u = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
    ph = kernels.phi_at(u)
    th2 = kernels.theta_factor**2
    return th2 * (np.exp(-ph) - 1.0), th2 * (np.exp(ph) - 1.0)


# ---------------------------------------------------------------------------
# tabulated kernels
# ---------------------------------------------------------------------------

@dataclass
class BathKernels:
    """Correlation functions cached on a uniform time grid.

    All six channel transforms are stored (the dynamics modules consume
    phi1/phi2 for the TT channel, psi1/psi2 for SS, chi1/chi2 for TS),
    together with the polaron constants for the given bare couplings.
    Instances are immutable in practice and safe to share across threads.
    """

    grid: np.ndarray
    dt: float
    phi1: np.ndarray
    phi2: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    chi1: np.ndarray
    chi2: np.ndarray
    theta_factor: float
    j_tilde: float
    gamma_tilde: float
    eta: float
    beta: float
    bath: object = field(repr=False, default=None)

    @classmethod
    def build(cls, bath, J: float, gamma: float, t_max: float, dt: float
              ) -> "BathKernels":
        if dt <= 0 or t_max <= 0:
            raise ValueError("t_max and dt must be positive")
        n = int(round(t_max / dt))
        grid = dt * np.arange(n + 1)
        consts = polaron_constants(J, gamma, bath)
        return cls(
            grid=grid,
            dt=dt,
            phi1=np.asarray(bath.corr_cos(grid, "TT")),
            phi2=np.asarray(bath.corr_sin(grid, "TT")),
            psi1=np.asarray(bath.corr_cos(grid, "SS")),
            psi2=np.asarray(bath.corr_sin(grid, "SS")),
            chi1=np.asarray(bath.corr_cos(grid, "TS")),
            chi2=np.asarray(bath.corr_sin(grid, "TS")),
            theta_factor=consts.theta,
            j_tilde=consts.j_tilde,
            gamma_tilde=consts.gamma_tilde,
            eta=consts.eta,
            beta=bath.beta,
            bath=bath,
        )

    def __len__(self):
        return len(self.grid)

    @cached_property
    def phi(self) -> np.ndarray:
        return self.phi1 - 1j * self.phi2

    @cached_property
    def exp_phi_minus(self) -> np.ndarray:
        """exp(-phi(t)) on the grid."""
        return np.exp(-self.phi)

    @cached_property
    def exp_phi_plus(self) -> np.ndarray:
        """exp(+phi(t)) on the grid."""
        return np.exp(self.phi)

    @cached_property
    def w_minus(self) -> np.ndarray:
        """<D(t)D(0)> = theta^2 (e^{-phi} - 1) on the grid."""
        return self.theta_factor**2 * (self.exp_phi_minus - 1.0)

    @cached_property
    def w_plus(self) -> np.ndarray:
        """<D(t)D^dag(0)> = theta^2 (e^{+phi} - 1) on the grid."""
        return self.theta_factor**2 * (self.exp_phi_plus - 1.0)

    def phi_at(self, t):
        """phi at arbitrary (possibly negative) times; phi(-t) = conj(phi(t))."""
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        c = self.bath.corr_cos(a, "TT") if self.bath is not None else self._interp("phi1", a)
        s = self.bath.corr_sin(a, "TT") if self.bath is not None else self._interp("phi2", a)
        return c - 1j * np.sign(t) * s

    def d_phase_table(self, ms) -> np.ndarray:
        """lambda_m on the grid for each sector label, shape (n_m, n_t)."""
        ms = np.asarray(ms, dtype=float)
        return 2.0 * np.multiply.outer(ms, self.chi2) - self.phi2

    def index_of(self, t: float) -> int:
        """Grid index of time t (must lie on the grid)."""
        idx = int(round(t / self.dt))
        if idx < 0 or idx >= len(self.grid) or abs(self.grid[idx] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} not on the kernel grid (dt = {self.dt}, "
                             f"t_max = {self.grid[-1]})")
        return idx

    _PARITY = {"phi1": +1, "psi1": +1, "chi1": +1,
               "phi2": -1, "psi2": -1, "chi2": -1}

    def _interp(self, name: str, t):
        from scipy.interpolate import CubicSpline
        # reflect around t = 0 with the kernel's known parity so the spline
        # sees no artificial boundary there
        values = getattr(self, name)
        sign = self._PARITY.get(name, +1)
        ext_t = np.concatenate([-self.grid[:0:-1], self.grid])
        ext_v = np.concatenate([sign * values[:0:-1], values])
        return CubicSpline(ext_t, ext_v)(t)

    def interp(self, name: str, t):
        """Cubic interpolation of a tabulated kernel at off-grid times."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.grid[-1]):
            raise ValueError("interpolation query outside the kernel grid")
        return self._interp(name, t)

"""Sine and Airy kernels, Nystrom Fredholm determinants, Tracy-Widom and gap laws.

Fredholm determinants use Gauss-Legendre nodes on a finite interval. For the
Airy kernel on ``(s, inf)`` the half-line is truncated at ``AIRY_CUTOFF``,
the point beyond which ``K_Ai(x, x) < 1e-18``; for ``s`` above the cutoff the
determinant is 1 to working precision.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np
from scipy import integrate, interpolate

from .airy import airy

TW_RANGE = (-10.0, 6.0)
SINE_RANGE = 5.0
GAP_STEP = 1e-2
DOUBLING_TOL = 1e-8


class ConvergenceError(ArithmeticError):
    pass


class Kind(str, enum.Enum):
    SINE = "sine"
    AIRY = "airy"


@dataclass(frozen=True)
class KernelSpec:
    kind: Kind
    lo: float
    hi: float = np.inf


def sine_kernel(u, v):
    return np.sinc(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))


def _airy_series(ai_u, aip_u, u, h):
    # Taylor expansion of the quotient about v = u, through h^2
    return (aip_u**2 - u * ai_u**2) - 0.5 * h * ai_u**2 \
        - h * h / 6.0 * (ai_u * aip_u + u * u * ai_u**2 - u * aip_u**2)


def _airy_kernel_from(ai_u, aip_u, ai_v, aip_v, u, v):
    h = v - u
    near = np.abs(h) < 1e-6
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (ai_u * aip_v - aip_u * ai_v) / (u - v)
    return np.where(near, _airy_series(ai_u, aip_u, u, h), direct)


def airy_kernel_series(u, v):
    """Near-diagonal expansion of the Airy kernel, used by ``airy_kernel`` when ``|u - v| < 1e-6``."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    au, apu = airy(u)
    out = _airy_series(np.asarray(au), np.asarray(apu), u, v - u)
    return float(out) if out.ndim == 0 else out


def airy_kernel(u, v):
    """``(Ai(u)Ai'(v) - Ai'(u)Ai(v)) / (u - v)``, with a Taylor series for ``|u - v| < 1e-6``."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    au, apu = airy(u)
    av, apv = airy(v)
    out = _airy_kernel_from(np.asarray(au), np.asarray(apu), np.asarray(av), np.asarray(apv), u, v)
    return float(out) if out.ndim == 0 else out


def _find_cutoff():
    x = 5.0
    while True:
        ai, aip = airy(x)
        if aip * aip - x * ai * ai < 1e-18:
            return x
        x += 0.05


AIRY_CUTOFF = _find_cutoff()


@functools.lru_cache(maxsize=16)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _nystrom_matrix(spec: KernelSpec, n: int):
    lo = spec.lo
    hi = AIRY_CUTOFF if spec.kind is Kind.AIRY else spec.hi
    if not hi > lo:
        return None
    t, w = _gauss_legendre(n)
    x = lo + (hi - lo) * (t + 1) / 2
    w = w * (hi - lo) / 2
    if spec.kind is Kind.SINE:
        K = sine_kernel(x[:, None], x[None, :])
    else:
        ai, aip = airy(x)
        K = _airy_kernel_from(ai[:, None], aip[:, None], ai[None, :], aip[None, :], x[:, None], x[None, :])
        np.fill_diagonal(K, aip**2 - x * ai**2)
    sw = np.sqrt(w)
    return sw[:, None] * K * sw[None, :]


def fredholm_det(spec: KernelSpec, n_quad: int = 80, check: bool = False) -> float:
    """``det(I - K)`` on the spec's domain by Gauss-Legendre Nystrom discretisation.

    With ``check=True`` the computation is repeated at ``2 n_quad`` and a
    :class:`ConvergenceError` is raised if the two differ by more than 1e-8.
    """
    if n_quad < 10:
        raise ValueError("n_quad must be at least 10")
    A = _nystrom_matrix(spec, n_quad)
    if A is None:
        return 1.0
    d = float(np.linalg.det(np.eye(n_quad) - A))
    if check:
        d2 = fredholm_det(spec, 2 * n_quad)
        if abs(d2 - d) > DOUBLING_TOL:
            raise ConvergenceError(f"Nystrom doubling shift {abs(d2 - d):.2e} exceeds {DOUBLING_TOL}")
    return d


def discretized_operator(spec: KernelSpec, n_quad: int = 80):
    """Symmetrised Nystrom matrix ``W^1/2 K W^1/2`` (for spectral checks)."""
    return _nystrom_matrix(spec, n_quad)


def _check_tw_range(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < TW_RANGE[0]) or np.any(s > TW_RANGE[1]):
        raise ValueError(f"tw_cdf: s outside {TW_RANGE}")
    return s


def tw_cdf(s, n_quad: int = 80):
    """Tracy-Widom (GUE) distribution function via the Airy-kernel determinant on (s, inf)."""
    s = _check_tw_range(s)
    vals = np.array([fredholm_det(KernelSpec(Kind.AIRY, float(t)), n_quad) for t in s.ravel()])
    vals = np.clip(vals, 0.0, 1.0).reshape(s.shape)
    return float(vals) if vals.ndim == 0 else vals


@functools.lru_cache(maxsize=1)
def _painleve_solution(s0=8.0, s_end=-10.5):
    ai, aip = airy(s0)
    # J(s) = int_s^inf q^2, I(s) = int_s^inf (t - s) q^2; for q = Ai both are closed form
    J0 = aip**2 - s0 * ai**2
    I0 = (2 * s0**2 * ai**2 - 2 * s0 * aip**2 - ai * aip) / 3.0

    def rhs(s, y):
        q, qp, J, _ = y
        return [qp, s * q + 2 * q**3, -q * q, -J]

    return integrate.solve_ivp(rhs, (s0, s_end), [ai, aip, J0, I0], method="DOP853",
                               rtol=1e-13, atol=1e-30, dense_output=True)


def tw_cdf_painleve(s):
    """Tracy-Widom CDF from the Hastings-McLeod solution of Painleve II (q ~ Ai at +inf)."""
    s = _check_tw_range(s)
    sol = _painleve_solution()
    flat = s.ravel()
    out = np.empty_like(flat)
    hi = flat >= 8.0
    out[~hi] = np.exp(-sol.sol(flat[~hi])[3])
    for i in np.nonzero(hi)[0]:
        ai, aip = airy(flat[i])
        out[i] = np.exp(-(2 * flat[i]**2 * ai**2 - 2 * flat[i] * aip**2 - ai * aip) / 3.0)
    out = out.reshape(s.shape)
    return float(out) if out.ndim == 0 else out


def hastings_mcleod(s):
    return _painleve_solution().sol(np.asarray(s, dtype=float))[0]


@dataclass(frozen=True)
class TWTable:
    s_grid: np.ndarray
    cdf: np.ndarray

    @functools.cached_property
    def _interp(self):
        return interpolate.PchipInterpolator(self.s_grid, self.cdf, extrapolate=False)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        v = self._interp(np.clip(s, self.s_grid[0], self.s_grid[-1]))
        v = np.where(s < self.s_grid[0], 0.0, np.where(s > self.s_grid[-1], 1.0, v))
        return np.clip(v, 0.0, 1.0)

    def mean(self) -> float:
        s, F = self.s_grid, self.cdf
        return float(s[-1] - integrate.simpson(F, x=s))

    def variance(self) -> float:
        s, F = self.s_grid, self.cdf
        m2 = s[-1] ** 2 - integrate.simpson(2 * s * F, x=s)
        return float(m2 - self.mean() ** 2)


@functools.lru_cache(maxsize=4)
def tw_table(step: float = 0.01, n_quad: int = 80) -> TWTable:
    s = np.arange(TW_RANGE[0], TW_RANGE[1] + step / 2, step)
    return TWTable(s, tw_cdf(s, n_quad))


# ---------------------------------------------------------------------------
# bulk: sine-kernel gap probability and spacing law


def sine_gap_probability(s, n_quad: int = 80):
    """Probability ``E(s)`` that an interval of length s holds no sine-process point."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > SINE_RANGE + 4 * GAP_STEP):
        raise ValueError(f"gap probability grid covers [0, {SINE_RANGE}]")
    vals = np.array([fredholm_det(KernelSpec(Kind.SINE, 0.0, float(t)), n_quad) for t in s.ravel()])
    vals = vals.reshape(s.shape)
    return float(vals) if vals.ndim == 0 else vals


@dataclass(frozen=True)
class GapTable:
    s: np.ndarray
    E: np.ndarray
    density: np.ndarray
    cdf: np.ndarray

    def mass(self) -> float:
        return float(integrate.simpson(self.density, x=self.s))

    def mean(self) -> float:
        return float(integrate.simpson(self.s * self.density, x=self.s))


def _second_difference(f, h):
    n = len(f)
    p = np.empty(n)
    p[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    for i in (0, 1):
        p[i] = (35 * f[i] - 104 * f[i + 1] + 114 * f[i + 2] - 56 * f[i + 3] + 11 * f[i + 4]) / (12 * h * h)
        j = n - 1 - i
        p[j] = (35 * f[j] - 104 * f[j - 1] + 114 * f[j - 2] - 56 * f[j - 3] + 11 * f[j - 4]) / (12 * h * h)
    return p


@functools.lru_cache(maxsize=2)
def gap_table(n_quad: int = 80) -> GapTable:
    s = np.arange(0.0, SINE_RANGE + GAP_STEP / 2, GAP_STEP)
    E = sine_gap_probability(s, n_quad)
    p = _second_difference(E, GAP_STEP)
    cdf = integrate.cumulative_trapezoid(p, s, initial=0.0)
    return GapTable(s, E, p, cdf)


def sine_spacing_cdf(s):
    """Nearest-neighbour spacing distribution of the sine process (unit density)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > SINE_RANGE):
        raise ValueError(f"spacing cdf table covers [0, {SINE_RANGE}]")
    t = gap_table()
    v = np.interp(s, t.s, t.cdf)
    return float(v) if v.ndim == 0 else v


def sine_spacing_cdf_clipped(s):
    """Same as :func:`sine_spacing_cdf` but equal to 1 beyond the table (for KS tests)."""
    s = np.asarray(s, dtype=float)
    return np.where(s > SINE_RANGE, 1.0, sine_spacing_cdf(np.clip(s, 0.0, SINE_RANGE)))


def number_variance(L):
    """Variance of the sine-process count in a window of length L."""
    L = np.atleast_1d(np.asarray(L, dtype=float))
    out = np.array([
        x - 2 * integrate.quad(lambda t, x=x: (x - t) * np.sinc(t) ** 2, 0, x, limit=400)[0]
        for x in L
    ])
    return out

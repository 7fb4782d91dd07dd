"""Limiting spectral density: closed form, cubic-root oracle, edges and masses.

``rho`` is the density of the measure whose Stieltjes transform is ``xi_1``;
it has total mass ``c`` on ``(0, inf)``. The eigenvalue law ``F`` has density
``rho / c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .model import ModelParams
from .spectral_curve import (
    Regime,
    cubic_discriminant,
    curve_coefficients,
    d2z_dxi2,
    d3,
    d3_factored,
    label_branches_array,
    quartic_roots,
    sheet_assignment,
    solve_cubic_at,
    support_intervals,
)

__all__ = [
    "DensityProfile", "OffSupportError", "rho_closed_form", "rho_oracle", "rho",
    "edge_constants", "interval_masses", "density_F", "cdf_F", "r_of_z",
    "self_consistency_residual", "density_profile", "support_intervals",
]

QUAD_TOL = 1e-12


class OffSupportError(ValueError):
    pass


@dataclass
class DensityProfile:
    support: list
    z: np.ndarray
    rho: np.ndarray
    edge_constants: np.ndarray
    masses: tuple

    @property
    def rho_F(self):
        return self.rho / self.masses_total

    @property
    def masses_total(self):
        return float(sum(self.masses))


def r_of_z(z, params: ModelParams):
    k = curve_coefficients(params)
    A2, B1, B2, a = k.A2, k.B1, k.B2, params.a
    w = 1.0 / np.asarray(z, dtype=float)
    return (
        -2 * B2**3 / a**3 * w**3
        + (9 * B1 * B2 / a**2 - 6 * A2 * B2**2 / a**3) * w**2
        + (9 * B2 / a**2 + 9 * B1 * A2 / a**2 - 27 / a - 6 * A2**2 * B2 / a**3) * w
        + (9 * A2 / a**2 - 2 * A2**3 / a**3)
    ) / 27.0


def p_of_z(z, params: ModelParams):
    """Linear coefficient of the depressed cubic; ``D3/(a z)^4 = -27 r^2 - 4 p^3``."""
    k = curve_coefficients(params)
    z = np.asarray(z, dtype=float)
    az = params.a * z
    p2 = (k.A2 * z + k.B2) / az
    p1 = (z + k.B1) / az
    return p1 - p2 * p2 / 3.0


def rho_closed_form(z, params: ModelParams):
    """Closed-form density on the interior of the support (two-cut regime).

    ``u_pm = (r +- sqrt(-D3 / (27 a^4 z^4))) / 2`` with real cube roots; the
    density is ``sqrt(3)/(2 pi) |cbrt(u_+) - cbrt(u_-)|``.
    """
    if quartic_roots(params).regime is not Regime.TWO_CUT:
        raise ValueError("closed form is stated for the two-cut regime")
    z = np.asarray(z, dtype=float)
    # product form of D3: the expanded polynomial cancels badly near its roots
    D = d3_factored(z, params)
    if np.any(D >= 0) or np.any(z <= 0):
        raise OffSupportError("closed-form density requires D3(z) < 0 (z inside the support)")
    a = params.a
    s = np.sqrt(-D / (27.0 * a**4 * z**4))
    r = r_of_z(z, params)
    # the smaller of u_+, u_- loses all digits when r ~ +-s; take it from u_+ u_- = -p^3/27
    big = np.where(r >= 0, (r + s) / 2.0, (r - s) / 2.0)
    A = np.cbrt(big)
    B = -p_of_z(z, params) / (3.0 * A)
    # |A - B| = s / (A^2 + AB + B^2) since |A^3 - B^3| = s
    return np.sqrt(3.0) / (2 * np.pi) * s / (A * A + A * B + B * B)


def rho_oracle(z, params: ModelParams):
    """``|Im xi|/pi`` for the complex root of the cubic at real ``z``; zero when all roots are real."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.zeros_like(z)
    pos = z > 0
    if np.any(pos):
        zp = z[pos]
        inside = cubic_discriminant(zp, params) < 0
        if np.any(inside):
            roots = solve_cubic_at(zp[inside], curve_coefficients(params), params.a)
            vals = np.abs(roots.imag).max(axis=-1) / np.pi
            tmp = np.zeros_like(zp)
            tmp[inside] = vals
            out[pos] = tmp
    return out


def rho(z, params: ModelParams):
    """Density, zero off the support; closed form when two-cut, oracle otherwise."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if quartic_roots(params).regime is not Regime.TWO_CUT:
        return rho_oracle(z, params)
    out = np.zeros_like(z)
    ins = (z > 0) & (d3_factored(z, params) < 0)
    if np.any(ins):
        out[ins] = rho_closed_form(z[ins], params)
    return out


def edge_constants(params: ModelParams) -> np.ndarray:
    """``rho_k = sqrt(2 / |z''(gamma_k)|)`` so that ``rho ~ (rho_k/pi) |z - lambda_k|^{1/2}``."""
    bp = quartic_roots(params)
    if bp.regime is not Regime.TWO_CUT:
        raise ValueError("edge constants are stated for the two-cut regime")
    zpp = np.abs(d2z_dxi2(bp.gamma, params))
    if np.any(zpp < 1e-10):
        raise ArithmeticError("degenerate edge: z''(gamma_k) vanishes")
    return np.sqrt(2.0 / zpp)


def _interval_integral(f, lo, hi, upto=None):
    """Integral of ``f`` over ``[lo, min(hi, upto)]`` with square-root substitutions at the edges."""
    upto = hi if upto is None else min(max(upto, lo), hi)
    mid = 0.5 * (lo + hi)
    kw = dict(epsabs=QUAD_TOL, epsrel=1e-12, limit=200)

    def left(t):
        return 2 * t * f(lo + t * t)

    def right(t):
        return 2 * t * f(hi - t * t)

    total = integrate.quad(left, 0.0, np.sqrt(min(upto, mid) - lo), **kw)[0]
    if upto > mid:
        total += integrate.quad(right, np.sqrt(hi - upto), np.sqrt(hi - mid), **kw)[0]
    return total


def _scalar_rho(params):
    two = quartic_roots(params).regime is Regime.TWO_CUT
    if two:
        def f(x):
            try:
                return float(rho_closed_form(np.array([x]), params)[0])
            except OffSupportError:
                return 0.0
    else:
        def f(x):
            return float(rho_oracle(np.array([x]), params)[0])
    return f


def _oracle_support(params):
    bp = quartic_roots(params)
    return [(float(bp.lam[0]), float(bp.lam[-1]))] if bp.regime is Regime.ONE_CUT else support_intervals(params)


def interval_masses(params: ModelParams, lam=None) -> tuple:
    """Quadrature mass of each support interval, in left-to-right order.

    ``lam`` overrides the endpoints (used by the sensitivity probe of the
    acceptance suite); the integrand is then evaluated with the oracle.
    """
    if quartic_roots(params).regime is not Regime.TWO_CUT:
        raise ValueError("interval masses are stated for the two-cut regime")
    if lam is None:
        f = _scalar_rho(params)
        ivs = support_intervals(params)
    else:
        def f(x):
            return float(rho_oracle(np.array([x]), params)[0])
        ivs = [(lam[0], lam[1]), (lam[2], lam[3])]
    return tuple(_interval_integral(f, lo, hi) for lo, hi in ivs)


def expected_masses(params: ModelParams) -> tuple:
    """Masses ``(left, right)`` predicted by the sheet structure."""
    sa = sheet_assignment(params.a)
    c, b = params.c, params.beta
    return (c * (1 - b), c * b) if sa.k2 == 2 else (c * b, c * (1 - b))


def density_F(z, params: ModelParams):
    return rho(z, params) / params.c


def cdf_F(z, params: ModelParams):
    """Distribution function of the limiting eigenvalue law ``F``."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    f = _scalar_rho(params)
    ivs = _oracle_support(params)
    out = np.empty_like(z)
    for i, x in enumerate(z):
        if x >= ivs[-1][1]:
            out[i] = 1.0
            continue
        tot = 0.0
        for lo, hi in ivs:
            if x <= lo:
                break
            tot += _interval_integral(f, lo, hi, upto=x)
        out[i] = tot / params.c
    return np.clip(out, 0.0, 1.0)


def self_consistency_residual(z: complex, params: ModelParams) -> float:
    """Residual of the fixed-point equation for the Stieltjes transform at ``z``."""
    if not np.imag(z) > 0:
        raise ValueError("need Im z > 0")
    m = label_branches_array(np.array([z]), params)[0, 0]
    return float(_fixed_point_residual(m, z, params))


def _fixed_point_residual(m, z, params):
    a, b, c = params.a, params.beta, params.c
    return abs(m + 1.0 / (z - c * ((1 - b) / (1 + m) + a * b / (1 + a * m))))


def density_profile(params: ModelParams, grid=None, n: int = 401) -> DensityProfile:
    sup = _oracle_support(params)
    if grid is None:
        grid = np.linspace(max(sup[0][0] - 0.1, 1e-12), sup[-1][1] + 0.1, n)
    grid = np.asarray(grid, dtype=float)
    two = quartic_roots(params).regime is Regime.TWO_CUT
    return DensityProfile(
        support=sup,
        z=grid,
        rho=rho(grid, params),
        edge_constants=edge_constants(params) if two else np.array([]),
        masses=interval_masses(params) if two else (params.c,),
    )


def cdf_F_interpolant(params: ModelParams, n: int = 4001):
    """Tabulated ``cdf_F`` for bulk use (Monte Carlo comparisons, unfolding).

    Each support interval is parametrised by ``z = lo + (hi - lo)(1 - cos t)/2``,
    which makes the integrand smooth at both square-root edges; the table is
    accumulated with Simpson's rule and linearly interpolated in ``t``.
    """
    ivs = _oracle_support(params)
    t = np.linspace(0.0, np.pi, n)
    pieces = []
    offset = 0.0
    for lo, hi in ivs:
        z = lo + (hi - lo) * (1 - np.cos(t)) / 2
        f = np.zeros_like(z)
        f[1:-1] = rho(z[1:-1], params) * (hi - lo) / 2 * np.sin(t[1:-1])
        cum = integrate.cumulative_simpson(f, x=t, initial=0.0)
        pieces.append((lo, hi, offset, cum))
        offset += cum[-1]

    def F(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for lo, hi, off, cum in pieces:
            out = np.where(x >= hi, off + cum[-1], out)
            inside = (x > lo) & (x < hi)
            if np.any(inside):
                tt = np.arccos(np.clip(1 - 2 * (x[inside] - lo) / (hi - lo), -1, 1))
                out[inside] = off + np.interp(tt, t, cum)
        return np.clip(out / params.c, 0.0, 1.0)

    return F

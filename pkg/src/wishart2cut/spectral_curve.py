"""Cubic spectral curve of the two-eigenvalue Wishart law.

The Stieltjes transform ``xi`` of the limiting law (with the ``M - N`` zero
eigenvalues of the companion matrix included) solves

    z a xi^3 + (A2 z + B2) xi^2 + (z + B1) xi + 1 = 0,

equivalently ``z(xi) = -1/xi + c(1-beta)/(1+xi) + c a beta/(1+a xi)``.
Branch points are the critical points of ``z(xi)``: the roots ``gamma_k`` of a
quartic, mapped to support endpoints ``lambda_k = z(gamma_k)``.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .model import ModelParams, ParameterError, validate
from .quadrature import adaptive_gk

GUARD_BAND = 1e-12


class NearTransitionError(ArithmeticError):
    """The quartic discriminant is inside the guard band around zero."""


class DegenerateError(ValueError):
    """Operation undefined at a = 1."""


class PathError(ArithmeticError):
    """Branch tracking step size underflowed (path too close to a branch point)."""


class Regime(str, enum.Enum):
    ONE_CUT = "one-cut"
    TWO_CUT = "two-cut"


@dataclass(frozen=True)
class CurveCoefficients:
    A2: float
    B1: float
    B2: float


@dataclass(frozen=True)
class BranchPoints:
    """Critical points of ``z(xi)`` on the real axis and their images.

    In the two-cut regime ``gamma``/``lam`` hold four sorted values. In the
    one-cut regime they hold the two real critical points, whose images are
    the endpoints of the single support interval.
    """
    delta: float
    gamma: np.ndarray
    lam: np.ndarray
    regime: Regime
    degenerate: bool = False
    delta_normalized: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class SheetAssignment:
    k2: int
    k3: int


@dataclass(frozen=True)
class XiTriple:
    xi1: complex
    xi2: complex
    xi3: complex


def curve_coefficients(params: ModelParams) -> CurveCoefficients:
    validate(params)
    a, b, c = params.a, params.beta, params.c
    return CurveCoefficients(
        A2=1.0 + a,
        B1=1.0 - c * (1.0 - b) + a * (1.0 - c * b),
        B2=a * (1.0 - c),
    )


# ---------------------------------------------------------------------------
# the map z(xi) and its derivatives


def z_of_xi(xi, params: ModelParams):
    a, b, c = params.a, params.beta, params.c
    return -1.0 / xi + c * (1 - b) / (1 + xi) + c * a * b / (1 + a * xi)


lambda_of_gamma_unchecked = z_of_xi


def lambda_of_gamma(gamma: float, params: ModelParams) -> float:
    """Image of a critical point ``gamma`` under ``z(xi)``."""
    a = params.a
    g = np.asarray(gamma, dtype=float)
    if np.any(g == 0) or np.any(g == -1) or np.any(a * g == -1):
        raise ZeroDivisionError("gamma is a pole of z(xi) (0, -1 or -1/a)")
    return z_of_xi(g, params)


def dz_dxi(xi, params: ModelParams):
    a, b, c = params.a, params.beta, params.c
    return 1.0 / xi**2 - c * (1 - b) / (1 + xi) ** 2 - c * a * a * b / (1 + a * xi) ** 2


def d2z_dxi2(xi, params: ModelParams):
    a, b, c = params.a, params.beta, params.c
    return -2.0 / xi**3 + 2 * c * (1 - b) / (1 + xi) ** 3 + 2 * c * a**3 * b / (1 + a * xi) ** 3


# ---------------------------------------------------------------------------
# cubic in xi


def _monic_coefficients(z, coeffs: CurveCoefficients, a: float):
    az = a * z
    return (coeffs.A2 * z + coeffs.B2) / az, (z + coeffs.B1) / az, 1.0 / az


def _polish(xi, p2, p1, p0):
    f = ((xi + p2) * xi + p1) * xi + p0
    fp = (3 * xi + 2 * p2) * xi + p1
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = xi - f / fp
    fc = ((cand + p2) * cand + p1) * cand + p0
    better = np.isfinite(cand) & (np.abs(fc) < np.abs(f))
    return np.where(better, cand, xi)


def solve_cubic_at(z, coeffs: CurveCoefficients, a: float) -> np.ndarray:
    """All three roots of the curve at ``z`` (Cardano + one Newton step).

    Vectorised: returns an array of shape ``z.shape + (3,)``, unlabeled.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroDivisionError("the curve degenerates at z = 0")
    p2, p1, p0 = _monic_coefficients(z, coeffs, a)
    P = p1 - p2 * p2 / 3.0
    Q = 2.0 * p2**3 / 27.0 - p2 * p1 / 3.0 + p0
    disc = np.sqrt(Q * Q / 4.0 + P**3 / 27.0)
    u = -Q / 2.0 + disc
    v = -Q / 2.0 - disc
    w = np.where(np.abs(u) >= np.abs(v), u, v)
    C = w ** (1.0 / 3.0)
    omega = np.exp(2j * np.pi / 3.0)
    roots = []
    for k in range(3):
        Ck = C * omega**k
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(Ck == 0, 0.0, Ck - P / (3.0 * Ck))
        roots.append(_polish(t - p2 / 3.0, p2, p1, p0))
    return np.stack(roots, axis=-1)


def cubic_residual(xi, z, coeffs: CurveCoefficients, a: float):
    return ((z * a * xi + coeffs.A2 * z + coeffs.B2) * xi + z + coeffs.B1) * xi + 1.0


def cubic_discriminant(z, params: ModelParams):
    """Discriminant of the monic cubic in xi; negative iff a complex pair exists."""
    p2, p1, p0 = _monic_coefficients(np.asarray(z, dtype=float), curve_coefficients(params), params.a)
    return 18 * p2 * p1 * p0 - 4 * p2**3 * p0 + p2**2 * p1**2 - 4 * p1**3 - 27 * p0**2


# ---------------------------------------------------------------------------
# quartic for the branch points


def quartic_coefficients(params: ModelParams) -> np.ndarray:
    """Coefficients (highest degree first) of the critical-point quartic."""
    validate(params)
    a, b, c = params.a, params.beta, params.c
    return np.array([
        a * a * (1 - c),
        2 * (a * a * (1 - c * b) + a * (1 - c * (1 - b))),
        1 - c * (1 - b) + a * a * (1 - c * b) + 4 * a,
        2 * (1 + a),
        1.0,
    ])


def discriminant(poly) -> float:
    """Polynomial discriminant ``(-1)^(n(n-1)/2) Res(p, p') / lead``.

    The Sylvester determinant is evaluated in 50-digit arithmetic so the sign
    is reliable; ``poly`` may hold floats or mpmath numbers (highest first).
    """
    with mp.workdps(50):
        c = [mp.mpf(v) for v in poly]
        n = len(c) - 1
        dc = [c[i] * (n - i) for i in range(n)]
        m, k = n, n - 1
        S = mp.matrix(m + k, m + k)
        for i in range(k):
            for j, v in enumerate(c):
                S[i, i + j] = v
        for i in range(m):
            for j, v in enumerate(dc):
                S[k + i, i + j] = v
        sign = -1 if (n * (n - 1) // 2) % 2 else 1
        return float(sign * mp.det(S) / c[0])


def quartic_coefficients_mp(params: ModelParams):
    a, b, c = mp.mpf(params.a), mp.mpf(params.beta), mp.mpf(params.c)
    return [
        a * a * (1 - c),
        2 * (a * a * (1 - c * b) + a * (1 - c * (1 - b))),
        1 - c * (1 - b) + a * a * (1 - c * b) + 4 * a,
        2 * (1 + a),
        mp.mpf(1),
    ]


def separation_measure(roots) -> float:
    """Smallest squared relative root separation ``min |r_i - r_j|^2 / max(|r_i|, |r_j|)^2``.

    This is the factor of the discriminant that vanishes when two critical
    points collide, measured on the pair's own scale.
    """
    r = np.asarray(roots, dtype=complex)
    n = len(r)
    return float(min(
        (abs(r[i] - r[j]) / max(abs(r[i]), abs(r[j]))) ** 2 for i in range(n) for j in range(i + 1, n)
    ))


def _newton_real(poly: np.ndarray, x: np.ndarray, steps: int = 3) -> np.ndarray:
    dpoly = np.polyder(poly)
    for _ in range(steps):
        f = np.polyval(poly, x)
        fp = np.polyval(dpoly, x)
        ok = fp != 0
        cand = np.where(ok, x - f / np.where(ok, fp, 1.0), x)
        better = np.abs(np.polyval(poly, cand)) <= np.abs(f)
        x = np.where(better, cand, x)
    return x


@functools.lru_cache(maxsize=512)
def quartic_roots(params: ModelParams) -> BranchPoints:
    """Critical points of ``z(xi)``, their images and the regime.

    Raises :class:`NearTransitionError` when two critical points nearly
    collide (squared relative separation below the guard band).
    """
    validate(params)
    q = quartic_coefficients(params)
    if params.degenerate:
        # z(xi) = -1/xi + c/(1+xi): the quartic carries the factor (1+xi)^2
        reduced, rem = np.polydiv(q, np.array([1.0, 2.0, 1.0]))
        g = np.sort(np.roots(reduced).real)
        g = _newton_real(reduced, g)
        lam = np.sort(z_of_xi(g, params))
        return BranchPoints(0.0, g, lam, Regime.ONE_CUT, degenerate=True)
    with mp.workdps(50):
        delta = discriminant(quartic_coefficients_mp(params))
    r = np.roots(q)
    sep = separation_measure(r)
    if sep < GUARD_BAND:
        raise NearTransitionError(
            f"quartic roots nearly collide (squared relative separation {sep:.3e}); "
            "parameters are too close to the merging-cut transition"
        )
    if delta > 0:
        g = np.sort(r.real)
        regime = Regime.TWO_CUT
    else:
        g = np.sort(r[np.argsort(np.abs(r.imag))[:2]].real)
        regime = Regime.ONE_CUT
    g = _newton_real(q, g)
    lam = z_of_xi(g, params)
    return BranchPoints(float(delta), g, lam, regime, degenerate=False, delta_normalized=sep)


def classify(params: ModelParams) -> Regime:
    return quartic_roots(params).regime


def support_intervals(params: ModelParams) -> list[tuple[float, float]]:
    bp = quartic_roots(params)
    lam = bp.lam
    if bp.regime is Regime.TWO_CUT:
        return [(lam[0], lam[1]), (lam[2], lam[3])]
    return [(lam[0], lam[-1])]


def top_edge(params: ModelParams) -> float:
    return float(quartic_roots(params).lam[-1])


def sheet_assignment(a: float) -> SheetAssignment:
    if a == 1:
        raise DegenerateError("sheet assignment is undefined at a = 1")
    if a <= 0:
        raise ParameterError("a must be positive")
    return SheetAssignment(2, 4) if a > 1 else SheetAssignment(4, 2)


# ---------------------------------------------------------------------------
# discriminant of the cubic in z


def d3_coefficients(params: ModelParams) -> np.ndarray:
    """Coefficients (highest first) of the branch-point polynomial in z."""
    k = curve_coefficients(params)
    A2, B1, B2, a = k.A2, k.B1, k.B2, params.a
    return np.array([
        (1 - a) ** 2,
        2 * A2**2 * B1 + 2 * A2 * B2 - 4 * A2**3 - 12 * a * B1 + 18 * a * A2,
        B2**2 + A2**2 * B1**2 + 4 * A2 * B1 * B2 - 12 * A2**2 * B2 - 12 * a * B1**2
        + 18 * a * B2 + 18 * a * A2 * B1 - 27 * a**2,
        2 * B1 * B2**2 + 2 * A2 * B2 * B1**2 - 12 * A2 * B2**2 - 4 * B1**3 * a + 18 * a * B1 * B2,
        B1**2 * B2**2 - 4 * B2**3,
    ])


def d3(z, params: ModelParams):
    return np.polyval(d3_coefficients(params), z)


def d3_factored(z, params: ModelParams):
    bp = quartic_roots(params)
    if bp.regime is not Regime.TWO_CUT:
        raise ValueError("factored form needs four real endpoints (two-cut regime)")
    z = np.asarray(z, dtype=float)
    return (1 - params.a) ** 2 * np.prod(z[..., None] - bp.lam, axis=-1)


def d3_sign_changes(params: ModelParams, n: int = 100_000, refine: bool = True) -> int:
    """Count sign changes of the branch-point polynomial on a uniform grid.

    The grid covers ``(0, 2 max(1, a) (1 + sqrt c)^2]`` and is anchored at
    ``z = 0+`` by ``D3(0) = B2^2 (B1^2 - 4 B2) > 0``, so an endpoint below the
    first grid point is not missed. With ``refine`` the real critical points
    of D3 are added to the scan (signs there evaluated in extended precision).
    Four changes mean two support intervals, two mean one.
    """
    zmax = 2.0 * max(1.0, params.a) * (1.0 + np.sqrt(params.c)) ** 2
    z = np.linspace(0.0, zmax, n + 1)
    vals = d3(z, params)
    if refine:
        # local extrema of D3 catch gaps or bumps narrower than the grid step
        crit = _d3_critical_points(params, zmax)
        z = np.concatenate([z, crit])
        vals = np.concatenate([vals, [_d3_mp(x, params) for x in crit]])
        order = np.argsort(z, kind="stable")
        vals = vals[order]
    s = np.sign(vals)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _d3_coefficients_mp(params: ModelParams):
    a, b, c = (mp.mpf(params.a), mp.mpf(params.beta), mp.mpf(params.c))
    A2, B2, B1 = 1 + a, a * (1 - c), 1 - c * (1 - b) + a * (1 - c * b)
    return [
        (1 - a) ** 2,
        2 * A2**2 * B1 + 2 * A2 * B2 - 4 * A2**3 - 12 * a * B1 + 18 * a * A2,
        B2**2 + A2**2 * B1**2 + 4 * A2 * B1 * B2 - 12 * A2**2 * B2 - 12 * a * B1**2
        + 18 * a * B2 + 18 * a * A2 * B1 - 27 * a**2,
        2 * B1 * B2**2 + 2 * A2 * B2 * B1**2 - 12 * A2 * B2**2 - 4 * B1**3 * a + 18 * a * B1 * B2,
        B1**2 * B2**2 - 4 * B2**3,
    ]


def _d3_mp(x, params, dps=60):
    with mp.workdps(dps):
        return float(mp.polyval(_d3_coefficients_mp(params), mp.mpf(x)))


def _d3_critical_points(params, zmax, dps=60):
    with mp.workdps(dps):
        C = _d3_coefficients_mp(params)
        n = len(C) - 1
        dC = [C[i] * (n - i) for i in range(n)]
        while dC and dC[0] == 0:
            dC = dC[1:]
        if len(dC) < 2:
            return np.array([])
        roots = mp.polyroots(dC, maxsteps=200, extraprec=2 * dps)
        out = [float(mp.re(r)) for r in roots if abs(mp.im(r)) <= mp.mpf(10) ** (-dps // 2) * (1 + abs(r))]
    return np.array([x for x in out if 0 < x < zmax])


# ---------------------------------------------------------------------------
# branch labelling by homotopy continuation

_PERMS = np.array(list(itertools.permutations(range(3))))


def _match(prev: np.ndarray, new: np.ndarray):
    cand = new[:, _PERMS]
    cost = np.abs(cand - prev[:, None, :]).max(axis=2)
    k = cost.argmin(axis=1)
    idx = np.arange(len(prev))
    return cand[idx, k], cost[idx, k]


def _min_separation(r: np.ndarray) -> np.ndarray:
    return np.minimum(np.minimum(np.abs(r[:, 0] - r[:, 1]), np.abs(r[:, 0] - r[:, 2])),
                      np.abs(r[:, 1] - r[:, 2]))


def label_branches_array(z, params: ModelParams) -> np.ndarray:
    """Labelled roots ``(xi1, xi2, xi3)`` at each ``z`` with ``Im z >= 0``.

    Labels are fixed by the large-|z| asymptotics at ``z0 = i T max(1, |z|)``
    and carried along the straight segment ``z0 -> z`` with nearest-neighbour
    matching; a step is accepted only if the roots moved by less than a third
    of their minimal separation, otherwise it is halved.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if np.any(z.imag < 0):
        raise ValueError("label_branches needs Im z >= 0")
    coeffs = curve_coefficients(params)
    a, b, c = params.a, params.beta, params.c
    T = max(10.0, 10.0 * top_edge(params))
    z0 = 1j * T * np.maximum(1.0, np.abs(z))
    seeds = np.stack([-1.0 / z0, -1.0 + c * (1 - b) / z0, -1.0 / a + c * b / z0], axis=-1)
    cur, _ = _match(seeds, solve_cubic_at(z0, coeffs, a))
    t = np.zeros(z.size)
    dt = np.full(z.size, 0.1)
    active = np.arange(z.size)
    while active.size:
        tn = np.minimum(t[active] + dt[active], 1.0)
        w = z0[active] + tn * (z[active] - z0[active])
        new, dist = _match(cur[active], solve_cubic_at(w, coeffs, a))
        ok = 3.0 * dist < _min_separation(new)
        acc = active[ok]
        cur[acc] = new[ok]
        t[acc] = tn[ok]
        dt[acc] = np.minimum(dt[acc] * 1.5, 0.25)
        rej = active[~ok]
        dt[rej] *= 0.5
        if rej.size and dt[rej].min() < 1e-13:
            bad = z[rej[np.argmin(dt[rej])]]
            raise PathError(f"branch tracking step underflow near z = {bad}")
        active = active[t[active] < 1.0]
    return cur


def label_branches(z: complex, params: ModelParams) -> XiTriple:
    r = label_branches_array(np.array([z]), params)[0]
    return XiTriple(complex(r[0]), complex(r[1]), complex(r[2]))


def xi1_plus(x: float, params: ModelParams) -> complex:
    """Boundary value of the Stieltjes-transform branch from the upper half plane."""
    if cubic_discriminant(x, params) >= 0:
        raise ValueError(f"x = {x} is outside the support: all roots are real")
    roots = solve_cubic_at(np.array([x]), curve_coefficients(params), params.a)[0]
    return complex(roots[np.argmax(roots.imag)])


# ---------------------------------------------------------------------------
# theta functions


def _anchor(j: int, params: ModelParams) -> float:
    bp = quartic_roots(params)
    if bp.regime is not Regime.TWO_CUT:
        raise ValueError("theta functions are defined in the two-cut regime")
    if j == 1:
        return float(bp.lam[3])
    sa = sheet_assignment(params.a)
    k = sa.k2 if j == 2 else sa.k3
    return float(bp.lam[k - 1])


def _theta_upper(j: int, z: np.ndarray, params: ModelParams, tol: float) -> np.ndarray:
    p = _anchor(j, params)
    h = quartic_roots(params).lam[0] / 10.0
    top = p + 1j * h
    xs = np.unique(np.concatenate([z.real, [p]]))
    # segments: [anchor leg] + horizontal pieces + one descent per target
    P = [p]
    Q = [top]
    kind = [0]  # 0: sqrt at start, 1: linear, 2: sqrt at end
    for x0, x1 in zip(xs[:-1], xs[1:]):
        P.append(x0 + 1j * h)
        Q.append(x1 + 1j * h)
        kind.append(1)
    n_h = len(xs) - 1
    for zz in z:
        P.append(zz.real + 1j * h)
        Q.append(zz)
        kind.append(2)
    P = np.array(P, dtype=complex)
    Q = np.array(Q, dtype=complex)
    kind = np.array(kind)

    def integrand(seg, s):
        k = kind[seg]
        phi = np.where(k == 0, s * s, np.where(k == 1, s, 1.0 - (1.0 - s) ** 2))
        dphi = np.where(k == 0, 2 * s, np.where(k == 1, 1.0, 2 * (1.0 - s)))
        w = P[seg] + (Q[seg] - P[seg]) * phi
        xi = label_branches_array(w, params)[:, j - 1]
        return xi * (Q[seg] - P[seg]) * dphi

    vals = adaptive_gk(integrand, len(P), tol=tol)
    leg = vals[0]
    horiz = vals[1:1 + n_h]
    desc = vals[1 + n_h:]
    cum = np.concatenate([[0.0], np.cumsum(horiz)])
    cum -= cum[np.searchsorted(xs, p)]
    at = cum[np.searchsorted(xs, z.real)]
    return leg + at + desc


def theta(j: int, z, params: ModelParams, side: str = "+", tol: float = 1e-9):
    """Contour integral of the labelled branch ``xi_j`` from its anchor to ``z``.

    Anchors: ``lambda_4`` for ``j = 1`` and ``lambda_{k_j}`` for ``j = 2, 3``.
    The path rises vertically from the anchor to height ``lambda_1 / 10``,
    runs horizontally and drops to ``z``. For real ``z``, ``side`` selects the
    boundary value from above (``"+"``) or below (``"-"``); lower half-plane
    values follow from the reflection ``theta(conj z) = conj(theta(z))``.
    """
    if j not in (1, 2, 3):
        raise ValueError("j must be 1, 2 or 3")
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if np.any(z == 0):
        raise ZeroDivisionError("theta is singular at z = 0")
    lower = (z.imag < 0) | ((z.imag == 0) & (side == "-"))
    zz = np.where(lower, np.conj(z), z)
    val = _theta_upper(j, zz, params, tol)
    val = np.where(lower, np.conj(val), val)
    return complex(val[0]) if scalar else val


@dataclass
class OrderingReport:
    min_margin: float
    violations: list
    margins: dict

    @property
    def ok(self) -> bool:
        return not self.violations


def theta_margin(j: int, x, params: ModelParams, tol: float = 1e-9) -> np.ndarray:
    """``Re theta_1(x) - Re theta_1(lambda_{k_j}) - Re theta_j(x)`` for real x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    anchor = _anchor(j, params)
    t1 = theta(1, np.concatenate([x, [anchor]]).astype(complex), params, tol=tol)
    tj = theta(j, x.astype(complex), params, tol=tol)
    return t1[:-1].real - t1[-1].real - tj.real


def check_theta_orderings(params: ModelParams, grid, tol: float = 1e-9) -> OrderingReport:
    """Check the strict inequality between real parts of theta_1 and theta_j.

    Points of the grid lying in ``[lambda_{k_j - 1}, lambda_{k_j}]`` are skipped
    for the corresponding ``j``. Violations are reported, not raised.
    """
    bp = quartic_roots(params)
    if bp.regime is not Regime.TWO_CUT:
        raise ValueError("orderings are stated for the two-cut regime")
    sa = sheet_assignment(params.a)
    grid = np.asarray(grid, dtype=float)
    margins = {}
    violations = []
    min_margin = np.inf
    for j, k in ((2, sa.k2), (3, sa.k3)):
        lo, hi = bp.lam[k - 2], bp.lam[k - 1]
        x = grid[(grid > 0) & ((grid < lo) | (grid > hi))]
        m = theta_margin(j, x, params, tol=tol)
        margins[j] = (x, m)
        for xi, mi in zip(x, m):
            if not mi > 0:
                violations.append((j, float(xi), float(mi)))
        if m.size:
            min_margin = min(min_margin, float(m.min()))
    return OrderingReport(min_margin, violations, margins)

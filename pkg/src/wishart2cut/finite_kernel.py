"""Exact finite-N correlation kernel from multiple Laguerre polynomials.

Weights are ``w_j(x) = x^(M-N) exp(-M x / a_j)`` with ``a_1 = 1``, ``a_2 = a``.
Type II polynomials ``L_{n1,n2}`` (monic) and type I functions
``Q_{n1,n2} = A1(x) e^{-Mx} + Aa(x) e^{-Mx/a}`` come from moment systems
solved in extended precision (mpmath) with full pivoting; the monomial basis
is badly conditioned, so the working precision grows with N and with
``1/|a - 1|`` and N above 16 is refused.

Polynomial coefficient vectors are in ascending powers.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import special

from .model import FiniteSize, ModelParams, ParameterError
from .spectral_curve import quartic_roots, sheet_assignment, theta

MAX_N = 16
RESIDUAL_TOL = 1e-8


class ConditioningError(ArithmeticError):
    pass


def working_dps(fs: FiniteSize, a: float) -> int:
    """Decimal digits used for assembly and solves."""
    gap = abs(a - 1.0)
    extra = 0 if gap >= 0.1 else math.ceil(fs.N0 * fs.N1 * -math.log10(gap) / 2) + 10
    return 40 + 3 * fs.N + extra


def _check(fs: FiniteSize, a: float):
    if fs.N > MAX_N:
        raise ConditioningError(f"finite kernel refuses N = {fs.N} > {MAX_N} (moment systems too ill-conditioned)")
    if not a > 0:
        raise ParameterError("a must be positive")
    if a == 1.0:
        raise ParameterError("a = 1 makes the two weights coincide; the multiple-Laguerre system is singular")


def moment(weight: int, k: int, fs: FiniteSize, a: float, log: bool = False):
    """``int_0^inf x^(k+M-N) exp(-M x / a_j) dx = Gamma(k+M-N+1) (a_j/M)^(k+M-N+1)``.

    With ``log=True`` returns ``(log|m|, sign)``; otherwise a float, raising
    ``OverflowError`` when it is not representable.
    """
    if weight not in (1, 2):
        raise ValueError("weight must be 1 or 2")
    p = k + fs.M - fs.N + 1
    if p <= 0:
        raise ValueError("need k + M - N >= 0")
    aj = 1.0 if weight == 1 else float(a)
    lm = math.lgamma(p) + p * math.log(aj / fs.M)
    if log:
        return lm, 1
    if lm > 709.0:
        raise OverflowError("moment overflows double precision")
    return math.exp(lm)


def _mp_moment(j, k, fs, a):
    p = k + fs.M - fs.N + 1
    aj = mp.mpf(1) if j == 1 else mp.mpf(a)
    return mp.gamma(p) * (aj / fs.M) ** p


def _solve_full_pivot(A, b):
    """Gaussian elimination with complete pivoting on mpmath matrices (rows pre-equilibrated)."""
    n = A.rows
    A = A.copy()
    b = b.copy()
    for i in range(n):
        s = max(abs(A[i, j]) for j in range(n))
        if s == 0:
            raise ConditioningError("singular moment system (zero row)")
        for j in range(n):
            A[i, j] /= s
        b[i] /= s
    perm = list(range(n))
    for k in range(n):
        best, pi, pj = mp.mpf(0), k, k
        for i in range(k, n):
            for j in range(k, n):
                v = abs(A[i, j])
                if v > best:
                    best, pi, pj = v, i, j
        if best == 0:
            raise ConditioningError("singular moment system")
        if pi != k:
            for j in range(n):
                A[k, j], A[pi, j] = A[pi, j], A[k, j]
            b[k], b[pi] = b[pi], b[k]
        if pj != k:
            for i in range(n):
                A[i, k], A[i, pj] = A[i, pj], A[i, k]
            perm[k], perm[pj] = perm[pj], perm[k]
        for i in range(k + 1, n):
            f = A[i, k] / A[k, k]
            if f:
                for j in range(k, n):
                    A[i, j] -= f * A[k, j]
                b[i] -= f * b[k]
    y = [mp.mpf(0)] * n
    for i in range(n - 1, -1, -1):
        acc = b[i] - mp.fsum(A[i, j] * y[j] for j in range(i + 1, n))
        y[i] = acc / A[i, i]
    x = [mp.mpf(0)] * n
    for k in range(n):
        x[perm[k]] = y[k]
    return x


def _residual(A, x, b):
    n = A.rows
    worst = mp.mpf(0)
    scale = max(abs(A[i, j]) for i in range(n) for j in range(n))
    for i in range(n):
        r = mp.fsum(A[i, j] * x[j] for j in range(n)) - b[i]
        worst = max(worst, abs(r))
    return float(worst / scale)


@functools.lru_cache(maxsize=256)
def _type_II(n1, n2, fs, a, dps):
    with mp.workdps(dps):
        n = n1 + n2
        if n == 0:
            return (mp.mpf(1),), 0.0
        rows = [(1, i) for i in range(n1)] + [(2, i) for i in range(n2)]
        A = mp.matrix(n, n)
        b = mp.matrix(n, 1)
        for r, (j, i) in enumerate(rows):
            for m in range(n):
                A[r, m] = _mp_moment(j, i + m, fs, a)
            b[r] = -_mp_moment(j, i + n, fs, a)
        c = _solve_full_pivot(A, b)
        res = _residual(A, c, b)
        return tuple(c) + (mp.mpf(1),), res


@functools.lru_cache(maxsize=256)
def _type_I(n1, n2, fs, a, dps):
    with mp.workdps(dps):
        n = n1 + n2
        cols = [(1, m) for m in range(n1)] + [(2, m) for m in range(n2)]
        A = mp.matrix(n, n)
        b = mp.matrix(n, 1)
        for i in range(n):
            for q, (j, m) in enumerate(cols):
                A[i, q] = _mp_moment(j, i + m, fs, a)
        b[n - 1] = 1
        x = _solve_full_pivot(A, b)
        res = _residual(A, x, b)
        return tuple(x[:n1]), tuple(x[n1:]), res


def type_II(n1: int, n2: int, fs: FiniteSize, a: float):
    """Ascending coefficients (mpmath) of the monic ``L_{n1,n2}``."""
    _check(fs, a)
    if n1 < 0 or n2 < 0 or n1 + n2 > fs.N + 1:
        raise ValueError("need n1, n2 >= 0 and n1 + n2 <= N + 1")
    coeffs, res = _type_II(n1, n2, fs, float(a), working_dps(fs, a))
    if res > RESIDUAL_TOL:
        raise ConditioningError(f"type II residual {res:.2e}")
    return coeffs


def type_I(n1: int, n2: int, fs: FiniteSize, a: float):
    """Ascending coefficients ``(A1, Aa)`` of ``Q_{n1,n2}``."""
    _check(fs, a)
    if n1 + n2 < 1:
        raise ValueError("need n1 + n2 >= 1")
    A1, Aa, res = _type_I(n1, n2, fs, float(a), working_dps(fs, a))
    if res > RESIDUAL_TOL:
        raise ConditioningError(f"type I residual {res:.2e}")
    return A1, Aa


def normalizations(n1: int, n2: int, fs: FiniteSize, a: float):
    """``(h1, h2)``: moments of ``L_{n1,n2}`` against ``x^n1 w_1`` and ``x^n2 w_2``."""
    L = type_II(n1, n2, fs, a)
    with mp.workdps(working_dps(fs, a)):
        h1 = mp.fsum(c * _mp_moment(1, n1 + m, fs, a) for m, c in enumerate(L))
        h2 = mp.fsum(c * _mp_moment(2, n2 + m, fs, a) for m, c in enumerate(L))
    return h1, h2


def orthogonality_residuals(n1: int, n2: int, fs: FiniteSize, a: float) -> float:
    """Largest defining-condition residual of ``L_{n1,n2}`` and ``Q_{n1,n2}``, relative to the largest moment used."""
    L = type_II(n1, n2, fs, a)
    A1, Aa = type_I(n1, n2, fs, a)
    n = n1 + n2
    with mp.workdps(working_dps(fs, a)):
        worst = mp.mpf(0)
        big = max(_mp_moment(j, 2 * n, fs, a) for j in (1, 2))
        for j, cnt in ((1, n1), (2, n2)):
            for i in range(cnt):
                worst = max(worst, abs(mp.fsum(c * _mp_moment(j, i + m, fs, a) for m, c in enumerate(L))))
        for i in range(n):
            v = mp.fsum(c * _mp_moment(1, i + m, fs, a) for m, c in enumerate(A1)) \
                + mp.fsum(c * _mp_moment(2, i + m, fs, a) for m, c in enumerate(Aa))
            worst = max(worst, abs(v - (1 if i == n - 1 else 0)))
        return float(worst / big)


def _polyval(c, x):
    acc = mp.mpf(0)
    for v in reversed(c):
        acc = acc * x + v
    return acc


def _polyder(c):
    return tuple(k * c[k] for k in range(1, len(c)))


@dataclass(frozen=True)
class MLPSystem:
    """Everything the three-term kernel formula needs for one ``(M, N, N1, a)``."""
    fs: FiniteSize
    a: float
    dps: int
    L: tuple          # L_{N0,N1}, L_{N0-1,N1}, L_{N0,N1-1}
    Q: tuple          # (A1, Aa) for Q_{N0,N1}, Q_{N0+1,N1}, Q_{N0,N1+1}
    r1: object        # h1_{N0,N1} / h1_{N0-1,N1}
    r2: object        # h2_{N0,N1} / h2_{N0,N1-1}

    @property
    def typeII(self):
        return self.L[0]

    @property
    def typeI(self):
        return self.Q[0]

    def _q(self, i, y):
        A1, Aa = self.Q[i]
        M = self.fs.M
        return _polyval(A1, y) * mp.exp(-M * y) + _polyval(Aa, y) * mp.exp(-M * y / self.a)

    def numerator(self, x, y):
        L0, L1, L2 = self.L
        return (_polyval(L0, x) * self._q(0, y) - self.r1 * _polyval(L1, x) * self._q(1, y)
                - self.r2 * _polyval(L2, x) * self._q(2, y))

    def kernel(self, x, y):
        with mp.workdps(self.dps):
            x, y = mp.mpf(x), mp.mpf(y)
            pref = (x * y) ** (mp.mpf(self.fs.M - self.fs.N) / 2)
            if x == y:
                L0, L1, L2 = (_polyder(c) for c in self.L)
                val = (_polyval(L0, x) * self._q(0, x) - self.r1 * _polyval(L1, x) * self._q(1, x)
                       - self.r2 * _polyval(L2, x) * self._q(2, x))
                return pref * val
            return pref * self.numerator(x, y) / (x - y)

    def diagonal_parts(self):
        """Polynomials ``P1, P2`` with ``K(x,x) = x^(M-N) (P1(x) e^{-Mx} + P2(x) e^{-Mx/a})``."""
        with mp.workdps(self.dps):
            coef = (mp.mpf(1), -self.r1, -self.r2)
            parts = []
            for w in (0, 1):
                acc = {}
                for c, Lc, Qc in zip(coef, self.L, self.Q):
                    dL = _polyder(Lc)
                    for i, u in enumerate(dL):
                        for j, v in enumerate(Qc[w]):
                            acc[i + j] = acc.get(i + j, 0) + c * u * v
                deg = max(acc) if acc else -1
                parts.append(tuple(acc.get(k, mp.mpf(0)) for k in range(deg + 1)))
            return tuple(parts)


@functools.lru_cache(maxsize=64)
def mlp_system(fs: FiniteSize, a: float) -> MLPSystem:
    _check(fs, a)
    a = float(a)
    N0, N1 = fs.N0, fs.N1
    dps = working_dps(fs, a)
    L = (type_II(N0, N1, fs, a), type_II(N0 - 1, N1, fs, a), type_II(N0, N1 - 1, fs, a))
    Q = (type_I(N0, N1, fs, a), type_I(N0 + 1, N1, fs, a), type_I(N0, N1 + 1, fs, a))
    h1, h2 = normalizations(N0, N1, fs, a)
    h1m = normalizations(N0 - 1, N1, fs, a)[0]
    h2m = normalizations(N0, N1 - 1, fs, a)[1]
    for h in (h1, h2, h1m, h2m):
        if h == 0:
            raise ConditioningError("vanishing normalisation constant")
    with mp.workdps(dps):
        return MLPSystem(fs, a, dps, L, Q, h1 / h1m, h2 / h2m)


def kernel_finite(x, y, fs: FiniteSize, a: float) -> float:
    """``K_{M,N}(x, y)`` by the three-term multiple-Laguerre formula; the diagonal uses ``d/dx`` of the L's."""
    if not (x > 0 and y > 0):
        raise ValueError("kernel_finite needs x, y > 0")
    return float(mlp_system(fs, a).kernel(x, y))


def kernel_finite_diag(x, fs: FiniteSize, a: float) -> np.ndarray:
    sys_ = mlp_system(fs, a)
    return np.array([float(sys_.kernel(t, t)) for t in np.atleast_1d(x)])


def kernel_biorthogonal(x, y, fs: FiniteSize, a: float) -> float:
    """Independent evaluation as ``(xy)^((M-N)/2) sum_k L_{n_k}(x) Q_{n_(k+1)}(y)`` along a nested path."""
    _check(fs, a)
    path = [(k, 0) for k in range(fs.N0 + 1)] + [(fs.N0, k) for k in range(1, fs.N1 + 1)]
    M = fs.M
    with mp.workdps(working_dps(fs, a)):
        x, y = mp.mpf(x), mp.mpf(y)
        tot = mp.mpf(0)
        for k in range(fs.N):
            P = type_II(*path[k], fs, a)
            A1, Aa = type_I(*path[k + 1], fs, a)
            q = _polyval(A1, y) * mp.exp(-M * y) + _polyval(Aa, y) * mp.exp(-M * y / mp.mpf(a))
            tot += _polyval(P, x) * q
        return float((x * y) ** (mp.mpf(M - fs.N) / 2) * tot)


def kernel_lue(x, y, fs: FiniteSize) -> float:
    """Single-weight (a = 1) Laguerre kernel in the same gauge, ``e^{-My}`` carried by ``y``."""
    M, alpha = fs.M, fs.M - fs.N
    with mp.workdps(40 + 3 * fs.N):
        x, y = mp.mpf(x), mp.mpf(y)
        tot = mp.mpf(0)
        for k in range(fs.N):
            pk = lambda t: (-1) ** k * mp.factorial(k) * mp.laguerre(k, alpha, M * t) / mp.mpf(M) ** k
            hk = mp.factorial(k) * mp.gamma(k + alpha + 1) / mp.mpf(M) ** (2 * k + alpha + 1)
            tot += pk(x) * pk(y) / hk
        return float((x * y) ** (mp.mpf(alpha) / 2) * mp.exp(-M * y) * tot)


def trace(fs: FiniteSize, a: float, n_nodes: int | None = None) -> float:
    """``int_0^inf K(x,x) dx`` by generalised Gauss-Laguerre quadrature on each exponential part."""
    sys_ = mlp_system(fs, a)
    P1, P2 = sys_.diagonal_parts()
    alpha = fs.M - fs.N
    n = n_nodes or (fs.N + 4)
    t, w = special.roots_genlaguerre(n, alpha)
    total = mp.mpf(0)
    with mp.workdps(sys_.dps):
        for P, aj in ((P1, 1.0), (P2, float(a))):
            s = aj / fs.M
            # x = s t:  int x^alpha P(x) e^{-x/s} dx = s^(alpha+1) int t^alpha P(s t) e^{-t} dt
            acc = mp.fsum(mp.mpf(wi) * _polyval(P, s * mp.mpf(ti)) for ti, wi in zip(t, w))
            total += mp.mpf(s) ** (alpha + 1) * acc
    return float(total)


def gauge_factor(x, y, params: ModelParams, fs: FiniteSize) -> complex:
    """``(x/y)^((M-N)/2) exp((M/2)(theta_1+ + theta_j+)(x) - (...)(y))`` for x, y near one support interval."""
    lam = quartic_roots(params).lam
    sa = sheet_assignment(params.a)
    # j labels the interval [lambda_{k_j - 1}, lambda_{k_j}] holding x
    j = 2 if (x <= 0.5 * (lam[1] + lam[2])) == (sa.k2 == 2) else 3
    pts = np.array([x, y], dtype=complex)
    t1 = theta(1, pts, params, side="+")
    tj = theta(j, pts, params, side="+")
    e = 0.5 * fs.M * ((t1[0] + tj[0]) - (t1[1] + tj[1]))
    return complex((x / y) ** ((fs.M - fs.N) / 2) * np.exp(e))


def gauge_rescale(x, y, K, params: ModelParams, fs: FiniteSize) -> complex:
    """Conjugated kernel ``K_hat(x, y)``; determinants of ``K_hat`` equal those of ``K``."""
    if x == y:
        return complex(K)
    return gauge_factor(x, y, params, fs) * K

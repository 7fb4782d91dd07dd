"""Airy function Ai and its derivative on [-30, 30], no external special functions.

|x| >= 8 uses the large-argument asymptotic expansions truncated at the
smallest term. Inside (-8, 8) values come from Taylor steps of ``v'' = x v``:
a node table on a 0.25 grid is built once (from the asymptotic values at
x = 9, stepping left, which is the stable direction for Ai on the positive
axis; from the Maclaurin constants at 0 for the negative axis), and each
evaluation expands about the nearest node.
"""

from __future__ import annotations

import functools
import math

import numpy as np

AI0 = 0.355028053887817239260063186004183  # 3^(-2/3) / Gamma(2/3)
AIP0 = -0.258819403792806798405183560189203  # -3^(-1/3) / Gamma(1/3)

X_MAX = 30.0
ASYMPTOTIC_FROM = 8.0
_STEP = 0.25
_NTAYLOR = 40


class AiryRangeError(ValueError):
    pass


@functools.lru_cache(maxsize=1)
def _uv(n=80):
    u = np.empty(n)
    u[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
    v = np.empty(n)
    v[0] = 1.0
    k = np.arange(1, n)
    v[1:] = -(6 * k + 1) / (6 * k - 1) * u[1:]
    return u, v


def _truncated(coef, zeta, sign):
    """Sum of ``coef_k (sign/zeta)^k`` up to the smallest term."""
    total = 0.0
    term_prev = np.inf
    w = 1.0
    for k in range(len(coef)):
        term = coef[k] * w
        if abs(term) > term_prev:
            break
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        term_prev = abs(term)
        w *= sign / zeta
    return total


def _asym_pos(x):
    u, v = _uv()
    zeta = 2.0 / 3.0 * x**1.5
    e = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    ai = e * x**-0.25 * _truncated(u, zeta, -1.0)
    aip = -e * x**0.25 * _truncated(v, zeta, -1.0)
    return ai, aip


def _split_sums(coef, zeta):
    """Even/odd alternating sums used by the oscillatory expansion."""
    even = []
    odd = []
    for k in range(len(coef)):
        (even if k % 2 == 0 else odd).append(coef[k] * (-1) ** (k // 2))
    # terms in powers of 1/zeta: even part uses zeta^{-2m}, odd part zeta^{-(2m+1)}
    se = so = 0.0
    prev = np.inf
    for m in range(min(len(even), len(odd))):
        te = even[m] / zeta ** (2 * m)
        to = odd[m] / zeta ** (2 * m + 1)
        size = max(abs(te), abs(to))
        if size > prev:
            break
        se += te
        so += to
        if size < 1e-17:
            break
        prev = size
    return se, so


def _asym_neg(x):
    u, v = _uv()
    y = -x
    zeta = 2.0 / 3.0 * y**1.5
    ph = zeta - math.pi / 4.0
    c, s = math.cos(ph), math.sin(ph)
    ue, uo = _split_sums(u, zeta)
    ve, vo = _split_sums(v, zeta)
    rp = math.sqrt(math.pi)
    ai = (c * ue + s * uo) / (rp * y**0.25)
    aip = y**0.25 * (s * ve - c * vo) / rp
    return ai, aip


def _taylor(x0, v0, d0, h, n=_NTAYLOR):
    """Advance (v, v') of ``v'' = x v`` from x0 by h with an n-term Taylor series."""
    a = np.zeros(n + 2)
    a[0], a[1] = v0, d0
    a[2] = x0 * v0 / 2.0
    for k in range(1, n):
        a[k + 2] = (x0 * a[k] + a[k - 1]) / ((k + 2) * (k + 1))
    hp = h ** np.arange(n + 2)
    val = float(np.dot(a, hp))
    der = float(np.dot(a[1:] * np.arange(1, n + 2), hp[:-1]))
    return val, der


@functools.lru_cache(maxsize=1)
def _table():
    nodes = np.arange(-9.0, 9.0 + _STEP / 2, _STEP)
    ai = np.empty_like(nodes)
    aip = np.empty_like(nodes)
    i0 = int(np.argmin(np.abs(nodes)))
    # positive side: start from the asymptotic value at the right end
    ai[-1], aip[-1] = _asym_pos(nodes[-1])
    for i in range(len(nodes) - 2, i0, -1):
        ai[i], aip[i] = _taylor(nodes[i + 1], ai[i + 1], aip[i + 1], -_STEP)
    ai[i0], aip[i0] = AI0, AIP0
    for i in range(i0 - 1, -1, -1):
        ai[i], aip[i] = _taylor(nodes[i + 1], ai[i + 1], aip[i + 1], -_STEP)
    return nodes, ai, aip


def _from_table(x):
    nodes, ai, aip = _table()
    i = int(np.clip(np.rint((x - nodes[0]) / _STEP), 0, len(nodes) - 1))
    return _taylor(nodes[i], ai[i], aip[i], x - nodes[i], n=30)


def _airy_scalar(x):
    if not -X_MAX <= x <= X_MAX:
        raise AiryRangeError(f"airy: x = {x} outside [-30, 30]")
    if x >= ASYMPTOTIC_FROM:
        return _asym_pos(x)
    if x <= -ASYMPTOTIC_FROM:
        return _asym_neg(x)
    return _from_table(x)


def airy(x):
    """Return ``(Ai(x), Ai'(x))``; scalar in, scalars out; arrays elementwise."""
    if np.ndim(x) == 0:
        return _airy_scalar(float(x))
    xa = np.asarray(x, dtype=float)
    out = np.array([_airy_scalar(float(t)) for t in xa.ravel()]).reshape(xa.shape + (2,))
    return out[..., 0], out[..., 1]


def airy_series_branch(x):
    """Table/Taylor branch, exposed so tests can compare the two regimes where they overlap."""
    return _from_table(float(x))


def airy_asymptotic_branch(x):
    x = float(x)
    return _asym_pos(x) if x > 0 else _asym_neg(x)

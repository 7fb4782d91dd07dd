"""The twelve acceptance checks, runnable from tests or ``wishart2cut verify``."""

from __future__ import annotations

import os
import tempfile
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import density as dens
from . import ensemble as ens
from . import finite_kernel as fk
from . import kernels as kern
from . import spectral_curve as sc
from .model import FiniteSize, ModelParams, finite_size

SEED = 20240611
MC_INSTANCE = ModelParams(10.0, 0.5, 0.5)
MC_M = 400


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def as_dict(self):
        return asdict(self)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


def random_triples(rng, n):
    for _ in range(n):
        yield ModelParams(
            float(np.exp(rng.uniform(np.log(0.05), np.log(20.0)))),
            float(rng.uniform(0.05, 0.95)),
            float(rng.uniform(0.05, 0.95)),
        )


def random_two_cut(rng, n, side=None):
    out = []
    while len(out) < n:
        p = next(random_triples(rng, 1))
        if side == ">" and p.a <= 1 or side == "<" and p.a >= 1:
            continue
        try:
            if sc.classify(p) is sc.Regime.TWO_CUT:
                out.append(p)
        except sc.NearTransitionError:
            continue
    return out


def _timed(number, name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0)


# --- criteria ---------------------------------------------------------------


def c1_classification(n=1000):
    rng = np.random.default_rng(SEED + 1)
    disagree, guarded, two = 0, 0, 0
    for p in random_triples(rng, n):
        try:
            r = sc.classify(p)
        except sc.NearTransitionError:
            guarded += 1
            continue
        two += r is sc.Regime.TWO_CUT
        if (sc.d3_sign_changes(p) == 4) != (r is sc.Regime.TWO_CUT):
            disagree += 1
    return disagree == 0, f"{disagree} disagreements, {guarded} in guard band, {two}/{n} two-cut"


def c2_density_dual_path(n_inst=20, n_pts=1000):
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for p in random_two_cut(rng, n_inst):
        lam = sc.quartic_roots(p).lam
        x = np.concatenate([rng.uniform(lam[0], lam[1], n_pts // 2), rng.uniform(lam[2], lam[3], n_pts // 2)])
        worst = max(worst, float(np.max(np.abs(dens.rho_closed_form(x, p) - dens.rho_oracle(x, p)))))
    return worst < 1e-9, f"sup |closed - oracle| = {worst:.2e} (< 1e-9)"


def mass_errors(p, lam=None):
    m = np.array(dens.interval_masses(p, lam=lam))
    e = np.array(dens.expected_masses(p))
    return float(np.max(np.abs(m - e))), float(abs(m.sum() - p.c))


def c3_masses():
    rng = np.random.default_rng(SEED + 3)
    inst = random_two_cut(rng, 10, ">") + random_two_cut(rng, 10, "<")
    worst = max(max(mass_errors(p)) for p in inst)
    return worst < 1e-8, f"max mass error {worst:.2e} over 20 instances (10 with a>1, 10 with a<1)"


def mass_sensitivity_probe(p=ModelParams(10.0, 0.5, 0.05), shift=1e-3):
    """Move lambda_1 inward by ``shift``; the mass check must then fail."""
    lam = np.array(sc.quartic_roots(p).lam, dtype=float)
    lam[0] += shift
    err, _ = mass_errors(p, lam=lam)
    return err, err > 1e-8


EDGE_INSTANCES = (ModelParams(10.0, 0.5, 0.05), ModelParams(0.1, 0.3, 0.05), ModelParams(10.0, 0.5, 0.5))


def edge_fit(p):
    """Slopes of log rho vs log delta and relative errors of the edge constants."""
    lam = sc.quartic_roots(p).lam
    rk = dens.edge_constants(p)
    deltas = np.logspace(-7, -4, 13)
    slopes, errs = [], []
    for k in range(4):
        inward = 1.0 if k % 2 == 0 else -1.0
        vals = dens.rho_oracle(lam[k] + inward * deltas, p)
        slopes.append(np.polyfit(np.log(deltas), np.log(vals), 1)[0])
        d = 1e-8
        fit = np.pi * dens.rho_oracle(lam[k] + inward * d, p)[0] / np.sqrt(d)
        errs.append(abs(fit / rk[k] - 1))
    return np.array(slopes), np.array(errs)


def c4_edges():
    sl, er = [], []
    for p in EDGE_INSTANCES:
        s, e = edge_fit(p)
        sl.append(s)
        er.append(e)
    sl, er = np.concatenate(sl), np.concatenate(er)
    ok = np.all(np.abs(sl - 0.5) <= 0.01) and np.all(er < 1e-3)
    return ok, f"slopes in [{sl.min():.4f}, {sl.max():.4f}], max rho_k rel err {er.max():.1e}"


THETA_INSTANCES = (ModelParams(10.0, 0.5, 0.05), ModelParams(0.1, 0.3, 0.05))


def theta_jump_errors(p, n=5):
    lam = sc.quartic_roots(p).lam
    sa = sc.sheet_assignment(p.a)
    out = []
    for j, k, mass in ((2, sa.k2, p.c * (1 - p.beta)), (3, sa.k3, p.c * p.beta)):
        x = np.linspace(0.1, 0.9, n) * lam[k - 2]
        jump = sc.theta(j, x, p, side="+") - sc.theta(j, x, p, side="-")
        out.append(np.max(np.abs(jump - 2j * np.pi * mass)))
    return float(max(out))


def c5_theta():
    jump, margin, viol = 0.0, np.inf, 0
    for p in THETA_INSTANCES:
        jump = max(jump, theta_jump_errors(p))
        lam = sc.quartic_roots(p).lam
        grid = np.linspace(0.5 * lam[0], 1.5 * lam[3], 200)
        rep = sc.check_theta_orderings(p, grid)
        margin = min(margin, rep.min_margin)
        viol += len(rep.violations)
    ok = jump < 1e-8 and viol == 0 and margin > 0
    return ok, f"max jump error {jump:.1e}, min ordering margin {margin:.2e}, {viol} violations"


def c6_scaling(n=100):
    rng = np.random.default_rng(SEED + 6)
    worst, used = 0.0, 0
    for p in random_triples(rng, n):
        try:
            l1 = sc.quartic_roots(p).lam
            l2 = sc.quartic_roots(p.swapped()).lam
        except sc.NearTransitionError:
            continue
        used += 1
        worst = max(worst, float(np.max(np.abs(l2 - l1 / p.a) / np.abs(l1 / p.a))))
    return worst < 1e-9, f"max relative error {worst:.1e} over {used} triples"


def _mc_run(trials, seed):
    fs = finite_size(MC_INSTANCE, MC_M)
    return ens.sample_eigenvalues(fs, MC_INSTANCE.a, seed, trials)


def c7_global_law(trials=200):
    run = _mc_run(trials, SEED + 7)
    lam = sc.quartic_roots(MC_INSTANCE).lam
    F = dens.cdf_F_interpolant(MC_INSTANCE)
    d = ens.ks_distance(run.pooled(), F)
    y = run.pooled()
    gap = float(np.mean((y > lam[1]) & (y < lam[2])))
    return d < 0.01 and gap < 1e-3, f"sup |ECDF - F| = {d:.4f} (< 0.01), gap fraction {gap:.1e} (< 1e-3)"


def c8_tracy_widom(trials=2000):
    run = _mc_run(trials, SEED + 8)
    s = ens.edge_rescale(run, MC_INSTANCE)
    T = kern.tw_table()
    d = ens.ks_distance(s, T)
    return d < 0.08, f"KS = {d:.4f} (< 0.08), sample mean {s.mean():.3f} vs TW mean {T.mean():.4f}"


BULK_X0, BULK_WINDOW = 12.0, 5.0


def c9_bulk(trials=400):
    run = _mc_run(trials, SEED + 9)
    sp = ens.bulk_unfold(run, MC_INSTANCE, BULK_X0, BULK_WINDOW)
    d = ens.ks_distance(sp, kern.sine_spacing_cdf_clipped)
    ok = d < 0.05 and sp.size >= 10_000
    return ok, f"KS = {d:.4f} (< 0.05) on {sp.size} spacings, mean {sp.mean():.4f}"


def c10_tw_evaluator():
    s = np.linspace(-8.0, 4.0, 121)
    f = kern.tw_cdf(s)
    g = kern.tw_cdf_painleve(s)
    two = float(np.max(np.abs(f - g)))
    dbl = max(abs(kern.fredholm_det(kern.KernelSpec(kern.Kind.AIRY, t), 80)
                  - kern.fredholm_det(kern.KernelSpec(kern.Kind.AIRY, t), 160)) for t in s)
    T = kern.tw_table()
    mono = bool(np.all(np.diff(T.cdf) >= 0))
    lo, hi = float(T.cdf[0]), float(T.cdf[-1])
    ok = two <= 1e-6 and dbl < 1e-8 and mono and lo < 1e-10 and hi > 1 - 1e-7
    return ok, (f"two-path {two:.1e}, doubling {dbl:.1e}, monotone={mono}, "
                f"F(-10)={lo:.1e}, 1-F(6)={1 - hi:.1e}")


def c11_finite_kernel():
    a = 3.0
    tr = []
    res = 0.0
    for N in (4, 8, 12):
        fs = FiniteSize(2 * N, N, N // 2)
        tr.append(abs(fk.trace(fs, a) - N))
        for n1 in range(fs.N0 + 2):
            for n2 in range(fs.N1 + 2):
                if 0 < n1 + n2 <= N + 1:
                    res = max(res, fk.orthogonality_residuals(n1, n2, fs, a))
    lue = 0.0
    for N in (4, 8):
        fs = FiniteSize(2 * N, N, N // 2)
        for x, y in ((0.5, 0.5), (0.3, 1.2), (1.5, 0.8), (1.0, 1.0)):
            ref = fk.kernel_lue(x, y, fs)
            lue = max(lue, abs(fk.kernel_finite(x, y, fs, 1 + 1e-10) - ref) / abs(ref))
    ok = max(tr) < 1e-6 and lue < 1e-6 and res < 1e-8
    return ok, f"trace error {max(tr):.1e}, a->1 rel error {lue:.1e}, max residual {res:.1e}"


def c12_determinism():
    from .cli import main

    with tempfile.TemporaryDirectory() as d:
        paths = [os.path.join(d, f"s{i}.csv") for i in range(2)]
        for pth, threads in zip(paths, (1, 4)):
            code = main(["sample", "--a", "10", "--beta", "0.5", "--c", "0.5", "--M", "60",
                         "--trials", "8", "--seed", "7", "--out", pth, "--threads", str(threads)])
            if code != 0:
                return False, f"sample exited with {code}"
        a, b = (open(p, "rb").read() for p in paths)
    return a == b, f"{len(a)} bytes, identical={a == b}"


CRITERIA = [
    (1, "classification vs D3 sign-scan oracle", c1_classification, False),
    (2, "density closed form vs oracle", c2_density_dual_path, False),
    (3, "interval masses", c3_masses, False),
    (4, "edge exponent and constants", c4_edges, False),
    (5, "theta jumps and orderings", c5_theta, False),
    (6, "scaling covariance of endpoints", c6_scaling, False),
    (7, "global law Monte Carlo", c7_global_law, True),
    (8, "Tracy-Widom Monte Carlo", c8_tracy_widom, True),
    (9, "bulk spacing Monte Carlo", c9_bulk, True),
    (10, "TW evaluator consistency", c10_tw_evaluator, False),
    (11, "finite-N kernel", c11_finite_kernel, False),
    (12, "sample determinism", c12_determinism, False),
]


def run_criterion(number: int) -> CriterionResult:
    for n, name, fn, _ in CRITERIA:
        if n == number:
            return _timed(n, name, fn)
    raise KeyError(number)


def run_suite(quick: bool = False) -> list[CriterionResult]:
    return [_timed(n, name, fn) for n, name, fn, mc in CRITERIA if not (quick and mc)]


def format_table(results) -> str:
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"

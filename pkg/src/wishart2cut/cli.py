"""Command-line front end: ``wishart2cut <command> [flags]``.

Exit codes: 0 success, 1 failed ``verify``, 2 invalid input, 3 parameters
inside the guard band around the merging-cut transition.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import io as wio
from .model import FiniteSize, ModelParams, ParameterError, finite_size, validate

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_TRANSITION = 0, 1, 2, 3

CONFIG_KEYS = ("a", "beta", "c", "M", "trials", "seed", "grid_min", "grid_max", "grid_n",
               "out", "format", "x0", "window", "N1")


def _parent():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("parameters")
    g.add_argument("--a", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--M", type=int)
    g.add_argument("--trials", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--grid-min", dest="grid_min", type=float)
    g.add_argument("--grid-max", dest="grid_max", type=float)
    g.add_argument("--grid-n", dest="grid_n", type=int)
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--config", help="JSON file with any of the flag names as keys; flags win")
    g.add_argument("--threads", type=int, help="worker threads (capped by WISHART2CUT_THREADS)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parent = _parent()
    ap = argparse.ArgumentParser(prog="wishart2cut", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[parent], help="regime, discriminant and endpoints")
    sub.add_parser("density", parents=[parent], help="density grid z,rho,rho_F")
    sub.add_parser("sample", parents=[parent], help="Monte Carlo eigenvalues")
    sub.add_parser("largest", parents=[parent], help="edge-rescaled largest eigenvalue per trial")
    sp = sub.add_parser("spacings", parents=[parent], help="unfolded bulk spacings")
    sp.add_argument("--x0", type=float)
    sp.add_argument("--window", type=float)
    sub.add_parser("tw", parents=[parent], help="Tracy-Widom CDF table (two evaluation paths)")
    sub.add_parser("gap", parents=[parent], help="sine-kernel gap probability and spacing CDF")
    sub.add_parser("finite-kernel", parents=[parent], help="exact finite-N kernel diagonal")
    v = sub.add_parser("verify", parents=[parent], help="run the acceptance suite")
    v.add_argument("--quick", action="store_true", help="skip the Monte Carlo criteria")
    return ap


def resolve_config(ns: argparse.Namespace) -> dict:
    cfg = {}
    if ns.config:
        with open(ns.config, encoding="utf-8") as f:
            raw = json.load(f)
        if not isinstance(raw, dict):
            raise ParameterError("config file must hold a JSON object")
        for k, v in raw.items():
            k = k.replace("-", "_")
            if k not in CONFIG_KEYS:
                raise ParameterError(f"unknown config key {k!r}")
            cfg[k] = v
    for k in CONFIG_KEYS:
        v = getattr(ns, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _params(cfg) -> ModelParams:
    missing = [k for k in ("a", "beta", "c") if k not in cfg]
    if missing:
        raise ParameterError(f"missing parameter(s): {', '.join('--' + m for m in missing)}")
    return validate(ModelParams(float(cfg["a"]), float(cfg["beta"]), float(cfg["c"])))


def _finite(cfg, params) -> FiniteSize:
    if "M" not in cfg:
        raise ParameterError("--M is required for this command")
    return finite_size(params, int(cfg["M"]))


def _grid(cfg, lo, hi, n):
    lo = cfg.get("grid_min", lo)
    hi = cfg.get("grid_max", hi)
    n = int(cfg.get("grid_n", n))
    if n < 2:
        raise ParameterError("grid count must be at least 2")
    if not hi > lo:
        raise ParameterError("grid max must exceed grid min")
    return np.linspace(lo, hi, n)


def _meta(cfg, command, **extra):
    return {"build": wio.BUILD_ID, "command": command, "config": cfg, **extra}


def _write_sidecar(cfg, meta):
    path = wio.sidecar_path(cfg.get("out"))
    if path:
        wio.write_atomic(path, wio.json_text(meta))
    else:
        sys.stderr.write(wio.json_text(meta))


# --- commands -------------------------------------------------------------


def cmd_classify(cfg) -> dict:
    from .spectral_curve import Regime, quartic_roots, sheet_assignment

    p = _params(cfg)
    bp = quartic_roots(p)
    out = {"delta": bp.delta, "regime": bp.regime.value, "degenerate": bp.degenerate,
           "params": p.as_dict(), "build": wio.BUILD_ID}
    if bp.regime is Regime.TWO_CUT:
        sa = sheet_assignment(p.a)
        out.update(gamma=bp.gamma, **{"lambda": bp.lam}, sheet={"k2": sa.k2, "k3": sa.k3})
    else:
        out.update(support=[float(bp.lam[0]), float(bp.lam[-1])])
    wio.emit(wio.json_text(out), cfg.get("out"))
    return out


def cmd_density(cfg) -> dict:
    from . import density as dens
    from .spectral_curve import Regime, quartic_roots

    p = _params(cfg)
    bp = quartic_roots(p)
    z = _grid(cfg, max(float(bp.lam[0]) - 0.1, 1e-9), float(bp.lam[-1]) + 0.1, 401)
    rho = dens.rho(z, p)
    rows = [(zi, ri, ri / p.c) for zi, ri in zip(z, rho)]
    meta = _meta(cfg, "density", support=dens._oracle_support(p), regime=bp.regime.value)
    if bp.regime is Regime.TWO_CUT:
        inside = rho > 0
        diff = float(np.max(np.abs(rho[inside] - dens.rho_oracle(z[inside], p)))) if inside.any() else 0.0
        meta.update(masses=dens.interval_masses(p), expected_masses=dens.expected_masses(p),
                    edge_constants=dens.edge_constants(p), closed_vs_oracle_max=diff)
    if cfg.get("format") == "json":
        meta["grid"] = {"z": z, "rho": rho}
        wio.emit(wio.json_text(meta), cfg.get("out"))
    else:
        wio.emit(wio.csv_text(["z", "rho", "rho_F"], rows), cfg.get("out"))
        _write_sidecar(cfg, meta)
    return meta


def _run(cfg, threads=None):
    from .ensemble import sample_eigenvalues

    p = _params(cfg)
    fs = _finite(cfg, p)
    trials = int(cfg.get("trials", 10))
    seed = int(cfg.get("seed", 0))
    t0 = time.perf_counter()
    run = sample_eigenvalues(fs, p.a, seed, trials, threads=threads)
    return p, fs, run, time.perf_counter() - t0


def cmd_sample(cfg, threads=None) -> dict:
    p, fs, run, dt = _run(cfg, threads)
    rows = ((t, r + 1, v) for t in range(run.trials) for r, v in enumerate(run.eigenvalues[t]))
    wio.emit(wio.csv_text(["trial", "rank", "eigenvalue"], rows), cfg.get("out"))
    meta = _meta(cfg, "sample", params=p.as_dict(), finite_size=fs.as_dict(), seed=run.seed,
                 trials=run.trials, seconds=round(dt, 3))
    _write_sidecar(cfg, meta)
    return meta


def cmd_largest(cfg, threads=None) -> dict:
    from .ensemble import edge_rescale, ks_distance
    from .kernels import tw_table

    p, fs, run, dt = _run(cfg, threads)
    s = edge_rescale(run, p)
    wio.emit(wio.csv_text(["trial", "s_rescaled"], enumerate(s)), cfg.get("out"))
    T = tw_table()
    meta = _meta(cfg, "largest", params=p.as_dict(), finite_size=fs.as_dict(), seed=run.seed,
                 trials=run.trials, ks_vs_tw=ks_distance(s, T), mean=float(np.mean(s)),
                 tw_mean=T.mean(), seconds=round(dt, 3))
    _write_sidecar(cfg, meta)
    return meta


def default_bulk_window(params):
    from .density import _oracle_support

    ivs = _oracle_support(params)
    lo, hi = max(ivs, key=lambda iv: iv[1] - iv[0])
    return 0.5 * (lo + hi), 0.25 * (hi - lo)


def cmd_spacings(cfg, threads=None) -> dict:
    from .ensemble import bulk_unfold, ks_distance
    from .kernels import sine_spacing_cdf_clipped

    p, fs, run, dt = _run(cfg, threads)
    x0, w = default_bulk_window(p)
    x0 = float(cfg.get("x0", x0))
    w = float(cfg.get("window", w))
    sp = bulk_unfold(run, p, x0, w)
    wio.emit(wio.csv_text(["index", "spacing"], enumerate(sp)), cfg.get("out"))
    meta = _meta(cfg, "spacings", params=p.as_dict(), finite_size=fs.as_dict(), x0=x0, window=w,
                 count=int(sp.size), mean=float(sp.mean()),
                 ks_vs_sine=ks_distance(sp, sine_spacing_cdf_clipped), seconds=round(dt, 3))
    _write_sidecar(cfg, meta)
    return meta


def cmd_tw(cfg) -> dict:
    from .kernels import TW_RANGE, tw_cdf, tw_cdf_painleve

    s = _grid(cfg, TW_RANGE[0], TW_RANGE[1], 161)
    f = tw_cdf(s)
    g = tw_cdf_painleve(s)
    rows = [(a, b, c, abs(b - c)) for a, b, c in zip(s, f, g)]
    wio.emit(wio.csv_text(["s", "tw_cdf", "tw_cdf_painleve", "abs_diff"], rows), cfg.get("out"))
    meta = _meta(cfg, "tw", max_abs_diff=float(np.max(np.abs(f - g))),
                 monotone=bool(np.all(np.diff(f) >= 0)))
    _write_sidecar(cfg, meta)
    return meta


def cmd_gap(cfg) -> dict:
    from .kernels import SINE_RANGE, sine_gap_probability, sine_spacing_cdf

    s = _grid(cfg, 0.0, SINE_RANGE, 101)
    rows = list(zip(s, sine_gap_probability(s), sine_spacing_cdf(s)))
    wio.emit(wio.csv_text(["s", "E", "spacing_cdf"], rows), cfg.get("out"))
    meta = _meta(cfg, "gap")
    _write_sidecar(cfg, meta)
    return meta


def cmd_finite_kernel(cfg) -> dict:
    from .density import _oracle_support, density_F
    from .finite_kernel import kernel_finite_diag

    p = _params(cfg)
    fs = _finite(cfg, p)
    ivs = _oracle_support(p)
    x = _grid(cfg, max(ivs[0][0] * 0.5, 1e-6), ivs[-1][1] * 1.2, 101)
    K = kernel_finite_diag(x, fs, p.a)
    rows = list(zip(x, K, density_F(x, p)))
    wio.emit(wio.csv_text(["x", "K_diag", "rho_F_limit"], rows), cfg.get("out"))
    meta = _meta(cfg, "finite-kernel", finite_size=fs.as_dict(),
                 note="K_diag / N approximates rho_F_limit")
    _write_sidecar(cfg, meta)
    return meta


def cmd_verify(cfg, quick=False) -> int:
    from .acceptance import format_table, run_suite

    results = run_suite(quick=quick)
    text = format_table(results)
    sys.stdout.write(text)
    if cfg.get("out"):
        wio.write_atomic(cfg["out"], wio.json_text({"build": wio.BUILD_ID, "results": [r.as_dict() for r in results]}))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


COMMANDS = {
    "classify": cmd_classify, "density": cmd_density, "sample": cmd_sample,
    "largest": cmd_largest, "spacings": cmd_spacings, "tw": cmd_tw, "gap": cmd_gap,
    "finite-kernel": cmd_finite_kernel,
}


def main(argv=None) -> int:
    from .spectral_curve import NearTransitionError

    ns = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(ns)
        if ns.command == "verify":
            return cmd_verify(cfg, quick=ns.quick)
        fn = COMMANDS[ns.command]
        if ns.command in ("sample", "largest", "spacings"):
            fn(cfg, threads=ns.threads)
        else:
            fn(cfg)
    except NearTransitionError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_TRANSITION
    except (ParameterError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: barrier verification, eigenvalues, solver runs,
experiments.

Exit codes: 0 success, 1 assertion/verdict failure, 2 usage or config error.
Output directory: --out flag, else the TRUDLAB_OUT environment variable, else
the current directory.  JSON for configs/reports, CSV for fields and tables.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import barriers
from .barriers import ConstraintError, Verdict, verify_sign
from .eigensolver import ShootingError, first_eigenvalue, scaling_check
from .exponent import Exponent
from .experiments import decay_experiment, flatten_experiment, phragmen_lindelof_study
from .pde import SolverConfig, SolverError, solve_trudinger_radial

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _out_dir(args) -> str:
    out = getattr(args, "out", None) or os.environ.get("TRUDLAB_OUT") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _load_config(path: str | None, allowed: set, overrides: dict) -> dict:
    cfg = {}
    if path:
        with open(path) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - allowed
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    missing = [k for k in ("family",) if k in allowed and k not in cfg]
    if missing:
        raise UsageError(f"missing required keys: {missing}")
    return cfg


# ---------------------------------------------------------------------------
# verify


VERIFY_KEYS = {"family", "p", "n", "R", "T", "alpha", "b", "m", "M", "delta",
               "lam", "theta", "rho", "samples", "tolerance", "seed", "safety"}


def _build_barrier(cfg: dict):
    family = cfg["family"]
    p = Exponent.parse(cfg.get("p", 2))
    n = int(cfg.get("n", 2))
    R = float(cfg.get("R", 1.0))
    if family == "eigen":
        return barriers.make_eigen_barrier(p, n, R)
    if family == "growth":
        T = float(cfg.get("T", 1.0))
        alpha = float(cfg.get("alpha", 1.0 if p.is_finite else 0.5))
        b = cfg.get("b")
        if b is None:
            b = 0.5 * barriers.growth_barrier_max_b(p, T, alpha)
        return barriers.make_growth_barrier(p, n, T, alpha, float(b))
    if family == "kernel":
        return barriers.make_kernel(p, n)
    if family == "power":
        return barriers.make_power_solution(
            p, n, +1, f=lambda t: 1.0 / (1.0 + t),
            fprime=lambda t: -1.0 / (1.0 + t) ** 2, f_label="1/(1+t)")
    if family == "paraboloid":
        return barriers.make_paraboloid(p, n, R)
    if family == "flatten-upper":
        return barriers.make_flattening_upper(
            p, n, R, float(cfg.get("M", 2.0)),
            float(cfg.get("alpha", _default_flatten_alpha(p))),
            float(cfg.get("safety", 1.05)))
    if family == "flatten-lower":
        return barriers.make_flattening_lower(
            p, n, R, float(cfg.get("m", 0.5)),
            float(cfg.get("alpha", _default_flatten_alpha(p))),
            float(cfg.get("safety", 1.05)))
    if family == "boundary":
        delta = float(cfg.get("delta", 1.0))
        if p.is_finite and p.p > n:
            theta = float(cfg.get("theta", 0.5))
            lam = cfg.get("lam")
            if lam is None:
                lam = 0.5 * barriers.boundary_barrier_max_rate(p, n, {"theta": theta, "R": R})
            return barriers.make_boundary_barrier(p, n, delta, float(lam), R, theta=theta)
        rho = float(cfg.get("rho", 0.5))
        alpha = float(cfg.get("alpha", 1.0 + max(0.0, (n - p.p) / (p.p - 1.0))))
        lam = cfg.get("lam")
        if lam is None:
            lam = 0.5 * barriers.boundary_barrier_max_rate(
                p, n, {"alpha": alpha, "rho": rho, "R": R})
        return barriers.make_boundary_barrier(p, n, delta, float(lam), R,
                                              alpha=alpha, rho=rho)
    raise UsageError(
        f"unknown family {family!r}; choose from eigen, growth, kernel, power, "
        "paraboloid, flatten-upper, flatten-lower, boundary")


def _default_flatten_alpha(p: Exponent) -> float:
    if p.is_infinity:
        return 0.5
    if p.p <= 2.0:
        return 1.0
    return min(1.0, 1.0 / (p.p - 2.0))


def _run_verify_one(cfg: dict, out_dir: str) -> int:
    spec = _build_barrier(cfg)
    report = verify_sign(
        spec,
        samples=int(cfg.get("samples", 10_000)),
        tolerance=float(cfg.get("tolerance", 1e-9)),
        seed=int(cfg.get("seed", barriers.DEFAULT_SEED)),
    )
    stamp = time.strftime("%Y%m%dT%H%M%S")
    path = os.path.join(out_dir, f"verify-{spec.family.value}-{spec.p.label}"
                        f"-{spec.n}-{stamp}.json")
    payload = {"config": cfg, "report": report.to_dict()}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
    expected = spec.expected.value if spec.expected else None
    ok = (report.verdict == spec.expected
          or (report.verdict == Verdict.SOLUTION
              and spec.expected in (Verdict.SUBSOLUTION, Verdict.SUPERSOLUTION)))
    print(f"{spec.family.value} p={spec.p.label} n={spec.n}: verdict "
          f"{report.verdict.value} (expected {expected}) -> {path}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    out_dir = _out_dir(args)
    overrides = {k: getattr(args, k.replace("-", "_"), None) for k in
                 ("family", "p", "n", "R", "T", "alpha", "b", "m", "M",
                  "delta", "lam", "theta", "rho", "samples", "tolerance", "seed")}
    if args.sweep:
        with open(args.sweep) as fh:
            entries = json.load(fh)
        if not isinstance(entries, list):
            raise UsageError("sweep file must hold a list of verify configs")
        for entry in entries:
            unknown = set(entry) - VERIFY_KEYS
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            codes = list(pool.map(lambda e: _run_verify_one(e, out_dir), entries))
        return max(codes) if codes else EXIT_OK
    cfg = _load_config(args.config, VERIFY_KEYS, overrides)
    return _run_verify_one(cfg, out_dir)


# ---------------------------------------------------------------------------
# eigen


def cmd_eigen(args) -> int:
    p = Exponent.parse(args.p)
    if p.is_infinity:
        raise UsageError("p=inf eigenvalue out of scope (finite 2 <= p only)")
    out_dir = _out_dir(args)
    if args.scaling:
        radii = [float(x) for x in args.scaling.split(",")]
        spread = scaling_check(p, args.n, radii, tol=args.tol)
        print(f"scaling spread of lambda_R * R^p over radii {radii}: {spread:.3e}")
        return EXIT_OK if spread < 1e-4 else EXIT_FAIL
    res = first_eigenvalue(p, args.n, args.R, tol=args.tol)
    stamp = time.strftime("%Y%m%dT%H%M%S")
    base = os.path.join(out_dir, f"eigen-{p.label}-{args.n}-{stamp}")
    with open(base + ".json", "w") as fh:
        fh.write(res.to_json(indent=2))
    res.to_csv(base + ".csv")
    print(f"lambda = {res.lam:.10g}  (iterations {res.bisection_iterations}, "
          f"bracket width {res.bracket[1] - res.bracket[0]:.3e}, "
          f"residual audit {res.residual_norm:.3e})")
    print(f"wrote {base}.json, {base}.csv")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


SOLVE_KEYS = {"p", "n", "R", "nodes", "t_end", "dt", "scheme", "tolerance",
              "initial", "boundary"}

INITIAL_PRESETS = {
    "constant": lambda params, R: (lambda r: np.full_like(np.asarray(r, float),
                                                          params.get("value", 1.0))),
    "parabolic": lambda params, R: (lambda r: params.get("value", 1.0)
                                    * (1.0 - (np.asarray(r, float) / R) ** 2)),
    "bump": lambda params, R: (lambda r: params.get("floor", 1.0)
                               + params.get("amplitude", 1.0)
                               * np.cos(0.5 * np.pi * np.asarray(r, float) / R) ** 2),
}


def _initial_from_config(spec, R):
    if isinstance(spec, (int, float)):
        return INITIAL_PRESETS["constant"]({"value": float(spec)}, R)
    kind = spec.get("kind")
    if kind not in INITIAL_PRESETS:
        raise UsageError(f"unknown initial preset {kind!r}; "
                         f"choose from {sorted(INITIAL_PRESETS)}")
    return INITIAL_PRESETS[kind](spec, R)


def _boundary_from_config(spec):
    if isinstance(spec, (int, float)):
        return lambda t: float(spec)
    if spec.get("kind") == "constant":
        return lambda t: float(spec.get("value", 1.0))
    raise UsageError("boundary config supports constants only")


def cmd_solve(args) -> int:
    out_dir = _out_dir(args)
    cfg = _load_config(args.config, SOLVE_KEYS, {
        "p": args.p, "n": args.n, "R": args.R, "nodes": args.nodes,
        "t_end": args.t_end, "dt": args.dt, "scheme": args.scheme,
    })
    for key in ("p", "scheme", "t_end"):
        if key not in cfg:
            raise UsageError(f"missing required key {key!r}")
    R = float(cfg.get("R", 1.0))
    initial = _initial_from_config(cfg.get("initial", 1.0), R)
    boundary = _boundary_from_config(cfg.get("boundary", 1.0))
    sc = SolverConfig(
        p=Exponent.parse(cfg["p"]), n=int(cfg.get("n", 2)), R=R,
        nodes=int(cfg.get("nodes", 101)), t_end=float(cfg["t_end"]),
        scheme=cfg["scheme"], boundary=boundary, initial=initial,
        dt=cfg.get("dt"), tolerance=float(cfg.get("tolerance", 1e-9)))
    field = solve_trudinger_radial(sc)
    stamp = time.strftime("%Y%m%dT%H%M%S")
    base = os.path.join(out_dir, f"solve-{sc.p.label}-{sc.n}-{stamp}")
    field.to_csv(base + ".csv")
    field.metadata["config_echo"] = {k: cfg.get(k) for k in sorted(cfg)}
    field.save_manifest(base + ".json")
    ok = field.metadata["audit_max"] <= field.metadata["consistency_bound_residual"] + 1e-12
    print(f"levels {len(field.times)}, audit residual "
          f"{field.metadata['audit_max']:.3e}, bound "
          f"{field.metadata['consistency_bound_residual']:.3e}")
    print(f"wrote {base}.csv, {base}.json")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# experiment


def cmd_experiment(args) -> int:
    out_dir = _out_dir(args)
    p = Exponent.parse(args.p)
    n = args.n
    if args.kind == "decay":
        report = decay_experiment(p, n, args.R, nodes=args.nodes or 401)
    elif args.kind == "flatten":
        report = flatten_experiment(p, n, args.R, m=args.m, M=args.M,
                                    alpha=args.alpha or _default_flatten_alpha(p),
                                    nodes=args.nodes or 201)
    elif args.kind == "pl":
        report = phragmen_lindelof_study(
            p, n, m=args.m, M=args.M,
            eps_list=[0.0025, 0.005, 0.01], R_list=[1.0, 2.0, 4.0],
            t_probe=1.0)
    else:
        raise UsageError(f"unknown experiment {args.kind!r}")
    paths = report.save(out_dir)
    for name, ok in report.passes.items():
        print(f"  {name}: {'pass' if ok else 'FAIL'}")
    print(f"wrote {', '.join(paths)}")
    return EXIT_OK if report.all_pass else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="trudlab",
        description="Numerical laboratory for Trudinger-type doubly nonlinear diffusion")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify a barrier family's sign claim")
    v.add_argument("--family")
    v.add_argument("--p")
    v.add_argument("--n", type=int)
    v.add_argument("--R", type=float)
    v.add_argument("--T", type=float)
    v.add_argument("--alpha", type=float)
    v.add_argument("--b", type=float)
    v.add_argument("--m", type=float)
    v.add_argument("--M", type=float)
    v.add_argument("--delta", type=float)
    v.add_argument("--lam", type=float)
    v.add_argument("--theta", type=float)
    v.add_argument("--rho", type=float)
    v.add_argument("--samples", type=int)
    v.add_argument("--tolerance", type=float)
    v.add_argument("--seed", type=int)
    v.add_argument("--config")
    v.add_argument("--sweep", help="JSON list of verify configs")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eigen", help="first eigenvalue on a ball")
    e.add_argument("--p", required=True)
    e.add_argument("--n", type=int, default=2)
    e.add_argument("--R", type=float, default=1.0)
    e.add_argument("--tol", type=float, default=1e-10)
    e.add_argument("--scaling", help="comma-separated radii for the scaling check")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eigen)

    s = sub.add_parser("solve", help="time-step the radial problem")
    s.add_argument("--config")
    s.add_argument("--p")
    s.add_argument("--n", type=int)
    s.add_argument("--R", type=float)
    s.add_argument("--nodes", type=int)
    s.add_argument("--t-end", dest="t_end", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--scheme", choices=["log-implicit", "direct-explicit"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    x = sub.add_parser("experiment", help="run a scripted experiment")
    x.add_argument("kind", choices=["decay", "flatten", "pl"])
    x.add_argument("--p", required=True)
    x.add_argument("--n", type=int, default=2)
    x.add_argument("--R", type=float, default=1.0)
    x.add_argument("--m", type=float, default=0.5)
    x.add_argument("--M", type=float, default=2.0)
    x.add_argument("--alpha", type=float)
    x.add_argument("--nodes", type=int)
    x.add_argument("--out")
    x.set_defaults(func=cmd_experiment)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (UsageError, ConstraintError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, ShootingError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

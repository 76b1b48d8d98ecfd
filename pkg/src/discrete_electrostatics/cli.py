"""Command line front end: solve, verify, sweep, figures, oracle-check.

Options can come from a TOML file (``--config``): top-level keys apply to
every command, a table named after the command overrides them, and flags
given on the command line override both.

Exit codes: 0 success, 1 a validation check failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import families as fam
from .core import DomainError, InfeasibleError, NotGConvexError
from .diffeq import NotASolutionError, infer_C, verify_critical
from .electrostatics import log_force, log_potential, pair_force, pair_potential
from .oracle import grid_minimize, interlacing_check, monotonicity_sweep
from .solver import SolverOptions, solve_equilibrium

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PARAM_FLAGS = ("a", "p", "N", "alpha", "beta", "gamma", "delta", "c")
INT_KEYS = {"N", "n", "jobs", "max_sweeps", "resolution", "trials", "which"}
FIGURE_RANGE = [k / 100.0 for k in range(-600, -104)] + [k / 100.0 for k in range(105, 601)]


class UsageError(Exception):
    pass


def _fmt(v: float) -> str:
    return "%.17g" % v


# --------------------------------------------------------------------------
# config handling
# --------------------------------------------------------------------------


def load_config(path: str, command: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc
    merged = {k: v for k, v in data.items() if not isinstance(v, dict)}
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise UsageError(f"config field '{command}' must be a table")
    merged.update(section)
    return merged


def _coerce(key: str, value):
    if key in INT_KEYS:
        if isinstance(value, bool) or not float(value).is_integer():
            raise UsageError(f"field '{key}' must be an integer, got {value!r}")
        return int(value)
    if key in PARAM_FLAGS or key in ("h", "tol"):
        if isinstance(value, bool):
            raise UsageError(f"field '{key}' must be a number")
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"field '{key}' must be a number, got {value!r}") from exc
    return value


def resolve_options(args: argparse.Namespace, defaults: dict) -> dict:
    """Flags override the config file, which overrides built-in defaults."""
    known = set(defaults) | set(PARAM_FLAGS)
    config = load_config(args.config, args.command) if args.config else {}
    for key in config:
        if key not in known:
            raise UsageError(f"unknown config field '{key}' for '{args.command}'")
    out = {}
    for key in known:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in config:
            out[key] = _coerce(key, config[key])
        else:
            out[key] = defaults.get(key)
    return out


def spec_from(opts: dict) -> fam.FamilySpec:
    family = opts.get("family")
    if not family:
        raise UsageError("--family is required")
    family = family.replace("-", "_")
    if family not in fam.FAMILIES:
        raise UsageError(f"unknown family '{family}'; choose from {', '.join(fam.FAMILIES)}")
    if opts.get("n") is None:
        raise UsageError("--n is required")
    names = fam.PARAMETERS[family]
    params = {k: opts[k] for k in PARAM_FLAGS if opts.get(k) is not None}
    if family == "racah" and "alpha" not in params and "N" in params:
        params["alpha"] = -params.pop("N") - 1.0
    stray = [k for k in params if k not in names]
    if stray:
        raise UsageError(f"{family} does not take {', '.join('--' + k for k in stray)}")
    try:
        return fam.make_family(family, opts["n"], **params)
    except fam.FamilyError as exc:
        raise UsageError(str(exc)) from exc


def solver_options(opts: dict) -> SolverOptions:
    return SolverOptions(force_tolerance=opts.get("tol") or 1e-11,
                         max_sweeps=opts.get("max_sweeps") or 100_000)


# --------------------------------------------------------------------------
# writers
# --------------------------------------------------------------------------


def write_csv(path: str | None, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def write_json(path: str | None, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _solve(spec: fam.FamilySpec, opts: dict):
    h = opts.get("h") or 1.0
    return fam.solve_family(spec, solver_options(opts), h=h)


def cmd_solve(opts: dict) -> int:
    spec = spec_from(opts)
    res = _solve(spec, opts)
    out = opts.get("out")
    if out and out.endswith(".json"):
        payload = res.to_dict()
        payload["family"] = spec.family
        payload["params"] = spec.as_dict()
        payload["n"] = spec.n
        payload["regime"] = spec.regime
        write_json(out, payload)
    else:
        write_csv(out, ["index", "x"], [(j, float(x)) for j, x in enumerate(res.points)])
    if not res.converged:
        print(f"not converged: max force {res.final_max_force:.3e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def verify_spec(spec: fam.FamilySpec, opts: dict | None = None) -> list[tuple[str, bool, str]]:
    """Named invariant checks for one preset: (name, passed, detail)."""
    opts = opts or {}
    checks: list[tuple[str, bool, str]] = []
    res = _solve(spec, opts)
    fld = fam.field_of(spec, opts.get("h") or 1.0)
    crit = verify_critical(res.configuration, fld)
    if res.converged and crit.max_residual >= 1e-8 and opts.get("tol") is None:
        # the residual is ~ kappa * force; tighten the force tolerance to match
        sopts = dataclasses.replace(solver_options(opts), force_tolerance=max(1e-9 / crit.kappa, 1e-14))
        res = fam.solve_family(spec, sopts, fld.h, init=fam.positive_half(spec, res.points))
        crit = verify_critical(res.configuration, fld)
    pts = np.array(res.points)
    checks.append(("solver.convergence", res.converged,
                   f"max force {res.final_max_force:.3e} after {res.sweeps} sweeps"))
    trace = np.array(res.energy_trace)
    drops = np.diff(trace)
    ok = bool(np.all(drops <= 1e-10 * np.maximum(1.0, np.abs(trace[1:])))) if len(trace) > 1 else True
    checks.append(("solver.energy_decrease", ok, f"{len(trace)} sweeps recorded"))
    checks.append(("diffeq.residual", crit.max_residual < 1e-8, f"max residual {crit.max_residual:.3e}"))
    margin = float(np.diff(pts).min() - fld.h) if len(pts) > 1 else math.inf
    checks.append(("families.separation", margin > 0, f"min gap - h = {margin:.6g}"))
    try:
        C = infer_C(fld.A, fld.B, fam_poly(pts), fld.h, rtol=1e-6)
        expect = fam.eigen_term(spec)
        err = (C - expect).coeff_norm() / max(1.0, expect.coeff_norm())
        checks.append(("diffeq.infer_C", err < 1e-6, f"C = {_poly_text(C)}, expected {_poly_text(expect)}"))
    except NotASolutionError as exc:
        checks.append(("diffeq.infer_C", False, str(exc)))
    try:
        oracle = np.array(fam.lattice_root_oracle(spec, allow_nonstandard=True))
        dev = float(np.abs(oracle - pts).max()) if len(pts) else 0.0
        checks.append(("families.oracle_agreement", dev < 1e-8, f"max deviation {dev:.3e}"))
    except fam.FamilyError as exc:
        checks.append(("families.oracle_agreement", False, str(exc)))
    if spec.standard:
        r = fam.orthogonality_residual(spec)
        checks.append(("families.orthogonality", r < 1e-9, f"residual {r:.3e}"))
    if spec.n >= 2:
        try:
            prev = fam.solve_family(spec.replace(n=spec.n - 1), solver_options(opts)).points
            ok = interlacing_check(fam.positive_half(spec, prev), fam.positive_half(spec, pts))
            checks.append(("solver.interlacing", ok, f"degree {spec.n - 1} vs {spec.n}"))
        except (fam.FamilyError, InfeasibleError):
            pass
    return checks


def fam_poly(points):
    from .core import DensePolynomial

    return DensePolynomial.from_roots(list(points))


def _poly_text(p) -> str:
    return "[" + ", ".join("%.10g" % c for c in p.coeffs) + "]"


def random_spec(rng: random.Random, family: str | None = None) -> fam.FamilySpec:
    family = family or rng.choice(fam.FAMILIES)
    n = rng.randint(1, 5)
    r = lambda lo, hi: round(rng.uniform(lo, hi), 3)  # noqa: E731
    if family == "charlier":
        return fam.charlier(r(0.5, 6.0), n)
    if family == "krawtchouk":
        N = rng.randint(n, 14)
        return fam.krawtchouk(r(0.05, 0.95), N, n)
    if family == "meixner":
        return fam.meixner(r(0.5, 5.0), r(0.1, 0.9), n)
    if family == "hahn":
        return fam.hahn(r(-0.9, 4.0), r(-0.9, 4.0), rng.randint(n, 14), n)
    # packed quadratic-lattice cases (n = N) put a charge within ~1e-4 of an
    # endpoint, where double precision cannot reach the residual tolerance
    N = rng.randint(n + 1, 10)
    if family == "dual_hahn":
        return fam.dual_hahn(r(0.0, 3.0), r(0.0, 3.0), N, n)
    g = r(0.0, 3.0)
    return fam.racah(N, g + N + r(0.5, 4.0), g, r(0.0, 3.0), n)


def cmd_verify(opts: dict) -> int:
    if opts.get("random"):
        seed = int(os.environ.get("EQ_SOLVER_SEED", "0"))
        rng = random.Random(seed)
        family = opts.get("family")
        if family and family.replace("-", "_") not in fam.FAMILIES:
            raise UsageError(f"unknown family '{family}'")
        specs = [random_spec(rng, family and family.replace("-", "_")) for _ in range(opts.get("trials") or 5)]
        print(f"seed {seed}")
    else:
        specs = [spec_from(opts)]
    failed = 0
    for spec in specs:
        print(spec.label())
        for name, ok, detail in verify_spec(spec, opts):
            print(f"  {'PASS' if ok else 'FAIL'} {name}: {detail}")
            failed += not ok
    return EXIT_FAIL if failed else EXIT_OK


def _solve_points(job):
    spec, sopts = job
    return list(fam.solve_family(spec, sopts).points)


def cmd_sweep(opts: dict) -> int:
    base = dict(opts)
    param = opts.get("param")
    values = opts.get("values")
    if not param or not values:
        raise UsageError("sweep needs --param and --values")
    if param not in PARAM_FLAGS:
        raise UsageError(f"unknown parameter '{param}'")
    if isinstance(values, str):
        try:
            values = [float(v) for v in values.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"--values must be comma-separated numbers: {exc}") from exc
    specs = []
    for v in values:
        base[param] = _coerce(param, v)
        specs.append(spec_from(base))
    jobs = opts.get("jobs") or os.cpu_count() or 1
    work = [(s, solver_options(opts)) for s in specs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            roots = list(pool.map(_solve_points, work))
    else:
        roots = [_solve_points(w) for w in work]
    report = monotonicity_sweep(specs, roots)
    payload = report.to_dict()
    payload["param"] = param
    payload["values"] = [float(v) for v in values]
    write_json(opts.get("out"), payload)
    return EXIT_OK if report.ok else EXIT_FAIL


def figure_rows(which: int) -> tuple[list[str], list[tuple]]:
    if which == 1:
        rows = []
        for x in FIGURE_RANGE:
            f = pair_force(0.0, x, 1.0).value
            g = log_force(0.0, x)
            rows.append((x, f, g, f / g))
        return ["x", "F0", "F0_log", "ratio"], rows
    if which == 2:
        rows = [(y, pair_potential(0.0, y, 1.0), log_potential(0.0, y)) for y in FIGURE_RANGE]
        return ["y", "V0", "V0_log"], rows
    raise UsageError(f"unknown figure id {which}; choose 1 or 2")


def cmd_figures(opts: dict) -> int:
    which = opts.get("which")
    if which is None:
        raise UsageError("--which is required")
    header, rows = figure_rows(which)
    write_csv(opts.get("out"), header, rows)
    return EXIT_OK


def cmd_oracle_check(opts: dict) -> int:
    spec = spec_from(opts)
    if spec.n > 3 or spec.quadratic:
        raise UsageError("oracle-check handles one-interval presets with n <= 3")
    fld = fam.field_of(spec, opts.get("h") or 1.0)
    res = solve_equilibrium(fld, spec.n, solver_options(opts))
    cfg = grid_minimize(fld, spec.n, opts.get("resolution"))
    dom = fld.domain.intervals[0]
    span = dom.length if dom.bounded else None
    dev = float(np.abs(np.array(cfg.points) - res.points).max())
    print("solver:", " ".join(_fmt(float(v)) for v in res.points))
    print("grid:  ", " ".join(_fmt(v) for v in cfg.points))
    print(f"max deviation {dev:.3e}")
    if span is not None:
        cell = span / (opts.get("resolution") or {1: 1000, 2: 400, 3: 120}[spec.n])
        ok = dev <= 2 * cell
        print(f"{'PASS' if ok else 'FAIL'} oracle.agreement: {dev / cell:.3g} grid cells")
        return EXIT_OK if ok else EXIT_FAIL
    return EXIT_OK


COMMANDS = {
    "solve": (cmd_solve, {"family": None, "n": None, "h": 1.0, "out": None, "tol": 1e-11, "max_sweeps": 100_000}),
    "verify": (cmd_verify, {"family": None, "n": None, "h": 1.0, "tol": 1e-11, "max_sweeps": 100_000,
                            "random": False, "trials": 5}),
    "sweep": (cmd_sweep, {"family": None, "n": None, "param": None, "values": None, "jobs": None, "out": None,
                          "tol": 1e-11, "max_sweeps": 100_000}),
    "figures": (cmd_figures, {"which": None, "out": None}),
    "oracle-check": (cmd_oracle_check, {"family": None, "n": None, "h": 1.0, "resolution": None, "tol": 1e-11,
                                        "max_sweeps": 100_000}),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrete-electrostatics", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def family_flags(p):
        p.add_argument("--family")
        p.add_argument("--n", type=int)
        for k in PARAM_FLAGS:
            p.add_argument(f"--{k}", type=int if k == "N" else float, dest=k)
        p.add_argument("--h", type=float)
        p.add_argument("--tol", type=float, help="force tolerance")
        p.add_argument("--max-sweeps", type=int, dest="max_sweeps")

    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML file with default options")
        if name != "figures":
            family_flags(p)
        if name in ("solve", "sweep", "figures"):
            p.add_argument("--out", help="output file (.csv or .json); stdout if omitted")
        if name == "verify":
            p.add_argument("--random", action="store_true", default=None,
                           help="random presets seeded by EQ_SOLVER_SEED")
            p.add_argument("--trials", type=int)
        if name == "sweep":
            p.add_argument("--param")
            p.add_argument("--values", help="comma-separated values")
            p.add_argument("--jobs", type=int)
        if name == "figures":
            p.add_argument("--which", type=int)
        if name == "oracle-check":
            p.add_argument("--resolution", type=int)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    func, defaults = COMMANDS[args.command]
    try:
        opts = resolve_options(args, defaults)
        return func(opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, NotGConvexError, DomainError, fam.FamilyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: run, convergence, compare, check."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path


from .analysis import (
    compute_eoc,
    error_norms,
    field_statistics,
    function_statistics,
    output_grid,
    write_limiter_csv,
    write_statistics,
    write_table,
)
from .config import load_config
from .euler import InadmissibleStateError
from .field import save_snapshot
from .limiters import limiter_statistics
from .mesh import ConfigError
from .reference import McPlan, monte_carlo_sod, sod_exact_statistics, stochastic_collocation_run
from .scenarios import SodIC, build_problem

THREADS_ENV = "MEHDSG_THREADS"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
REFINE_KEYS = {"me": "n_elements", "kg": "K_G", "nx": "nx"}


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from None


def _scenario(args):
    sc = load_config(args.scenario)
    kw = {}
    if getattr(args, "flux", None):
        kw["flux"] = args.flux
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    return sc.replace(**kw) if kw else sc


def parse_refine(spec: str):
    """'me:2,4,8' -> ('n_elements', [2, 4, 8])."""
    try:
        key, vals = spec.split(":", 1)
        values = [int(v) for v in vals.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --refine '{spec}', expected e.g. me:2,4,8,16") from None
    if key not in REFINE_KEYS:
        raise ConfigError(f"bad --refine key '{key}', expected one of {sorted(REFINE_KEYS)}")
    if len(values) < 2 or any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("--refine needs at least two strictly increasing values")
    return REFINE_KEYS[key], values


def reference_statistics(prob, grid, t, use_mc=False):
    """Exact-solution statistics on ``grid`` (None if the scenario has no exact solution)."""
    sc = prob.scenario
    if isinstance(prob.ic, SodIC):
        if use_mc:
            return monte_carlo_sod(prob.ic, McPlan(sc.mc_samples, sc.seed), grid, t)[0]
        return sod_exact_statistics(prob.ic, grid, t, sc.reference_points)
    if prob.exact is None:
        return None
    return function_statistics(prob.exact, t, grid, prob.space.grid, sc.output_xi_points)


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


def cmd_run(args) -> int:
    sc = _scenario(args)
    out = Path(args.out)
    prob = build_problem(sc)
    out.mkdir(parents=True, exist_ok=True)
    res = prob.solve(dump_path=out / "failure_state.npz")
    st = field_statistics(res.field, n_points=sc.output_points)
    write_statistics(st, out)
    write_limiter_csv(res.stats.rows, out / "limiter.csv")
    save_snapshot(res.field, out / "snapshot.npz", res.t)
    diag = {"scenario": sc.name, "t": res.t, "steps": res.steps, "wall_time": res.wall_time,
            "limiter": limiter_statistics(res.stats)}
    if res.monitor is not None:
        diag["invariants"] = res.monitor.summary()
    ref = reference_statistics(prob, st.grid, res.t, args.mc)
    if ref is not None:
        diag["errors"] = {f"{n}_{q}": error_norms(st, ref, n, q) for n in ("L1", "L2") for q in ("mean", "variance")}
    (out / "diagnostics.json").write_text(json.dumps(diag, indent=2))
    _log(f"run: {res.steps} steps to t={res.t:g} in {res.wall_time:.1f}s, output in {out}")
    return EXIT_OK


def convergence_table(sc, key, values, norm="L1", quantity="mean", use_mc=False, log=_log):
    rows = []
    errors = []
    for v in values:
        prob = build_problem(sc, **{key: v})
        t0 = time.perf_counter()
        res = prob.solve()
        st = field_statistics(res.field, n_points=sc.output_points)
        ref = reference_statistics(prob, st.grid, res.t, use_mc)
        if ref is None:
            raise ConfigError(f"scenario '{sc.name}' has no exact reference for a convergence study")
        e = error_norms(st, ref, norm, quantity)
        errors.append(e)
        rows.append([v, v, e])
        log(f"{key}={v}: error {e:.4e} ({time.perf_counter() - t0:.1f}s)")
    eoc = compute_eoc(errors, [r[1] for r in rows])
    for i, r in enumerate(rows):
        r.append(eoc[i - 1] if i > 0 else "")
    return rows


def cmd_convergence(args) -> int:
    sc = _scenario(args)
    key, values = parse_refine(args.refine)
    rows = convergence_table(sc, key, values, args.norm, args.quantity, args.mc)
    out = Path(args.out)
    write_table(rows, [key, "dofs", f"error_{args.norm}_{args.quantity}", "eoc"], out / "eoc.csv")
    for r in rows:
        print(",".join(str(x) for x in r))
    return EXIT_OK


def cmd_compare(args) -> int:
    sc = _scenario(args)
    out = Path(args.out)
    prob = build_problem(sc)
    res = prob.solve()
    grid = output_grid(prob.space.mesh, sc.output_points)
    stats = {"hdsg": field_statistics(res.field, grid)}
    stats["sc"] = stochastic_collocation_run(sc, threads=_threads(args), grid=grid)
    if isinstance(prob.ic, SodIC):
        stats["mc"], _ = monte_carlo_sod(prob.ic, McPlan(sc.mc_samples, sc.seed), grid, res.t)
    ref = reference_statistics(prob, grid, res.t, False)
    if ref is not None:
        stats["exact"] = ref
    names = list(stats)
    rows = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            rows.append([a, b] + [error_norms(stats[a], stats[b], n, q) for n in ("L1", "L2")
                                  for q in ("mean", "variance")])
    write_table(rows, ["method_a", "method_b", "L1_mean", "L1_variance", "L2_mean", "L2_variance"],
                out / "compare.csv")
    for name, s in stats.items():
        write_statistics(s, out / name)
    for r in rows:
        print(",".join(f"{x:.6e}" if isinstance(x, float) else str(x) for x in r))
    return EXIT_OK


def cmd_check(args) -> int:
    from .checks import run_checks

    results = run_checks()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mehdsg", description="Multi-element stochastic Galerkin DG for uncertain Euler flows")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default):
        sp.add_argument("--scenario", required=True, help="scenario config file")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
        sp.add_argument("--seed", type=int, default=None, help="random seed (Monte Carlo)")
        sp.add_argument("--flux", choices=("lf", "hlle"), default=None, help="override the numerical flux")
        sp.add_argument("--mc", action="store_true", help="Monte Carlo reference for Sod instead of the midpoint rule")

    r = sub.add_parser("run", help="run one scenario and write statistics")
    common(r, "results")
    c = sub.add_parser("convergence", help="refinement sweep and eoc table")
    common(c, "results")
    c.add_argument("--refine", required=True, help="me:2,4,8 | kg:2,4,8 | nx:10,20,40")
    c.add_argument("--norm", choices=("L1", "L2"), default="L1")
    c.add_argument("--quantity", choices=("mean", "variance"), default="mean")
    m = sub.add_parser("compare", help="hDSG vs collocation (vs Monte Carlo) error table")
    common(m, "results")
    sub.add_parser("check", help="oracle self-test suite")
    return p


COMMANDS = {"run": cmd_run, "convergence": cmd_convergence, "compare": cmd_compare, "check": cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InadmissibleStateError as exc:
        print(f"error: inadmissible state: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

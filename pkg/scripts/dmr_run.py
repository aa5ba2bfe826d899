"""DMR with and without the hyperbolicity limiter.

usage: python scripts/dmr_run.py [configs/dmr.cfg] [--out results/dmr]
"""
import argparse
import json
from pathlib import Path

from mehdsg.analysis import field_statistics, write_limiter_csv, write_statistics
from mehdsg.config import load_config
from mehdsg.euler import InadmissibleStateError
from mehdsg.limiters import limiter_statistics
from mehdsg.scenarios import build_problem


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config", nargs="?", default=str(Path(__file__).resolve().parents[1] / "configs" / "dmr.cfg"))
    p.add_argument("--out", default="results/dmr")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sc = load_config(args.config)
    summary = {}
    try:
        build_problem(sc.replace(hyperbolic_limiter=False)).solve()
        summary["limiter_off"] = "completed"
    except InadmissibleStateError as exc:
        summary["limiter_off"] = f"raised: {exc}"
    print("limiter off:", summary["limiter_off"])
    res = build_problem(sc.replace(check_invariants=True, progress_every=100)).solve()
    write_statistics(field_statistics(res.field, n_points=4), out)
    write_limiter_csv(res.stats.rows, out / "limiter.csv")
    summary["limiter_on"] = {"t": res.t, "steps": res.steps, "wall_time": res.wall_time,
                             "invariants": res.monitor.summary(), "limiter": limiter_statistics(res.stats)}
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary["limiter_on"], indent=2))


if __name__ == "__main__":
    main()

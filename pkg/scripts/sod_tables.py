"""Sod error tables: multi-element refinement (K_Gamma = 1) and polynomial refinement (one element).

usage: python scripts/sod_tables.py [--nx 500] [--out results/sod]
"""
import argparse
from pathlib import Path

from mehdsg.analysis import write_table
from mehdsg.cli import convergence_table
from mehdsg.scenarios import sod_scenario


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nx", type=int, default=500)
    p.add_argument("--out", default="results/sod")
    p.add_argument("--mc", action="store_true", help="Monte Carlo reference instead of the midpoint rule")
    args = p.parse_args()
    out = Path(args.out)
    sc = sod_scenario(nx=args.nx)
    header = ["refinement", "dofs", "error_L1_mean", "eoc"]
    me = convergence_table(sc.replace(K_G=1), "n_elements", [2, 4, 8, 16], use_mc=args.mc)
    write_table(me, header, out / "me_refinement.csv")
    kg = convergence_table(sc.replace(n_elements=1), "K_G", [2, 4, 8, 16], use_mc=args.mc)
    write_table(kg, header, out / "hdsg_refinement.csv")
    for name, rows in (("ME-SG, K_Gamma = 1", me), ("hDSG, one element", kg)):
        print(name)
        for r in rows:
            print("  " + "  ".join(f"{x:.4g}" if isinstance(x, float) else str(x) for x in r))


if __name__ == "__main__":
    main()

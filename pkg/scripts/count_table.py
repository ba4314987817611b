"""Number of constant-Q metrics on S^1_T x S^{n-1} for a range of T, with
the Delaunay witnesses found by period inversion.

    python scripts/count_table.py --n 10 --max-multiple 4
"""
import argparse

import numpy as np

from q6.bifurcation import count_solutions
from q6.constants import build_constants
from q6.delaunay import continue_family
from q6.spectral import cylinder_indicial


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--max-multiple", type=float, default=4.0)
    args = ap.parse_args()

    c = build_constants(args.n)
    T_cyl = cylinder_indicial(c).T_cyl
    seeds = continue_family(c, np.linspace(0.99, 0.05, 20) * c.eps_star).orbits
    for m in np.arange(0.5, args.max_multiple + 1e-9, 0.5):
        res = count_solutions(c, m * T_cyl, seed_orbits=seeds)
        necks = ", ".join(f"l={w.ell}:eps={w.epsilon:.3e}" for w in res.witnesses[1:])
        print(f"T = {m:3.1f} T_cyl  count = {res.count}  [{necks}]"
              + (f"  failures={res.failures}" if res.failures else ""))


if __name__ == "__main__":
    main()

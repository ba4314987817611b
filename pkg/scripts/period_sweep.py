"""Period function along the Delaunay family, with the thin-neck asymptote.

    python scripts/period_sweep.py --n 10 --count 20 --out results/period.csv
"""
import argparse
import math

import numpy as np

from q6.cli import family_table
from q6.constants import build_constants
from q6.delaunay import continue_family, sphere_distance
from q6.io import constants_meta, write_csv
from q6.plots import emit_plot
from q6.spectral import cylinder_indicial


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--stop", type=float, default=0.05, help="last necksize as a fraction of eps_star")
    ap.add_argument("--out", default="results/period.csv")
    args = ap.parse_args()

    c = build_constants(args.n)
    T_cyl = cylinder_indicial(c).T_cyl
    fam = continue_family(c, np.linspace(0.99, args.stop, args.count) * c.eps_star)
    g = c.gamma_n
    print(f"T_cyl = {T_cyl:.6f}")
    print(f"{'eps/eps*':>9} {'T':>10} {'T/T_cyl':>8} {'neck asymptote':>15} {'dist to sphere':>15}")
    for o in fam:
        # neck passage time of the homoclinic: (2/gamma) ln(2^{gamma+1}/eps)
        asym = (2 / g) * math.log(2 ** (g + 1) / o.epsilon)
        print(f"{o.epsilon / c.eps_star:9.4f} {o.period:10.5f} {o.period / T_cyl:8.4f} {asym:15.5f} "
              f"{sphere_distance(c, o):15.3e}")
    tab = family_table(fam.orbits)
    tab.meta = constants_meta(c) | {"T_cyl": T_cyl}
    write_csv(args.out, tab)
    emit_plot(tab, "period-vs-epsilon", args.out.rsplit(".", 1)[0] + ".svg")


if __name__ == "__main__":
    main()

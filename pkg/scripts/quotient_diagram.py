"""Yamabe quotient and mode-0 Morse index along the family, against the
round-sphere value.

    python scripts/quotient_diagram.py --n 10 --out results/diagram.csv
"""
import argparse

import numpy as np

from q6.bifurcation import theorem1_diagnostics
from q6.cli import DIAGRAM_COLUMNS
from q6.constants import build_constants
from q6.delaunay import continue_family
from q6.io import Table, constants_meta, write_csv
from q6.plots import emit_plot


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--stop", type=float, default=0.05)
    ap.add_argument("--out", default="results/diagram.csv")
    args = ap.parse_args()

    c = build_constants(args.n)
    fam = continue_family(c, np.linspace(0.99, args.stop, args.count) * c.eps_star)
    rows, summary = theorem1_diagnostics(c, fam.orbits)
    ref = summary["sphere_reference"]
    print(f"sphere value Qn*omega_n^(6/n) = {ref:.6f}")
    for r in rows:
        print(f"eps={r.epsilon:.5f} T={r.period:.5f} Y={r.yamabe_quotient:.5f} "
              f"gap={r.gap_to_sphere / ref:.3e} index={r.morse_index_mode0} {r.flag}")
    tab = Table(list(DIAGRAM_COLUMNS), [(r.epsilon, r.period, r.hamiltonian, r.yamabe_quotient, r.gap_to_sphere,
                                         int(r.morse_index_mode0), r.flag) for r in rows],
                constants_meta(c) | {"sphere_reference": ref})
    write_csv(args.out, tab)
    emit_plot(tab, "yamabe-vs-epsilon", args.out.rsplit(".", 1)[0] + ".svg")


if __name__ == "__main__":
    main()

"""Command-line orchestration: ``q6 <command> [flags] [--config run.json]``.

Every command prints one JSON summary line on stdout.  Exit status is 0 on
full success, 2 when flagged rows or per-row failures are present, 1 on
failure (including configuration errors, which name the offending field).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from q6.bifurcation import count_solutions, sphere_reference, theorem1_diagnostics
from q6.constants import build_constants, identity_residuals
from q6.delaunay import Tolerances, continue_family, shoot_delaunay
from q6.io import Table, constants_meta, read_csv, to_csv, write_csv
from q6.plots import KINDS, emit_plot
from q6.profiles import hamiltonian_radial, ode_residual
from q6.spectral import cylinder_indicial, monodromy, orbit_morse

COMMANDS = ("constants", "delaunay", "sweep", "spectral", "indicial", "count", "theorem1", "sphere-check", "plot")

log = logging.getLogger("q6")


class ConfigError(ValueError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass
class EpsGrid:
    start: float | None = None  # None -> 0.99 eps_star
    stop: float = 0.05
    count: int = 20
    spacing: str = "linear"
    relative: bool = False  # start/stop given as fractions of eps_star


@dataclass
class RunConfig:
    n: int = 10
    eps_grid: EpsGrid = field(default_factory=EpsGrid)
    tolerances: dict = field(default_factory=lambda: {"ode": 1e-12, "newton": 1e-10, "event": 1e-12})
    modes: tuple = (0, 3)
    gridN: int = 256
    output: str | None = None
    format: str = "csv"
    eps: float | None = None
    T: float | None = None
    plot: str | None = None

    def tol(self) -> Tolerances:
        return Tolerances(ode=self.tolerances["ode"], newton=self.tolerances["newton"],
                          event=self.tolerances["event"])

    def grid(self, eps_star: float) -> np.ndarray:
        g = self.eps_grid
        scale = eps_star if g.relative else 1.0
        start = 0.99 * eps_star if g.start is None else g.start * scale
        stop = g.stop * scale
        if g.count == 1:
            return np.array([start])
        if g.spacing == "geometric":
            return np.geomspace(start, stop, g.count)
        return np.linspace(start, stop, g.count)

    def validate(self) -> "RunConfig":
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 7:
            raise ConfigError("n", f"must be an integer >= 7, got {self.n!r}")
        g = self.eps_grid
        if not isinstance(g.count, int) or g.count < 1:
            raise ConfigError("eps_grid.count", f"must be an integer >= 1, got {g.count!r}")
        if g.spacing not in ("linear", "geometric"):
            raise ConfigError("eps_grid.spacing", f"must be linear or geometric, got {g.spacing!r}")
        es = build_constants(self.n).eps_star
        scale = es if g.relative else 1.0
        start = 0.99 * es if g.start is None else g.start * scale
        stop = g.stop * scale
        if not stop > 0:
            raise ConfigError("eps_grid.stop", f"must be positive, got {g.stop!r}")
        if not start < es:
            raise ConfigError("eps_grid.start", f"must be below eps_star={es:.6g}, got {start!r}")
        if g.count > 1 and not stop < start:
            raise ConfigError("eps_grid.stop", "must be below eps_grid.start")
        for k in ("ode", "newton", "event"):
            v = self.tolerances.get(k)
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerances.{k}", f"must be positive, got {v!r}")
        lo, hi = self.modes
        if lo < 0 or hi < lo:
            raise ConfigError("modes", f"need 0 <= lo <= hi, got {self.modes!r}")
        if self.gridN < 256:
            raise ConfigError("gridN", f"must be >= 256, got {self.gridN}")
        if self.format not in ("csv", "json"):
            raise ConfigError("output.format", f"must be csv or json, got {self.format!r}")
        if self.eps is not None and not 0 < self.eps < es:
            raise ConfigError("eps", f"must lie in (0, {es:.6g}), got {self.eps!r}")
        if self.T is not None and not self.T > 0:
            raise ConfigError("T", f"must be positive, got {self.T!r}")
        return self


def parse_modes(s) -> tuple:
    if isinstance(s, (list, tuple)):
        lo, hi = (int(s[0]), int(s[-1]))
    elif ".." in str(s):
        a, b = str(s).split("..")
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(s)
    return lo, hi


def config_from_dict(d: dict, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    known = {f for f in RunConfig.__dataclass_fields__}
    for k, v in d.items():
        if k == "eps_grid":
            if not isinstance(v, dict):
                raise ConfigError("eps_grid", "must be an object")
            for gk, gv in v.items():
                if gk not in EpsGrid.__dataclass_fields__:
                    raise ConfigError(f"eps_grid.{gk}", "unknown field")
                setattr(cfg.eps_grid, gk, gv)
        elif k == "tolerances":
            if not isinstance(v, dict):
                raise ConfigError("tolerances", "must be an object")
            for tk, tv in v.items():
                if tk not in ("ode", "newton", "event"):
                    raise ConfigError(f"tolerances.{tk}", "unknown field")
                cfg.tolerances[tk] = tv
        elif k == "modes":
            try:
                cfg.modes = parse_modes(v)
            except (TypeError, ValueError):
                raise ConfigError("modes", f"cannot parse {v!r}") from None
        elif k == "output":
            if isinstance(v, dict):
                cfg.output = v.get("path", cfg.output)
                cfg.format = v.get("format", cfg.format)
            else:
                cfg.output = v
        elif k in known:
            setattr(cfg, k, v)
        else:
            raise ConfigError(k, "unknown field")
    return cfg


def _workers() -> int:
    env = os.environ.get("Q6_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("Q6_THREADS", f"must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _pool_map(fn, items):
    items = list(items)
    k = min(_workers(), len(items)) or 1
    if k == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))


def profile_table(c, orbit, m: int = 1001) -> Table:
    """One period of an orbit: t, v, v1..v5, hamiltonian, residual."""
    t = np.linspace(0.0, orbit.period, m)
    y = orbit.profile.evaluate(t)
    res = ode_residual(c, y, orbit.profile.sixth_derivative(t))
    h = hamiltonian_radial(c, y)
    cols = ["t", "v", "v1", "v2", "v3", "v4", "v5", "hamiltonian", "residual"]
    rows = [tuple(float(x) for x in (t[i], *y[:, i], h[i], res[i])) for i in range(m)]
    return Table(cols, rows)


FAMILY_COLUMNS = ["epsilon", "eps2", "eps4", "period", "hamiltonian", "defect_norm", "newton_iters", "flag"]


def family_table(orbits) -> Table:
    rows = [(o.epsilon, o.eps2, o.eps4, o.period, o.hamiltonian, o.defect_norm, int(o.newton_iters), o.flag)
            for o in orbits]
    return Table(list(FAMILY_COLUMNS), rows)


def _sorted_multipliers(m):
    return sorted(m, key=lambda z: (round(abs(z), 12), round(math.atan2(z.imag, z.real), 12)))


def spectral_row(c, orbit, j: int, gridN: int) -> tuple:
    mono = monodromy(c, orbit, j)
    mult = _sorted_multipliers(mono.multipliers)
    expo = [np.log(complex(z)) / mono.T for z in mult]
    morse, _ = orbit_morse(c, orbit, j, gridN)
    row = [j, float(j * (j + c.n - 2)), mono.det_M]
    for z in mult:
        row += [float(z.real), float(z.imag)]
    for z in expo:
        row += [float(z.real), float(z.imag)]
    row += [int(morse.index), int(morse.near_zero)]
    return tuple(row), mono.flags


SPECTRAL_COLUMNS = (["j", "lambda_j", "det_M"]
                    + [x for k in range(6) for x in (f"mult_re_{k}", f"mult_im_{k}")]
                    + [x for k in range(6) for x in (f"exp_re_{k}", f"exp_im_{k}")]
                    + ["index", "near_zero_count"])

DIAGRAM_COLUMNS = ["epsilon", "period", "hamiltonian", "yamabe", "gap_to_sphere", "index_mode0", "flag"]


def _emit(cfg: RunConfig, table: Table, default_kind: str | None = None):
    if cfg.output:
        if cfg.format == "json":
            from q6.io import atomic_write

            payload = {"meta": table.meta, "columns": table.columns, "rows": [list(r) for r in table.rows]}
            atomic_write(cfg.output, json.dumps(payload, sort_keys=True, indent=1) + "\n")
        else:
            write_csv(cfg.output, table)
    if cfg.plot and default_kind and len(table):
        emit_plot(table, default_kind, cfg.plot)


def _summary(**kw):
    print(json.dumps(kw, sort_keys=True, default=float))


def cmd_constants(cfg, args):
    c = build_constants(cfg.n)
    d = c.as_dict()
    d.update({f"residual_{k}": v for k, v in identity_residuals(c).items()})
    fmt = getattr(args, "emit", "json")
    if fmt == "csv":
        sys.stdout.write(to_csv(Table(["field", "value"], [(k, str(v)) for k, v in d.items()])))
    else:
        print(json.dumps(d, default=str, sort_keys=True, indent=1))
    worst = max(abs(v) for v in identity_residuals(c).values())
    _summary(command="constants", n=cfg.n, max_identity_residual=worst, status="ok")
    return 0


def cmd_delaunay(cfg, args):
    c = build_constants(cfg.n)
    if cfg.eps is None:
        raise ConfigError("eps", "required")
    tol = cfg.tol()
    o = shoot_delaunay(c, cfg.eps, tol=tol)
    tab = profile_table(c, o)
    tab.meta = constants_meta(c, tol) | {"epsilon": o.epsilon, "period": o.period, "flag": o.flag}
    _emit(cfg, tab, "orbit-profile")
    _summary(command="delaunay", n=cfg.n, epsilon=o.epsilon, period=o.period, hamiltonian=o.hamiltonian,
             defect_norm=o.defect_norm, newton_iters=o.newton_iters, flag=o.flag,
             status="partial" if o.flag else "ok")
    return 2 if o.flag else 0


def cmd_sweep(cfg, args):
    c = build_constants(cfg.n)
    tol = cfg.tol()
    fam = continue_family(c, cfg.grid(c.eps_star), tol)
    tab = family_table(fam.orbits)
    tab.meta = constants_meta(c, tol) | {"failures": fam.failures}
    _emit(cfg, tab, "period-vs-epsilon")
    partial = bool(fam.failures) or any(o.flag for o in fam.orbits)
    _summary(command="sweep", n=cfg.n, converged=len(fam.orbits), failures=fam.failures,
             status="partial" if partial else "ok")
    return 2 if partial else 0


def cmd_spectral(cfg, args):
    c = build_constants(cfg.n)
    if cfg.eps is None:
        raise ConfigError("eps", "required")
    tol = cfg.tol()
    o = shoot_delaunay(c, cfg.eps, tol=tol)
    lo, hi = cfg.modes
    got = _pool_map(lambda j: spectral_row(c, o, j, cfg.gridN), range(lo, hi + 1))
    tab = Table(list(SPECTRAL_COLUMNS), [r for r, _ in got])
    flags = {int(r[0]): f for r, f in got if f}
    tab.meta = constants_meta(c, tol) | {"epsilon": o.epsilon, "period": o.period, "flags": flags}
    _emit(cfg, tab, "floquet-spectrum")
    dets = [abs(r[2] - 1.0) for r, _ in got]
    _summary(command="spectral", n=cfg.n, epsilon=o.epsilon, modes=[lo, hi], max_det_error=max(dets),
             flags=flags, status="partial" if flags else "ok")
    return 2 if flags else 0


def cmd_indicial(cfg, args):
    c = build_constants(cfg.n)
    lo, hi = cfg.modes
    rows = []
    for j in range(lo, hi + 1):
        r = cylinder_indicial(c, j)
        z = list(r.roots_z)
        rows.append(tuple([j] + [x for w in z for x in (float(w.real), float(w.imag))]
                          + [float(r.beta_cyl) if r.beta_cyl else float("nan"),
                             float(r.T_cyl) if r.T_cyl else float("nan")]))
    cols = ["j"] + [x for k in range(6) for x in (f"z_re_{k}", f"z_im_{k}")] + ["beta_cyl", "T_cyl"]
    tab = Table(cols, rows, constants_meta(c))
    if cfg.output:
        _emit(cfg, tab)
    else:
        sys.stdout.write(to_csv(tab))
    r0 = cylinder_indicial(c, 0)
    _summary(command="indicial", n=cfg.n, modes=[lo, hi], beta_cyl=r0.beta_cyl, T_cyl=r0.T_cyl,
             rho=[[float(x.real), float(x.imag)] for x in r0.roots_rho], status="ok")
    return 0


def cmd_count(cfg, args):
    c = build_constants(cfg.n)
    if cfg.T is None:
        raise ConfigError("T", "required")
    tol = cfg.tol()
    res = count_solutions(c, cfg.T, tol)
    rows = [(w.kind, int(w.ell), w.period, w.epsilon, w.defect) for w in res.witnesses]
    tab = Table(["kind", "ell", "period", "epsilon", "defect"], rows, constants_meta(c, tol) | {"T": cfg.T})
    _emit(cfg, tab)
    complete = len(res.witnesses) == res.count and not res.failures
    _summary(command="count", n=cfg.n, T=cfg.T, T_cyl=cylinder_indicial(c).T_cyl, count=res.count,
             witnesses=[{"kind": w.kind, "ell": w.ell, "period": w.period, "epsilon": w.epsilon,
                         "defect": w.defect} for w in res.witnesses],
             failures=res.failures, status="ok" if complete else "partial")
    return 0 if complete else 2


def cmd_theorem1(cfg, args):
    c = build_constants(cfg.n)
    tol = cfg.tol()
    fam = continue_family(c, cfg.grid(c.eps_star), tol)
    rows, summary = theorem1_diagnostics(c, fam.orbits, gridN=cfg.gridN)
    tab = Table(list(DIAGRAM_COLUMNS),
                [(r.epsilon, r.period, r.hamiltonian, r.yamabe_quotient, r.gap_to_sphere, int(r.morse_index_mode0),
                  r.flag) for r in rows])
    tab.meta = constants_meta(c, tol) | {"sphere_reference": summary["sphere_reference"], "failures": fam.failures}
    _emit(cfg, tab, "yamabe-vs-epsilon")
    partial = bool(fam.failures) or any(r.flag for r in rows)
    _summary(command="theorem1", n=cfg.n, converged=len(rows), failures=fam.failures, **summary,
             status="partial" if partial else "ok")
    return 2 if partial else 0


def cmd_sphere_check(cfg, args):
    c = build_constants(cfg.n)
    ref = sphere_reference(c)
    res = ref.identity_residual
    ok = abs(res) <= 1e-10
    print(json.dumps({"omega_n": ref.omega_n, "omega_nm1": ref.omega_nm1, "cosh_integral": ref.cosh_integral,
                      "reference": ref.reference, "reference_quadrature": ref.reference_quadrature},
                     sort_keys=True))
    _summary(command="sphere-check", n=cfg.n, identity_residual=res, status="ok" if ok else "failed")
    return 0 if ok else 1


def cmd_plot(cfg, args):
    tab = read_csv(args.table)
    out = args.svg or os.path.splitext(args.table)[0] + ".svg"
    emit_plot(tab, args.kind, out)
    _summary(command="plot", kind=args.kind, path=out, rows=len(tab), status="ok")
    return 0


HANDLERS = {
    "constants": cmd_constants, "delaunay": cmd_delaunay, "sweep": cmd_sweep, "spectral": cmd_spectral,
    "indicial": cmd_indicial, "count": cmd_count, "theorem1": cmd_theorem1, "sphere-check": cmd_sphere_check,
    "plot": cmd_plot,
}


def run(config: RunConfig, command: str, args=None) -> int:
    if command not in HANDLERS:
        raise ValueError(f"unknown command {command!r}")
    config.validate()
    return HANDLERS[command](config, args or argparse.Namespace())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="q6", description="Radial constant Q6-curvature solutions on the cylinder.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--n", type=int, default=10)
        p.add_argument("--config", help="JSON run configuration; its values override flags")
        if out:
            p.add_argument("--out", help="output table path")
            p.add_argument("--format", choices=("csv", "json"), default="csv")
            p.add_argument("--plot", help="also write an SVG plot here")
        return p

    p = common(sub.add_parser("constants", help="dimensional constants and identity residuals"), out=False)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="emit", action="store_const", const="json")
    g.add_argument("--csv", dest="emit", action="store_const", const="csv")
    p.set_defaults(emit="json")

    p = common(sub.add_parser("delaunay", help="one Delaunay orbit of given necksize"))
    p.add_argument("--eps", type=float)

    for name in ("sweep", "theorem1"):
        p = common(sub.add_parser(name, help="necksize sweep" if name == "sweep" else "quotient diagram"))
        p.add_argument("--eps-start", type=float)
        p.add_argument("--eps-stop", type=float)
        p.add_argument("--count", type=int)
        p.add_argument("--spacing", choices=("linear", "geometric"))
        p.add_argument("--relative", action="store_true", help="eps bounds are fractions of eps_star")
        p.add_argument("--gridN", type=int)

    p = common(sub.add_parser("spectral", help="Floquet data and Morse indices per mode"))
    p.add_argument("--eps", type=float)
    p.add_argument("--modes", default="0..3")
    p.add_argument("--gridN", type=int)

    p = common(sub.add_parser("indicial", help="cylinder indicial roots per mode"))
    p.add_argument("--modes", default="0..3")

    p = common(sub.add_parser("count", help="constant-Q metrics on S^1_T x S^{n-1}"))
    p.add_argument("--T", type=float)

    common(sub.add_parser("sphere-check", help="sphere volume identity"), out=False)

    p = sub.add_parser("plot", help="render a written table as SVG")
    p.add_argument("table")
    p.add_argument("--kind", choices=sorted(KINDS), required=True)
    p.add_argument("--svg")
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(n=getattr(args, "n", 10))
    for k in ("eps", "T", "gridN", "plot", "format"):
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    if getattr(args, "out", None):
        cfg.output = args.out
    if getattr(args, "modes", None) is not None:
        try:
            cfg.modes = parse_modes(args.modes)
        except ValueError:
            raise ConfigError("modes", f"cannot parse {args.modes!r}") from None
    if getattr(args, "eps_start", None) is not None:
        cfg.eps_grid.start = args.eps_start
    if getattr(args, "eps_stop", None) is not None:
        cfg.eps_grid.stop = args.eps_stop
    if getattr(args, "count", None) is not None:
        cfg.eps_grid.count = args.count
    if getattr(args, "spacing", None):
        cfg.eps_grid.spacing = args.spacing
    cfg.eps_grid.relative = bool(getattr(args, "relative", False))
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = config_from_dict(json.load(fh), cfg)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig() if args.command == "plot" else config_from_args(args)
        if args.command == "plot":
            return cmd_plot(cfg, args)
        return run(cfg, args.command, args)
    except ConfigError as exc:
        print(f"q6: configuration error: {exc}", file=sys.stderr)
        _summary(command=args.command, status="error", field=exc.field, error=str(exc))
        return 1
    except Exception as exc:  # noqa: BLE001 - report every failure as exit 1
        log.debug("failure", exc_info=True)
        print(f"q6: {type(exc).__name__}: {exc}", file=sys.stderr)
        _summary(command=args.command, status="error", error=f"{type(exc).__name__}: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

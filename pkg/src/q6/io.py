"""Flat-file tables: CSV with ``#`` metadata lines, fixed float formatting,
atomic writes and a field-for-field round-trip reader."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from q6.constants import DimensionalConstants, identity_residuals

FLOAT_FMT = "{:.17g}"


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} fields, expected {len(self.columns)}")
            if any(isinstance(v, str) and "\x00" in v for v in r):
                raise ValueError("NUL characters cannot be stored in CSV fields")

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def types(self) -> list:
        out = []
        for k in range(len(self.columns)):
            vals = [r[k] for r in self.rows]
            if vals and all(isinstance(v, (bool, np.bool_)) for v in vals):
                out.append("bool")
            elif vals and all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in vals):
                out.append("int")
            elif all(isinstance(v, (int, float, np.integer, np.floating)) for v in vals):
                out.append("float")
            else:
                out.append("str")
        return out


def _fmt(v, kind):
    if kind == "float":
        return FLOAT_FMT.format(float(v))
    if kind == "int":
        return str(int(v))
    if kind == "bool":
        return "1" if v else "0"
    return str(v)


def _parse(s, kind):
    if kind == "float":
        return float(s)
    if kind == "int":
        return int(s)
    if kind == "bool":
        return s == "1"
    return s


def constants_meta(c: DimensionalConstants, tol=None) -> dict:
    """Metadata carried by every table: n, tolerances and identity residuals."""
    meta = {"n": c.n}
    if tol is not None:
        meta["tolerances"] = {"ode": tol.ode, "newton": tol.newton, "event": tol.event}
    meta["identity_residuals"] = {k: float(v) for k, v in identity_residuals(c).items()}
    return meta


def _quote(s: str) -> str:
    # csv.writer leaves a bare \r unquoted when the terminator is \n
    if any(ch in s for ch in ',"\r\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def _join(fields) -> str:
    if len(fields) == 1 and fields[0] == "":
        return '""\n'
    return ",".join(_quote(f) for f in fields) + "\n"


def to_csv(table: Table) -> str:
    kinds = table.types()
    buf = io.StringIO()
    for k in sorted(table.meta):
        buf.write(f"# {k}={json.dumps(table.meta[k], sort_keys=True)}\n")
    buf.write(f"# types={json.dumps(kinds)}\n")
    buf.write(_join(table.columns))
    for r in table.rows:
        buf.write(_join([_fmt(v, t) for v, t in zip(r, kinds)]))
    return buf.getvalue()


def from_csv(text: str) -> Table:
    meta, kinds = {}, None
    pos = 0
    # metadata only in the leading block, so quoted fields may hold anything
    while text.startswith("#", pos):
        end = text.find("\n", pos)
        end = len(text) if end < 0 else end
        key, _, val = text[pos + 1:end].strip().partition("=")
        if key == "types":
            kinds = json.loads(val)
        else:
            meta[key] = json.loads(val)
        pos = end + 1
    rows = list(csv.reader(io.StringIO(text[pos:], newline="")))
    if not rows:
        raise ValueError("CSV has no header row")
    cols, data = rows[0], rows[1:]
    kinds = kinds or ["str"] * len(cols)
    return Table(cols, [tuple(_parse(s, t) for s, t in zip(r, kinds)) for r in data], meta)


def atomic_write(path, text: str | bytes) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    mode = "wb" if isinstance(text, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, table: Table) -> None:
    atomic_write(path, to_csv(table))


def read_csv(path) -> Table:
    with open(path, newline="") as fh:
        return from_csv(fh.read())


def tables_equal(a: Table, b: Table) -> bool:
    if a.columns != b.columns or len(a.rows) != len(b.rows):
        return False
    for ra, rb in zip(a.rows, b.rows):
        for x, y in zip(ra, rb):
            if isinstance(x, float) and isinstance(y, float) and np.isnan(x) and np.isnan(y):
                continue
            if x != y:
                return False
    return True

"""On-disk formats shared by the command-line tools.

Ensembles are CSV: a header of integer series ids, then one row per time
step. Bundles of output files are written only after all of their content
has been produced, so a failing command leaves nothing behind.
"""
from __future__ import annotations

import csv
import io
import os
from pathlib import Path

import numpy as np

from .errors import ParseError
from .series import Ensemble

__all__ = ["ensemble_to_csv", "parse_ensemble_csv", "read_ensemble_csv", "write_bundle"]


def ensemble_to_csv(ens: Ensemble) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ens.ids)
    for row in ens.values:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def parse_ensemble_csv(text: str) -> Ensemble:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty ensemble file")
    try:
        ids = tuple(int(c) for c in rows[0])
    except ValueError:
        raise ParseError("header must list integer series ids", row=1) from None
    n = len(ids)
    if n < 2:
        raise ParseError(f"need at least 2 columns, found {n}", row=1)
    values = np.empty((len(rows) - 1, n))
    for r, row in enumerate(rows[1:]):
        if len(row) != n:
            raise ParseError(f"expected {n} values, found {len(row)}", row=r + 2)
        for c, cell in enumerate(row):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", row=r + 2, column=c + 1) from None
            if not np.isfinite(values[r, c]):
                raise ParseError(f"non-finite value {cell!r}", row=r + 2, column=c + 1)
    return Ensemble(values, ids)


def read_ensemble_csv(path) -> Ensemble:
    return parse_ensemble_csv(Path(path).read_text())


def write_bundle(out_dir, files: dict[str, str]) -> list[Path]:
    """Write ``name -> text`` into ``out_dir``; on failure remove what was written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    staged: list[tuple[Path, Path]] = []
    try:
        for name, text in files.items():
            final = out / name
            tmp = out / f".{name}.tmp"
            tmp.write_text(text)
            staged.append((tmp, final))
        for tmp, final in staged:
            os.replace(tmp, final)
    except OSError:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise
    return [final for _, final in staged]

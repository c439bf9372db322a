"""CSV/JSON writers and readers for every artifact the CLI produces.

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back gives bit-identical values.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

TRAJECTORY_HEADER = ["t", "i", "Ptilde_x", "Ptilde_y", "P_x", "P_y", "H_tot", "centroid_x", "centroid_y"]
DIAGNOSTICS_HEADER = ["t", "i", "Bx", "By", "J", "mass_out_R1", "mass_out_R2", "E_self", "G_conc", "track_err"]
PAIRS_HEADER = ["t", "i", "j", "E_pair"]
PARTICLES_HEADER = ["t", "component", "x1", "x2", "weight"]
PORTRAIT_HEADER = ["level", "C_E", "branch", "x1", "x2"]
SWEEP_HEADER = ["epsilon", "t", "i", "track_err"]
SWEEP_SUMMARY_HEADER = ["epsilon", "max_track_err", "status"]

_INT_COLUMNS = {"i", "j", "component", "level", "branch"}


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_rows(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_table(path) -> dict:
    """Read a CSV written by :func:`write_rows` into a dict of column arrays.

    Empty cells become NaN; integer columns come back as ``int64``; text
    columns stay as lists of strings.
    """
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        cols = {h: [] for h in header}
        for row in r:
            for h, v in zip(header, row):
                cols[h].append(v)
    out = {}
    for h, vals in cols.items():
        if h in _INT_COLUMNS:
            out[h] = np.array([int(v) for v in vals], dtype=np.int64)
            continue
        try:
            out[h] = np.array([float(v) if v != "" else math.nan for v in vals])
        except ValueError:
            out[h] = vals
    return out


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


# ---------------------------------------------------------------------------
# artifact-specific rows

def trajectory_rows(times, p_tilde, p_phys, h_tot, centroid):
    for k, t in enumerate(times):
        for i in range(p_tilde.shape[1]):
            yield (t, i + 1, p_tilde[k, i, 0], p_tilde[k, i, 1], p_phys[k, i, 0], p_phys[k, i, 1],
                   h_tot[k], centroid[k, 0], centroid[k, 1])


def diagnostics_rows(records):
    for rec in records:
        for i in range(rec.centers.shape[0]):
            te = None if rec.tracking_error is None else rec.tracking_error[i]
            yield (rec.t, i + 1, rec.centers[i, 0], rec.centers[i, 1], rec.moments[i],
                   rec.mass_out[i, 0], rec.mass_out[i, 1], rec.self_energy[i],
                   rec.concentration[i], te)


def pair_rows(records):
    for rec in records:
        n = rec.centers.shape[0]
        for i in range(n):
            for j in range(i):
                yield (rec.t, i + 1, j + 1, rec.pair_energy[i, j])


def particle_rows(t, pf_positions, weights, component):
    for p in range(pf_positions.shape[0]):
        yield (t, int(component[p]) + 1, pf_positions[p, 0], pf_positions[p, 1], weights[p])

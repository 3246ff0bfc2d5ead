"""Plain-text writers: diagnostics CSV, per-element nodal CSV and legacy-VTK dumps."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dgspace import FieldCoefficients

DIAGNOSTIC_COLUMNS = ("step", "time", "mass", "F_total", "F_kinetic", "F_chemical",
                      "F_interfacial", "mu_dg", "v_dg", "newton_iters")

_REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
VTK_TRIANGLE = 5


def vertex_samples(f: FieldCoefficients) -> np.ndarray:
    """Values of ``f`` at the three vertices of every element: (K, 3) or (K, 3, 2)."""
    sp = f.space.scalar if f.is_vector else f.space
    phi = sp.ref.values(_REF_VERTICES)  # (3, nb)
    scale = 1.0 / np.sqrt(sp.geo.detJ)[:, None]
    comps = f.space.components(f.coeffs) if f.is_vector else [f.coeffs]
    vals = [scale * (sp.block(c) @ phi.T) for c in comps]
    return np.stack(vals, axis=-1) if f.is_vector else vals[0]


class DiagnosticsWriter:
    """Streams one CSV row per recorded time step."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh)
        self._w.writerow(DIAGNOSTIC_COLUMNS)

    def write(self, state) -> None:
        d = state.diagnostics
        row = [state.n, repr(float(state.t))]
        row += [repr(float(d[k])) for k in DIAGNOSTIC_COLUMNS[2:-1]]
        row.append(int(d.get("newton_iters", 0)))
        self._w.writerow(row)
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_fields_csv(path, mesh, fields: dict[str, FieldCoefficients]) -> None:
    """One row per (element, local vertex) with coordinates and field samples."""
    samples = {k: vertex_samples(f) for k, f in fields.items()}
    header = ["element", "local_vertex", "x", "y"]
    for k, s in samples.items():
        header += [f"{k}_x", f"{k}_y"] if s.ndim == 3 else [k]
    coords = mesh.vertices[mesh.elements]  # (K, 3, 2)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(mesh.n_elements):
            for j in range(3):
                row = [k, j, repr(float(coords[k, j, 0])), repr(float(coords[k, j, 1]))]
                for s in samples.values():
                    row += [repr(float(x)) for x in np.atleast_1d(s[k, j])]
                w.writerow(row)


def write_vtk(path, mesh, fields: dict[str, FieldCoefficients], title: str = "chnsdg") -> None:
    """Legacy ASCII unstructured grid with vertices duplicated per element, so
    discontinuous fields are represented exactly at the nodes."""
    K = mesh.n_elements
    pts = mesh.vertices[mesh.elements].reshape(-1, 2)
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {3 * K} double"]
    lines += [f"{x!r} {y!r} 0.0" for x, y in pts.tolist()]
    lines.append(f"CELLS {K} {4 * K}")
    lines += [f"3 {3 * k} {3 * k + 1} {3 * k + 2}" for k in range(K)]
    lines.append(f"CELL_TYPES {K}")
    lines += [str(VTK_TRIANGLE)] * K
    lines.append(f"POINT_DATA {3 * K}")
    for name, f in fields.items():
        s = vertex_samples(f)
        if s.ndim == 3:
            lines.append(f"VECTORS {name} double")
            lines += [f"{a!r} {b!r} 0.0" for a, b in s.reshape(-1, 2).tolist()]
        else:
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines += [repr(a) for a in s.ravel().tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")

"""Conforming triangular meshes with oriented face connectivity."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    """Raised for malformed mesh files or invalid mesh topology."""


@dataclass(frozen=True)
class Mesh:
    """Immutable 2D simplicial mesh.

    Interior face ``f`` joins ``interior_elements[f] = (k_minus, k_plus)`` with
    ``k_minus < k_plus``; ``interior_normals[f]`` points from ``k_minus`` into
    ``k_plus``.  Boundary normals point out of the domain.
    """

    vertices: np.ndarray
    elements: np.ndarray
    interior_elements: np.ndarray
    interior_vertices: np.ndarray
    interior_normals: np.ndarray
    interior_h: np.ndarray
    boundary_elements: np.ndarray
    boundary_vertices: np.ndarray
    boundary_normals: np.ndarray
    boundary_h: np.ndarray
    areas: np.ndarray = field(repr=False)
    diameters: np.ndarray = field(repr=False)
    inradii: np.ndarray = field(repr=False)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_interior_faces(self) -> int:
        return len(self.interior_elements)

    @property
    def n_boundary_faces(self) -> int:
        return len(self.boundary_elements)

    @property
    def h_max(self) -> float:
        return float(self.diameters.max())

    @property
    def shape_ratio(self) -> float:
        """Largest diameter / inradius over all elements."""
        return float(np.max(self.diameters / self.inradii))

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    def n_edges(self) -> int:
        return self.n_interior_faces + self.n_boundary_faces

    def element_coords(self, k=None) -> np.ndarray:
        if k is None:
            return self.vertices[self.elements]
        return self.vertices[self.elements[k]]


def _signed_areas(vertices, elements):
    p = vertices[elements]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def build_mesh(vertices, elements, max_shape_ratio: float = 1e3) -> Mesh:
    """Validate ``(vertices, elements)`` and derive face connectivity.

    Clockwise elements are reoriented.  Raises :class:`MeshError` for
    degenerate, repeated or nonconforming elements.
    """
    vertices = np.ascontiguousarray(vertices, dtype=float)
    elements = np.array(elements, dtype=np.int64).reshape(-1, 3)
    if vertices.ndim != 2 or vertices.shape[1] != 2:
        raise MeshError("vertices must be an (N, 2) array")
    if len(elements) == 0:
        raise MeshError("mesh has no elements")
    if elements.min() < 0 or elements.max() >= len(vertices):
        raise MeshError("element references a vertex index out of range")
    if np.any(np.sort(elements, axis=1)[:, 1:] == np.sort(elements, axis=1)[:, :-1]):
        raise MeshError("element with repeated vertex")
    keys = np.sort(elements, axis=1)
    if len(np.unique(keys, axis=0)) != len(keys):
        raise MeshError("repeated element")

    area = _signed_areas(vertices, elements)
    scale = np.ptp(vertices, axis=0).max() if len(vertices) > 1 else 1.0
    if np.any(np.abs(area) <= 1e-14 * scale**2):
        raise MeshError("degenerate (zero-area) element")
    flip = area < 0
    elements[flip] = elements[flip][:, [0, 2, 1]]
    area = np.abs(area)

    # local edge j is opposite local vertex j
    local = np.array([[1, 2], [2, 0], [0, 1]])
    edges = elements[:, local].reshape(-1, 2)
    owner = np.repeat(np.arange(len(elements)), 3)
    ekeys = np.sort(edges, axis=1)
    uniq, inverse, counts = np.unique(ekeys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        raise MeshError("edge shared by more than two elements")

    order = np.argsort(inverse, kind="stable")
    sorted_inv = inverse[order]
    starts = np.searchsorted(sorted_inv, np.arange(len(uniq)))
    interior_ids = np.flatnonzero(counts == 2)
    boundary_ids = np.flatnonzero(counts == 1)

    first = order[starts[interior_ids]]
    second = order[starts[interior_ids] + 1]
    km = owner[first]
    kp = owner[second]
    swap = km > kp
    km, kp = np.where(swap, kp, km), np.where(swap, km, kp)
    # vertex pair taken in the counterclockwise order of the minus element
    minus_local = np.where(swap, second, first)
    iverts = edges[minus_local]
    bslot = order[starts[boundary_ids]]
    bverts = edges[bslot]
    belem = owner[bslot]

    def outward(pairs):
        t = vertices[pairs[:, 1]] - vertices[pairs[:, 0]]
        length = np.hypot(t[:, 0], t[:, 1])
        # counterclockwise traversal: outward normal is the tangent rotated clockwise
        n = np.stack([t[:, 1], -t[:, 0]], axis=1) / length[:, None]
        return n, length

    inorm, ih = outward(iverts)
    bnorm, bh = outward(bverts)

    _check_hanging_nodes(vertices, elements, bverts)

    p = vertices[elements]
    lengths = np.stack(
        [np.hypot(*(p[:, b] - p[:, a]).T) for a, b in local], axis=1
    )
    diam = lengths.max(axis=1)
    inradius = 2.0 * area / lengths.sum(axis=1)
    if np.max(diam / inradius) > max_shape_ratio:
        raise MeshError(
            f"shape-regularity ratio {np.max(diam / inradius):.3g} exceeds {max_shape_ratio}"
        )

    return Mesh(
        vertices=vertices,
        elements=elements,
        interior_elements=np.stack([km, kp], axis=1),
        interior_vertices=iverts,
        interior_normals=inorm,
        interior_h=ih,
        boundary_elements=belem,
        boundary_vertices=bverts,
        boundary_normals=bnorm,
        boundary_h=bh,
        areas=area,
        diameters=diam,
        inradii=inradius,
    )


def _check_hanging_nodes(vertices, elements, bverts):
    used = np.unique(elements)
    a = vertices[bverts[:, 0]]
    b = vertices[bverts[:, 1]]
    t = b - a
    L2 = np.einsum("ij,ij->i", t, t)
    for v in used:
        x = vertices[v]
        d = x - a
        s = np.einsum("ij,ij->i", d, t) / L2
        cross = np.abs(d[:, 0] * t[:, 1] - d[:, 1] * t[:, 0]) / np.sqrt(L2)
        inside = (s > 1e-12) & (s < 1 - 1e-12) & (cross < 1e-12 * np.sqrt(L2))
        if np.any(inside):
            raise MeshError(f"nonconforming mesh: hanging node at vertex {v}")


def structured_unit_square(n: int) -> Mesh:
    """Uniform ``n x n`` grid of [0, 1]^2, each cell cut along its diagonal."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.stack([X.ravel(), Y.ravel()], axis=1)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    v00 = (j * (n + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    lower = np.stack([v00, v10, v11], axis=1)
    upper = np.stack([v00, v11, v01], axis=1)
    elements = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return build_mesh(vertices, elements)


def load_mesh(path) -> Mesh:
    """Read the plain-text format written by :func:`save_mesh`."""
    text = Path(path).read_text(encoding="utf-8").split("\n")
    lines = [ln.split() for ln in text if ln.strip()]
    try:
        pos = 0
        if lines[pos][0] != "vertices" or len(lines[pos]) != 2:
            raise MeshError("expected header 'vertices N'")
        nv = int(lines[pos][1])
        vertices = np.array([[float(t) for t in ln] for ln in lines[pos + 1 : pos + 1 + nv]])
        pos += 1 + nv
        if lines[pos][0] != "elements" or len(lines[pos]) != 2:
            raise MeshError("expected header 'elements M'")
        ne = int(lines[pos][1])
        rows = lines[pos + 1 : pos + 1 + ne]
        if any(len(r) != 3 for r in rows) or any(len(r) != 2 for r in lines[1 : 1 + nv]):
            raise MeshError("wrong number of entries on a vertex or element line")
        elements = np.array([[int(t) for t in ln] for ln in rows], dtype=np.int64)
        if len(vertices) != nv or len(elements) != ne or len(lines) != pos + 1 + ne:
            raise MeshError("counts in headers do not match file contents")
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"cannot parse mesh file {path}: {exc}") from exc
    return build_mesh(vertices, elements)


def save_mesh(mesh: Mesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"vertices {len(mesh.vertices)}\n")
        for x, y in mesh.vertices.tolist():
            fh.write(f"{x!r} {y!r}\n")
        fh.write(f"elements {mesh.n_elements}\n")
        for i, j, k in mesh.elements.tolist():
            fh.write(f"{i} {j} {k}\n")

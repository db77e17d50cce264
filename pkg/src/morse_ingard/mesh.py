"""Conforming triangulations with tagged boundary segments.

Meshes are immutable after construction and validated on creation. Boundary
edges carry one of two tags: ``"Air"`` for the truncation boundary (where the
transmission condition acts on pressure) and ``"Wall"`` for the tuning-fork
surface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AIR = "Air"
WALL = "Wall"
TAGS = (AIR, WALL)


class MeshError(ValueError):
    """Raised for invalid mesh input or a mesh that violates conformity."""


class Mesh:
    """P1 triangulation.

    Parameters
    ----------
    vertices : (nv, 2) array_like
    triangles : (nt, 3) array_like of int
        Counter-clockwise vertex triples.
    boundary_edges : (nb, 2) array_like of int
    boundary_tags : sequence of str
        One tag per boundary edge.
    """

    def __init__(self, vertices, triangles, boundary_edges, boundary_tags, validate=True):
        self.vertices = np.ascontiguousarray(vertices, dtype=float).reshape(-1, 2)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64).reshape(-1, 3)
        self.edges_b = np.ascontiguousarray(boundary_edges, dtype=np.int64).reshape(-1, 2)
        self.tags_b = np.asarray(list(boundary_tags), dtype=object)
        for a in (self.vertices, self.triangles, self.edges_b):
            a.setflags(write=False)
        if validate:
            self.validate()

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def boundary_edges(self):
        """List of ``(v0, v1, tag)`` triples."""
        return [(int(a), int(b), str(t)) for (a, b), t in zip(self.edges_b, self.tags_b)]

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edges(self):
        """Unique undirected edges and, per triangle, indices into them.

        Returns
        -------
        edges : (ne, 2) int array, each row sorted ascending
        tri_edges : (nt, 3) int array; column k indexes edge (t[k], t[(k+1) % 3])
        counts : (ne,) number of triangles sharing each edge
        """
        t = self.triangles
        e = np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1).reshape(-1, 2)
        e = np.sort(e, axis=1)
        edges, inv, counts = np.unique(e, axis=0, return_inverse=True, return_counts=True)
        return edges, inv.reshape(-1, 3), counts

    def tagged_edges(self, tag: str) -> np.ndarray:
        return self.edges_b[self.tags_b == tag]

    def validate(self):
        """Check index range, orientation, conformity and boundary closure."""
        nv = self.num_vertices
        if self.num_triangles == 0:
            raise MeshError("mesh has no triangles")
        for arr, what in ((self.triangles, "triangle"), (self.edges_b, "boundary edge")):
            if arr.size and (arr.min() < 0 or arr.max() >= nv):
                raise MeshError(f"{what} vertex index out of range")
        if len(self.tags_b) != self.edges_b.shape[0]:
            raise MeshError("one tag per boundary edge required")
        bad = [t for t in set(self.tags_b.tolist()) if t not in TAGS]
        if bad:
            raise MeshError(f"unknown boundary tags {bad}")
        if np.any(self.signed_areas() <= 0.0):
            raise MeshError("triangles must have positive area (counter-clockwise)")
        edges, _, counts = self.edges()
        p = self.vertices
        if np.any(np.linalg.norm(p[edges[:, 0]] - p[edges[:, 1]], axis=1) == 0.0):
            raise MeshError("zero-length edge")
        if np.any(counts > 2):
            raise MeshError("non-conforming triangulation: edge shared by more than two triangles")
        topo = {tuple(e) for e in edges[counts == 1].tolist()}
        given = [tuple(sorted(e)) for e in self.edges_b.tolist()]
        if len(set(given)) != len(given):
            raise MeshError("duplicate boundary edge")
        if set(given) != topo:
            raise MeshError("tagged boundary edges differ from the topological boundary")

    def __repr__(self):
        return f"Mesh({self.num_vertices} vertices, {self.num_triangles} triangles)"


def _boundary_from_topology(vertices, triangles, tag_fn) -> Mesh:
    m = Mesh(vertices, triangles, np.zeros((0, 2), np.int64), [], validate=False)
    edges, _, counts = m.edges()
    bnd = edges[counts == 1]
    tags = [tag_fn(vertices[a], vertices[b]) for a, b in bnd]
    return Mesh(vertices, triangles, bnd, tags)


def _grid(nx, ny, x0, y0, h):
    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1))
    verts = np.column_stack([x0 + h * ii.ravel(), y0 + h * jj.ravel()])
    ci, cj = np.meshgrid(np.arange(nx), np.arange(ny))
    ci, cj = ci.ravel(), cj.ravel()
    v00 = cj * (nx + 1) + ci
    v10 = v00 + 1
    v01 = v00 + nx + 1
    v11 = v01 + 1
    # both triangles of a cell share the v00-v11 diagonal
    tris = np.empty((2 * ci.size, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([v00, v10, v11])
    tris[1::2] = np.column_stack([v00, v11, v01])
    return verts, tris, ci, cj


def unit_square(n: int, boundary_tag: str = WALL) -> Mesh:
    """Structured right-triangle mesh of [0, 1]^2 with ``n`` cells per side."""
    if n < 1:
        raise MeshError("n must be at least 1")
    if boundary_tag not in TAGS:
        raise MeshError(f"unknown tag {boundary_tag!r}")
    verts, tris, _, _ = _grid(n, n, 0.0, 0.0, 1.0 / n)
    # exact coordinates, so refinement comparisons are bitwise
    verts = np.column_stack([np.tile(np.arange(n + 1), n + 1) / n,
                             np.repeat(np.arange(n + 1), n + 1) / n])
    return _boundary_from_topology(verts, tris, lambda a, b: boundary_tag)


@dataclass(frozen=True)
class ForkGeometry:
    """U-shaped tuning fork inside a rectangular air box (nondimensional).

    The fork is centred horizontally; ``offset`` is the distance from the
    bottom of the box to the bottom of the fork base.
    """

    outer_width: float = 4.0
    outer_height: float = 6.5
    tine_width: float = 0.5
    tine_length: float = 3.0
    gap_width: float = 1.0
    base_height: float = 0.5
    offset: float = 1.0

    @property
    def fork_width(self) -> float:
        return 2.0 * self.tine_width + self.gap_width

    @property
    def left(self) -> float:
        return 0.5 * (self.outer_width - self.fork_width)

    def rectangles(self):
        """Base, left tine, right tine as ``(x0, x1, y0, y1)``."""
        x0, y0 = self.left, self.offset
        yb = y0 + self.base_height
        yt = yb + self.tine_length
        return [
            (x0, x0 + self.fork_width, y0, yb),
            (x0, x0 + self.tine_width, yb, yt),
            (x0 + self.tine_width + self.gap_width, x0 + self.fork_width, yb, yt),
        ]

    def fork_area(self) -> float:
        return sum((x1 - x0) * (y1 - y0) for x0, x1, y0, y1 in self.rectangles())

    def gap_center(self):
        """Midpoint of the gap between the tines."""
        x = self.left + self.tine_width + 0.5 * self.gap_width
        y = self.offset + self.base_height + 0.5 * self.tine_length
        return x, y

    def check(self, h: float):
        dims = (self.outer_width, self.outer_height, self.tine_width, self.tine_length,
                self.gap_width, self.base_height, self.offset)
        if h <= 0 or any(not d > 0 for d in dims):
            raise MeshError("fork dimensions and grid spacing must be positive")
        top = self.offset + self.base_height + self.tine_length
        if not (self.left > 0 and top < self.outer_height):
            raise MeshError("fork must lie strictly inside the outer rectangle")
        for v in dims + (self.left,):
            k = v / h
            if abs(k - round(k)) > 1e-9 * max(1.0, abs(k)):
                raise MeshError(f"geometry value {v} is not a multiple of h={h}")


def fork_domain(g: ForkGeometry = ForkGeometry(), h: float = 0.25) -> Mesh:
    """Structured mesh of the box with the fork cells removed.

    The outer rectangle is tagged Air and the fork outline Wall.
    """
    g.check(h)
    nx = round(g.outer_width / h)
    ny = round(g.outer_height / h)
    verts, tris, ci, cj = _grid(nx, ny, 0.0, 0.0, h)
    # integer-lattice coordinates avoid round-off in the cell test
    ix = (ci + 0.5) * h
    iy = (cj + 0.5) * h
    inside = np.zeros(ci.size, dtype=bool)
    for x0, x1, y0, y1 in g.rectangles():
        inside |= (ix > x0) & (ix < x1) & (iy > y0) & (iy < y1)
    keep = np.repeat(~inside, 2)
    tris = tris[keep]
    used = np.unique(tris)
    renum = np.full(verts.shape[0], -1, dtype=np.int64)
    renum[used] = np.arange(used.size)
    verts = verts[used]
    tris = renum[tris]
    W, H = g.outer_width, g.outer_height
    tol = 1e-9 * h

    def tag(a, b):
        for k, lim in ((0, 0.0), (0, W), (1, 0.0), (1, H)):
            if abs(a[k] - lim) < tol and abs(b[k] - lim) < tol:
                return AIR
        return WALL

    return _boundary_from_topology(verts, tris, tag)


def refine(m: Mesh) -> Mesh:
    """Uniform quadrisection through edge midpoints.

    New vertices are appended after the old ones in sorted-edge order.
    """
    edges, tri_edges, _ = m.edges()
    nv = m.num_vertices
    mid = 0.5 * (m.vertices[edges[:, 0]] + m.vertices[edges[:, 1]])
    verts = np.vstack([m.vertices, mid])
    a, b, c = m.triangles.T
    mab, mbc, mca = (nv + tri_edges[:, k] for k in range(3))
    tris = np.empty((4 * m.num_triangles, 3), dtype=np.int64)
    tris[0::4] = np.column_stack([a, mab, mca])
    tris[1::4] = np.column_stack([mab, b, mbc])
    tris[2::4] = np.column_stack([mca, mbc, c])
    tris[3::4] = np.column_stack([mab, mbc, mca])
    # map each boundary edge to its midpoint vertex
    lookup = {tuple(e): nv + k for k, e in enumerate(edges.tolist())}
    bedges, btags = [], []
    for (u, v), t in zip(m.edges_b.tolist(), m.tags_b):
        w = lookup[(min(u, v), max(u, v))]
        bedges += [(u, w), (w, v)]
        btags += [t, t]
    return Mesh(verts, tris, bedges, btags)


def mesh_stats(m: Mesh):
    """``(num_vertices, num_triangles, h_max)`` with h_max the longest edge."""
    edges, _, _ = m.edges()
    d = m.vertices[edges[:, 0]] - m.vertices[edges[:, 1]]
    return m.num_vertices, m.num_triangles, float(np.sqrt((d * d).sum(axis=1)).max())


def _sections(text: str):
    lines = text.splitlines()
    i = 0
    out = {}
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("$") and not line.startswith("$End"):
            name = line[1:]
            end = "$End" + name
            j = i + 1
            while j < len(lines) and lines[j].strip() != end:
                j += 1
            if j == len(lines):
                raise MeshError(f"unterminated section ${name}")
            out[name] = [l.split() for l in lines[i + 1:j] if l.strip()]
            i = j
        i += 1
    return out


def read_gmsh(text: str, tag_map) -> Mesh:
    """Parse an MSH 2.2 ASCII file.

    Parameters
    ----------
    text : str
        File contents.
    tag_map : mapping
        Physical group id (int) to boundary tag (``"Air"`` or ``"Wall"``) for
        every 2-node line element in the file.

    Triangles are reoriented counter-clockwise; nodes not used by any
    triangle are dropped.
    """
    sec = _sections(text)
    fmt = sec.get("MeshFormat")
    if not fmt:
        raise MeshError("missing $MeshFormat")
    version, ftype = fmt[0][0], fmt[0][1]
    if version.split(".")[:2] != ["2", "2"] or ftype != "0":
        raise MeshError(f"unsupported MSH version {version} (file-type {ftype}); need 2.2 ASCII")
    if "Nodes" not in sec or "Elements" not in sec:
        raise MeshError("missing $Nodes or $Elements")
    nodes = sec["Nodes"]
    count = int(nodes[0][0])
    ids = np.array([int(r[0]) for r in nodes[1:count + 1]])
    xy = np.array([[float(r[1]), float(r[2])] for r in nodes[1:count + 1]])
    index = {nid: k for k, nid in enumerate(ids.tolist())}

    tris, lines, line_tags = [], [], []
    elems = sec["Elements"]
    for r in elems[1:int(elems[0][0]) + 1]:
        etype, ntags = int(r[1]), int(r[2])
        conn = [index[int(v)] for v in r[3 + ntags:]]
        phys = int(r[3]) if ntags > 0 else 0
        if etype == 2:
            tris.append(conn[:3])
        elif etype == 1:
            if phys not in tag_map:
                raise MeshError(f"physical id {phys} has no boundary tag")
            lines.append(conn[:2])
            line_tags.append(tag_map[phys])
    if not tris:
        raise MeshError("no triangles in file")
    tris = np.array(tris, dtype=np.int64)
    lines = np.array(lines, dtype=np.int64).reshape(-1, 2)
    used = np.unique(tris)
    renum = np.full(xy.shape[0], -1, dtype=np.int64)
    renum[used] = np.arange(used.size)
    tris, xy = renum[tris], xy[used]
    lines = renum[lines]
    if lines.size and lines.min() < 0:
        raise MeshError("boundary line references a node outside the triangulation")
    p = xy[tris]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    cw = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
    tris[cw] = tris[cw][:, [0, 2, 1]]
    return Mesh(xy, tris, lines, line_tags)


def fork_counts(g: ForkGeometry, h: float):
    """Closed-form (vertices, triangles) of :func:`fork_domain`."""
    k = lambda v: round(v / h)
    nx, ny = k(g.outer_width), k(g.outer_height)
    tw, tl, bh, fw = k(g.tine_width), k(g.tine_length), k(g.base_height), k(g.fork_width)
    cells = fw * bh + 2 * tw * tl
    interior = (fw - 1) * (bh - 1) + 2 * (tw - 1) * (tl - 1) + 2 * (tw - 1)
    return (nx + 1) * (ny + 1) - interior, 2 * (nx * ny - cells)

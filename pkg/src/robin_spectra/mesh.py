"""Triangulated planar domains.

Meshes are immutable: perturbation and scaling return new objects. Quadrature
rules used throughout the package live here:

* volume: 3-point edge-midpoint rule per triangle (exact for quadratics),
* boundary: 2-point Gauss-Legendre per boundary edge.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.spatial import Delaunay

# barycentric coordinates of the edge midpoints (edges 01, 12, 20)
MIDPOINT_BARY = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
GAUSS2 = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])

MAX_VERTICES = 2_000_000


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    """P1 triangulation of a planar domain.

    ``boundary_edges`` are oriented so that the domain lies to their left
    (counterclockwise on outer loops). ``analytic_boundary`` optionally
    describes the exact curve the boundary vertices lie on.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    analytic_boundary: dict | None = None

    def __post_init__(self):
        verts = np.ascontiguousarray(self.vertices, dtype=np.float64)
        tris = np.ascontiguousarray(self.triangles, dtype=np.int64)
        edges = np.ascontiguousarray(self.boundary_edges, dtype=np.int64)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise MeshError("vertices must have shape (n, 2)")
        if tris.ndim != 2 or tris.shape[1] != 3 or edges.ndim != 2 or edges.shape[1] != 2:
            raise MeshError("triangles must be (m, 3) and boundary edges (k, 2)")
        if not np.all(np.isfinite(verts)):
            raise MeshError("non-finite vertex coordinates")
        for arr in (verts, tris, edges):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "boundary_edges", edges)
        if np.any(self.signed_areas <= 0.0):
            raise MeshError("inverted or degenerate triangle")

    # --- basic geometry -------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @cached_property
    def signed_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, i]] for i in range(3))
        e1, e2 = b - a, c - a
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def areas(self) -> np.ndarray:
        return self.signed_areas

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    @cached_property
    def basis_grads(self) -> np.ndarray:
        """Constant gradients of the three hat functions on every triangle, (m, 3, 2)."""
        x = self.vertices[self.triangles]
        e1 = x[:, 1] - x[:, 0]
        e2 = x[:, 2] - x[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        # rows of inverse Jacobian transpose
        g1 = np.stack([e2[:, 1], -e2[:, 0]], axis=1) / det[:, None]
        g2 = np.stack([-e1[:, 1], e1[:, 0]], axis=1) / det[:, None]
        return np.ascontiguousarray(np.stack([-g1 - g2, g1, g2], axis=1))

    @cached_property
    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        x = self.vertices[self.triangles]
        angles = []
        for i in range(3):
            a = x[:, (i + 1) % 3] - x[:, i]
            b = x[:, (i + 2) % 3] - x[:, i]
            cos = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
        return float(np.min(angles))

    @cached_property
    def h_max(self) -> float:
        x = self.vertices[self.triangles]
        lens = [np.linalg.norm(x[:, (i + 1) % 3] - x[:, i], axis=1) for i in range(3)]
        return float(np.max(lens))

    # --- boundary topology ----------------------------------------------

    @cached_property
    def boundary_triangles(self) -> np.ndarray:
        """Index of the unique triangle adjacent to each boundary edge."""
        lookup = {}
        for t, tri in enumerate(self.triangles):
            for i in range(3):
                lookup[(int(tri[i]), int(tri[(i + 1) % 3]))] = t
        out = np.empty(len(self.boundary_edges), dtype=np.int64)
        for e, (a, b) in enumerate(self.boundary_edges):
            t = lookup.get((int(a), int(b)))
            if t is None:
                raise MeshError(f"boundary edge {(int(a), int(b))} has no adjacent triangle with matching orientation")
            out[e] = t
        return out

    @cached_property
    def boundary_loops(self) -> list[np.ndarray]:
        """Boundary edge indices grouped into closed loops, in traversal order."""
        nxt = {int(a): e for e, (a, _) in enumerate(self.boundary_edges)}
        if len(nxt) != len(self.boundary_edges):
            raise MeshError("boundary vertex starts more than one edge")
        seen = np.zeros(len(self.boundary_edges), dtype=bool)
        loops = []
        for start in range(len(self.boundary_edges)):
            if seen[start]:
                continue
            loop = []
            e = start
            while not seen[e]:
                seen[e] = True
                loop.append(e)
                e = nxt.get(int(self.boundary_edges[e, 1]))
                if e is None:
                    raise MeshError("boundary edges do not form closed loops")
            if e != start:
                raise MeshError("boundary edges do not form closed loops")
            loops.append(np.array(loop, dtype=np.int64))
        return loops

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges.ravel())

    # --- quadrature -----------------------------------------------------

    @cached_property
    def volume_points(self) -> np.ndarray:
        """Edge-midpoint quadrature points, (m, 3, 2)."""
        x = self.vertices[self.triangles]
        return 0.5 * (x + np.roll(x, -1, axis=1))

    @cached_property
    def boundary_points(self) -> np.ndarray:
        """Two Gauss points per boundary edge, (k, 2, 2)."""
        a = self.vertices[self.boundary_edges[:, 0]]
        b = self.vertices[self.boundary_edges[:, 1]]
        return np.stack([a + s * (b - a) for s in GAUSS2], axis=1)

    @cached_property
    def discretization(self):
        from .discretize import Discretization

        return Discretization.from_mesh(self)

    def validate(self) -> None:
        """Check the structural invariants (edge ownership, closed loops)."""
        _ = self.boundary_triangles
        _ = self.boundary_loops
        counts = {}
        for tri in self.triangles:
            for i in range(3):
                key = tuple(sorted((int(tri[i]), int(tri[(i + 1) % 3]))))
                counts[key] = counts.get(key, 0) + 1
        bnd = {key for key, c in counts.items() if c == 1}
        given = {tuple(sorted(map(int, e))) for e in self.boundary_edges}
        if bnd != given:
            raise MeshError("boundary edges do not match the triangulation boundary")


# --- vector fields ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VectorField:
    """Perturbation field ``v`` driving ``x -> x + t v(x)``.

    Either an analytic callback ``func(points[..., 2]) -> [..., 2]`` or fixed
    per-vertex samples (``values``), interpolated linearly on edges.
    """

    kind: str
    func: Callable[[np.ndarray], np.ndarray] | None = None
    values: np.ndarray | None = None
    scale: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.func is None:
            raise ValueError("sampled vector fields have no pointwise evaluation")
        out = np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)
        return np.broadcast_to(out, np.shape(x)).copy()

    def vertex_values(self, mesh: Mesh) -> np.ndarray:
        if self.values is not None:
            vals = np.asarray(self.values, dtype=float)
            if vals.shape != mesh.vertices.shape:
                raise ValueError("sampled field does not match the mesh")
        else:
            vals = self(mesh.vertices)
        if not np.all(np.isfinite(vals)):
            raise ValueError("vector field is not finite on the mesh")
        return vals

    def boundary_values(self, mesh: Mesh) -> np.ndarray:
        if self.values is None:
            return self(mesh.boundary_points)
        vals = self.vertex_values(mesh)
        a = vals[mesh.boundary_edges[:, 0]]
        b = vals[mesh.boundary_edges[:, 1]]
        return np.stack([a + s * (b - a) for s in GAUSS2], axis=1)


def dilation(scale: float = 1.0) -> VectorField:
    return VectorField("dilation", lambda x: scale * x, scale=scale)


def translation(direction=(1.0, 0.0)) -> VectorField:
    d = np.asarray(direction, dtype=float)
    return VectorField("translation", lambda x: np.broadcast_to(d, x.shape).copy(), values=None, scale=1.0)


def stretch_x(scale: float = 1.0) -> VectorField:
    def f(x):
        out = np.zeros_like(x)
        out[..., 0] = scale * x[..., 0]
        return out

    return VectorField("stretch_x", f, scale=scale)


def rotation() -> VectorField:
    """Infinitesimal rotation about the origin; tangential on circles."""

    def f(x):
        return np.stack([-x[..., 1], x[..., 0]], axis=-1)

    return VectorField("rotation", f)


def from_callback(func) -> VectorField:
    return VectorField("callback", func)


def from_samples(values) -> VectorField:
    return VectorField("samples", values=np.asarray(values, dtype=float))


# --- generation -------------------------------------------------------------


def _check_size(area: float, h: float) -> None:
    estimate = 2.0 * area / (math.sqrt(3.0) * h * h)
    if estimate > MAX_VERTICES:
        raise MeshError(f"h={h} needs ~{estimate:.0f} vertices, above the {MAX_VERTICES} budget")


def _edges_of(tris: np.ndarray) -> np.ndarray:
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    return np.unique(np.sort(e, axis=1), axis=0)


def _orient(pts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    tris = tris.copy()
    flip = cross < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def _boundary_from_triangles(tris: np.ndarray) -> np.ndarray:
    directed = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    key = np.sort(directed, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return directed[counts[inv.ravel()] == 1]


def _order_loop(edges: np.ndarray) -> np.ndarray:
    nxt = {int(a): int(b) for a, b in edges}
    start = int(min(nxt))
    out = []
    a = start
    for _ in range(len(edges)):
        b = nxt[a]
        out.append((a, b))
        a = b
        if a == start:
            break
    if len(out) != len(edges):
        raise MeshError("generated boundary is not a single loop")
    return np.array(out, dtype=np.int64)


def _relaxed_mesh(bnd: np.ndarray, sdf, h: float, bbox, analytic: dict, iterations: int = 80) -> Mesh:
    """Fixed-boundary spring relaxation on a hexagonal seed lattice."""
    (x0, y0), (x1, y1) = bbox
    dy = h * math.sqrt(3.0) / 2.0
    ys = np.arange(y0, y1 + dy, dy)
    seeds = []
    for j, y in enumerate(ys):
        xs = np.arange(x0 + (0.5 * h if j % 2 else 0.0), x1 + h, h)
        seeds.append(np.column_stack([xs, np.full_like(xs, y)]))
    seeds = np.concatenate(seeds)
    interior = seeds[sdf(seeds) < -0.6 * h]
    nb = len(bnd)
    pts = np.concatenate([bnd, interior])
    margin = 0.45 * h

    def grad_sdf(x):
        e = 1e-7 * h
        gx = (sdf(x + [e, 0.0]) - sdf(x - [e, 0.0])) / (2 * e)
        gy = (sdf(x + [0.0, e]) - sdf(x - [0.0, e])) / (2 * e)
        return np.column_stack([gx, gy])

    for _ in range(iterations):
        tris = Delaunay(pts).simplices
        bars = _edges_of(tris)
        vec = pts[bars[:, 0]] - pts[bars[:, 1]]
        length = np.hypot(vec[:, 0], vec[:, 1])
        target = 1.2 * math.sqrt(np.mean(length ** 2))
        force = np.maximum(target - length, 0.0) / length
        fvec = vec * force[:, None]
        total = np.zeros_like(pts)
        np.add.at(total, bars[:, 0], fvec)
        np.add.at(total, bars[:, 1], -fvec)
        total[:nb] = 0.0
        move = 0.2 * total
        pts = pts + move
        inner = pts[nb:]
        d = sdf(inner)
        out = d > -margin
        if np.any(out):
            inner[out] -= (d[out] + margin)[:, None] * grad_sdf(inner[out])
        pts[nb:] = inner
        if np.max(np.hypot(move[:, 0], move[:, 1])) < 1e-3 * h:
            break

    tris = Delaunay(pts).simplices
    centroids = pts[tris].mean(axis=1)
    tris = tris[sdf(centroids) < 0.0]
    tris = _orient(pts, tris)
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    tris = tris[cross > 1e-14 * h * h]
    edges = _order_loop(_boundary_from_triangles(tris))
    mesh = Mesh(pts, tris, edges, analytic)
    if len(edges) != nb:
        raise MeshError("boundary vertices were lost during triangulation")
    return mesh


def generate_disk_mesh(R: float = 1.0, h: float = 0.1, center=(0.0, 0.0)) -> Mesh:
    """Quasi-uniform disk mesh with boundary vertices exactly on the circle."""
    if not R > 0 or not 0 < h < R:
        raise MeshError("need R > 0 and 0 < h < R")
    _check_size(math.pi * R * R, h)
    cx, cy = center
    n = max(8, math.ceil(2.0 * math.pi * R / h))
    theta = 2.0 * math.pi * np.arange(n) / n
    bnd = np.column_stack([cx + R * np.cos(theta), cy + R * np.sin(theta)])

    def sdf(x):
        return np.hypot(x[:, 0] - cx, x[:, 1] - cy) - R

    return _relaxed_mesh(bnd, sdf, h, ((cx - R, cy - R), (cx + R, cy + R)),
                         {"kind": "circle", "R": float(R), "center": [float(cx), float(cy)]})


def _ellipse_boundary(a: float, b: float, h: float) -> np.ndarray:
    theta = np.linspace(0.0, 2.0 * math.pi, 20001)
    speed = np.hypot(a * np.sin(theta), b * np.cos(theta))
    arc = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(theta))])
    n = max(8, math.ceil(arc[-1] / h))
    targets = arc[-1] * np.arange(n) / n
    th = np.interp(targets, arc, theta)
    return np.column_stack([a * np.cos(th), b * np.sin(th)])


def generate_ellipse_mesh(a: float, b: float, h: float) -> Mesh:
    """Ellipse ``(x/a)^2 + (y/b)^2 < 1`` with equal arc-length boundary spacing."""
    if not (a > 0 and b > 0) or not 0 < h < min(a, b):
        raise MeshError("need a, b > 0 and 0 < h < min(a, b)")
    _check_size(math.pi * a * b, h)
    bnd = _ellipse_boundary(a, b, h)

    def sdf(x):
        # first-order distance estimate (f - 1) / |grad f|; exact on the curve
        f = np.hypot(x[:, 0] / a, x[:, 1] / b)
        g = np.hypot(x[:, 0] / a ** 2, x[:, 1] / b ** 2)
        ok = g > 0
        return np.where(ok, (f - 1.0) * f / np.where(ok, g, 1.0), -min(a, b))

    return _relaxed_mesh(bnd, sdf, h, ((-a, -b), (a, b)), {"kind": "ellipse", "a": float(a), "b": float(b)})


def generate_rect_mesh(width: float, height: float, h: float) -> Mesh:
    """Rectangle ``[-w/2, w/2] x [-H/2, H/2]``; corners are boundary vertices."""
    if not (width > 0 and height > 0) or not 0 < h < min(width, height):
        raise MeshError("need positive sides and 0 < h < min(sides)")
    _check_size(width * height, h)
    hw, hh = 0.5 * width, 0.5 * height
    corners = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
    pts = []
    for i in range(4):
        p0, p1 = corners[i], corners[(i + 1) % 4]
        n = max(1, math.ceil(np.linalg.norm(p1 - p0) / h))
        s = np.arange(n) / n
        pts.append(p0 + s[:, None] * (p1 - p0))
    bnd = np.concatenate(pts)

    def sdf(x):
        q = np.abs(x) - [hw, hh]
        outside = np.hypot(np.maximum(q[:, 0], 0.0), np.maximum(q[:, 1], 0.0))
        return outside + np.minimum(np.maximum(q[:, 0], q[:, 1]), 0.0)

    return _relaxed_mesh(bnd, sdf, h, ((-hw, -hh), (hw, hh)),
                         {"kind": "polygon", "corners": corners.tolist()})


def generate_mesh(shape: str, h: float, R: float = 1.0, a: float = 2.0, b: float = 1.0,
                  width: float = 1.0, height: float = 1.0) -> Mesh:
    if shape == "disk":
        return generate_disk_mesh(R, h)
    if shape == "ellipse":
        return generate_ellipse_mesh(a, b, h)
    if shape == "rect":
        return generate_rect_mesh(width, height, h)
    raise MeshError(f"unknown shape {shape!r}")


# --- transformations --------------------------------------------------------


def _transform_analytic(analytic: dict | None, v: VectorField, t: float) -> dict | None:
    if analytic is None or t == 0.0:
        return analytic
    kind = analytic["kind"]
    if v.kind == "dilation":
        f = 1.0 + t * v.scale
        if kind == "circle" and f > 0:
            return {"kind": "circle", "R": analytic["R"] * f, "center": [c * f for c in analytic["center"]]}
        if kind == "ellipse" and f > 0:
            return {"kind": "ellipse", "a": analytic["a"] * f, "b": analytic["b"] * f}
    return None


def perturb_mesh(mesh: Mesh, v: VectorField, t: float) -> Mesh:
    """Mesh of ``{x + t v(x)}``: vertex-wise displacement, same topology."""
    if t == 0.0:
        return mesh
    new = mesh.vertices + t * v.vertex_values(mesh)
    try:
        return Mesh(new, mesh.triangles, mesh.boundary_edges, _transform_analytic(mesh.analytic_boundary, v, t))
    except MeshError as exc:
        raise MeshError("perturbation too large") from exc


def scale_mesh(mesh: Mesh, t: float) -> Mesh:
    """Dilate every vertex by ``t > 0`` about the origin."""
    if not t > 0:
        raise MeshError("scale factor must be positive")
    if t == 1.0:
        return mesh
    analytic = mesh.analytic_boundary
    if analytic is not None:
        analytic = dict(analytic)
        for key in ("R", "a", "b"):
            if key in analytic:
                analytic[key] = analytic[key] * t
        if "center" in analytic:
            analytic["center"] = [c * t for c in analytic["center"]]
        if "corners" in analytic:
            analytic["corners"] = (np.asarray(analytic["corners"]) * t).tolist()
    return Mesh(mesh.vertices * t, mesh.triangles, mesh.boundary_edges, analytic)


# --- integration ------------------------------------------------------------


def _samples(values, points: np.ndarray) -> np.ndarray:
    if callable(values):
        vals = np.asarray(values(points), dtype=float)
    else:
        vals = np.asarray(values, dtype=float)
    vals = np.broadcast_to(vals, points.shape[:-1])
    if not np.all(np.isfinite(vals)):
        raise MeshError("non-finite integrand sample")
    return vals


def volume_integral(mesh: Mesh, f) -> float:
    """Integrate ``f`` (callable or values at the (m, 3) midpoints) over the mesh."""
    vals = _samples(f, mesh.volume_points)
    return float(np.dot(mesh.areas, vals.sum(axis=1)) / 3.0)


def surface_integral(mesh: Mesh, f) -> float:
    """Integrate ``f`` (callable or values at the (k, 2) Gauss points) over the boundary."""
    vals = _samples(f, mesh.boundary_points)
    return float(np.dot(mesh.edge_lengths, vals.sum(axis=1)) / 2.0)


# --- boundary geometry ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundaryGeometry:
    """Outward edge normals and signed vertex curvature.

    ``curvature`` is indexed like ``mesh.vertices`` (NaN at interior vertices).
    """

    normals: np.ndarray
    curvature: np.ndarray
    arc_weights: np.ndarray
    analytic: bool

    def edge_curvature(self, mesh: Mesh) -> np.ndarray:
        """Curvature linearly interpolated to the boundary Gauss points, (k, 2)."""
        ka = self.curvature[mesh.boundary_edges[:, 0]]
        kb = self.curvature[mesh.boundary_edges[:, 1]]
        return np.stack([ka + s * (kb - ka) for s in GAUSS2], axis=1)


def _discrete_curvature(mesh: Mesh, curvature: np.ndarray) -> None:
    edges = mesh.boundary_edges
    for loop in mesh.boundary_loops:
        cur = edges[loop, 0]
        prev = np.roll(cur, 1)
        nxt = edges[loop, 1]
        xa, xi, xb = mesh.vertices[prev], mesh.vertices[cur], mesh.vertices[nxt]
        d1, d2, d3 = xi - xa, xb - xi, xb - xa
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        denom = np.linalg.norm(d1, axis=1) * np.linalg.norm(d2, axis=1) * np.linalg.norm(d3, axis=1)
        scale = np.linalg.norm(d1, axis=1) * np.linalg.norm(d2, axis=1)
        collinear = np.abs(cross) <= 1e-14 * scale
        if np.any(collinear):
            warnings.warn(f"{int(collinear.sum())} collinear boundary triple(s); curvature set to 0")
        kappa = np.where(collinear, 0.0, 2.0 * cross / np.where(denom > 0, denom, 1.0))
        curvature[cur] = kappa


def boundary_geometry(mesh: Mesh, analytic: bool = True) -> BoundaryGeometry:
    """Normals per edge and curvature per boundary vertex.

    With ``analytic=True`` and a known boundary curve, curvature is evaluated
    from the curve; otherwise it is the signed circumcircle curvature through
    three consecutive boundary vertices.
    """
    d = mesh.vertices[mesh.boundary_edges[:, 1]] - mesh.vertices[mesh.boundary_edges[:, 0]]
    normals = np.column_stack([d[:, 1], -d[:, 0]]) / mesh.edge_lengths[:, None]
    curvature = np.full(mesh.n_vertices, np.nan)
    bverts = mesh.boundary_vertices
    info = mesh.analytic_boundary if analytic else None
    if info is not None and info["kind"] == "circle":
        curvature[bverts] = 1.0 / info["R"]
    elif info is not None and info["kind"] == "ellipse":
        a, b = info["a"], info["b"]
        x = mesh.vertices[bverts]
        th = np.arctan2(x[:, 1] / b, x[:, 0] / a)
        curvature[bverts] = a * b / (a * a * np.sin(th) ** 2 + b * b * np.cos(th) ** 2) ** 1.5
    elif info is not None and info["kind"] == "polygon":
        curvature[bverts] = 0.0
    else:
        info = None
        _discrete_curvature(mesh, curvature)
    arc = np.zeros(mesh.n_vertices)
    np.add.at(arc, mesh.boundary_edges[:, 0], 0.5 * mesh.edge_lengths)
    np.add.at(arc, mesh.boundary_edges[:, 1], 0.5 * mesh.edge_lengths)
    return BoundaryGeometry(normals, curvature, arc, info is not None)


# --- text format ------------------------------------------------------------


def write_mesh(mesh: Mesh, path) -> None:
    lines = []
    if mesh.analytic_boundary is not None:
        lines.append("# analytic_boundary " + json.dumps(mesh.analytic_boundary, sort_keys=True))
    lines.append(f"VERTICES {mesh.n_vertices}")
    lines.extend(f"{x!r} {y!r}" for x, y in mesh.vertices.tolist())
    lines.append(f"TRIANGLES {len(mesh.triangles)}")
    lines.extend(" ".join(map(str, t)) for t in mesh.triangles.tolist())
    lines.append(f"BOUNDARY {len(mesh.boundary_edges)}")
    lines.extend(" ".join(map(str, e)) for e in mesh.boundary_edges.tolist())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    analytic = None
    body = []
    for line in raw:
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if s.startswith("# analytic_boundary "):
                analytic = json.loads(s[len("# analytic_boundary "):])
            continue
        body.append(s)
    sections = {}
    i = 0
    while i < len(body):
        head = body[i].split()
        if len(head) != 2 or head[0] not in ("VERTICES", "TRIANGLES", "BOUNDARY"):
            raise MeshError(f"malformed section header: {body[i]!r}")
        n = int(head[1])
        rows = body[i + 1:i + 1 + n]
        if len(rows) != n:
            raise MeshError(f"section {head[0]} is truncated")
        sections[head[0]] = rows
        i += 1 + n
    missing = {"VERTICES", "TRIANGLES", "BOUNDARY"} - set(sections)
    if missing:
        raise MeshError(f"missing sections: {sorted(missing)}")
    verts = np.array([[float(v) for v in r.split()] for r in sections["VERTICES"]]).reshape(-1, 2)
    tris = np.array([[int(v) for v in r.split()] for r in sections["TRIANGLES"]], dtype=np.int64).reshape(-1, 3)
    edges = np.array([[int(v) for v in r.split()] for r in sections["BOUNDARY"]], dtype=np.int64).reshape(-1, 2)
    return Mesh(verts, tris, edges, analytic)

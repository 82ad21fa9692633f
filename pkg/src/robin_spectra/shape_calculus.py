"""First-order domain variation of the eigenvalue.

For ``Omega_t = {x + t v(x)}`` the derivative of ``lambda(Omega_t)`` at 0 is a
boundary integral against ``v . eta`` of

    |grad u|^p + V|u|^p - lambda|u|^p + beta kappa |u|^p + p beta u |u|^(p-2) grad u . eta

with ``u`` normalized in ``L^p`` and ``kappa`` the boundary curvature (the
``(n-1) H`` of a planar curve). Using the boundary condition the last term can
be written ``-p beta^2 |u|^(2p-2) / |grad u|^(p-2)``.

Also here: the volume and perimeter expansions of ``Omega_t`` and a sign test
of the derivative on balls via the radial reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import BoundaryGeometry, Mesh, VectorField, boundary_geometry, perturb_mesh
from .model import EigenResult, ProblemSpec
from .solver import SolverOptions, require_converged, solve_first_eigenpair

TERMS = ("grad_term", "potential_term", "eigen_term", "curvature_term", "robin_term")


class SingularFormError(ValueError):
    """The rephrased integrand divides by a vanishing boundary gradient."""


@dataclass(frozen=True)
class ShapeDerivativeReport:
    terms: dict
    alt_form_value: float | None = None
    fd_value: float | None = None
    steps: tuple = ()
    extras: dict = field(default_factory=dict)

    @property
    def formula_value(self) -> float:
        return float(math.fsum(self.terms[k] for k in TERMS))

    @property
    def rel_err(self) -> float | None:
        if self.fd_value is None:
            return None
        return abs(self.formula_value - self.fd_value) / max(abs(self.fd_value), 1e-14)

    def to_dict(self) -> dict:
        d = dict(self.terms)
        d.update(formula=self.formula_value, alt_form=self.alt_form_value, fd=self.fd_value,
                 rel_err=self.rel_err, steps=list(self.steps))
        d.update(self.extras)
        return d


# --- boundary traces -----------------------------------------------------------

@dataclass(frozen=True)
class BoundaryTrace:
    """Values at the boundary Gauss points (k edges x 2 points)."""

    u: np.ndarray          # (k, 2)
    grad: np.ndarray       # (k, 2, 2), constant per edge
    normals: np.ndarray    # (k, 2)
    curvature: np.ndarray  # (k, 2)
    weights: np.ndarray    # (k, 2)
    points: np.ndarray     # (k, 2, 2)

    @property
    def normal_derivative(self) -> np.ndarray:
        return np.einsum("kqd,kd->kq", self.grad, self.normals)


def robin_normal_component(g_tan: np.ndarray, u: np.ndarray, p: float, beta: float) -> np.ndarray:
    """Solve ``(g_tan^2 + s^2)^((p-2)/2) s = -beta |u|^(p-2) u`` for ``s``.

    The left side is strictly increasing in ``s`` for ``p > 1``; with zero
    tangential part the root is ``-(beta |u|^(p-2) u)^(1/(p-1))``.
    """
    g_tan = np.abs(np.asarray(g_tan, dtype=float))
    target = -beta * np.abs(u) ** (p - 1.0) * np.sign(u)

    def h(s):
        return (g_tan ** 2 + s ** 2) ** (0.5 * (p - 2.0)) * s if p != 2.0 else s

    if p == 2.0:
        return target
    bound = np.maximum(np.abs(target) ** (1.0 / (p - 1.0)), 1e-300)
    while True:
        lo, hi = -bound, bound
        if np.all(h(lo) <= target) and np.all(h(hi) >= target):
            break
        bound = bound * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = h(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(np.abs(mid), 1e-300)):
            break
    return 0.5 * (lo + hi)


def boundary_trace(result: EigenResult, spec: ProblemSpec, mesh: Mesh, geometry: BoundaryGeometry | None = None,
                   gradient: str = "triangle") -> BoundaryTrace:
    """Traces of an ``L^p``-unit eigenfunction on the boundary.

    ``gradient="triangle"`` takes the constant gradient of the adjacent
    triangle. ``gradient="robin"`` keeps its tangential part and replaces the
    normal part by the value the boundary condition dictates.
    """
    if gradient not in ("triangle", "robin"):
        raise ValueError(f"unknown gradient recovery {gradient!r}")
    geometry = geometry or boundary_geometry(mesh)
    if np.any(np.isnan(geometry.curvature[mesh.boundary_vertices])):
        raise ValueError("boundary curvature unavailable")
    disc = mesh.discretization
    u = np.asarray(result.u, dtype=float)
    u = u / disc.lp_norm_p(u, spec.p) ** (1.0 / spec.p)
    k = len(mesh.boundary_edges)
    ub = disc.boundary_values(u).reshape(k, 2)
    g = disc.cell_gradients(u)[mesh.boundary_triangles]
    grad = np.repeat(g[:, None, :], 2, axis=1)
    eta = geometry.normals
    if gradient == "robin":
        tau = np.column_stack([-eta[:, 1], eta[:, 0]])
        gt = np.einsum("kd,kd->k", g, tau)[:, None] * np.ones((1, 2))
        gn = robin_normal_component(gt, ub, spec.p, spec.beta)
        grad = gt[..., None] * tau[:, None, :] + gn[..., None] * eta[:, None, :]
    weights = np.repeat(mesh.edge_lengths[:, None] / 2.0, 2, axis=1)
    return BoundaryTrace(ub, grad, eta, geometry.edge_curvature(mesh), weights, mesh.boundary_points)


def _normal_velocity(v: VectorField, mesh: Mesh, eta: np.ndarray) -> np.ndarray:
    return np.einsum("kqd,kd->kq", v.boundary_values(mesh), eta)


def _checked(result: EigenResult) -> EigenResult:
    require_converged(result)
    if result.dirichlet:
        raise ValueError("shape derivative needs a Robin eigenpair")
    return result


def shape_derivative_formula(result: EigenResult, spec: ProblemSpec, mesh: Mesh, v: VectorField,
                             geometry: BoundaryGeometry | None = None, gradient: str = "triangle",
                             with_alt: bool = False) -> ShapeDerivativeReport:
    """Boundary-integral derivative with its five terms integrated separately."""
    _checked(result)
    tr = boundary_trace(result, spec, mesh, geometry, gradient)
    p, beta, lam = spec.p, spec.beta, result.lambda_
    vn = _normal_velocity(v, mesh, tr.normals)
    au = np.abs(tr.u) ** p
    gmag = np.linalg.norm(tr.grad, axis=2)
    V = spec.potential(tr.points)
    w = tr.weights * vn
    terms = {
        "grad_term": float(np.sum(w * gmag ** p)),
        "potential_term": float(np.sum(w * V * au)),
        "eigen_term": float(np.sum(w * (-lam) * au)),
        "curvature_term": float(np.sum(w * beta * tr.curvature * au)),
        "robin_term": float(np.sum(w * p * beta * tr.u * np.abs(tr.u) ** (p - 2.0) * tr.normal_derivative)),
    }
    alt = None
    if with_alt:
        try:
            alt = shape_derivative_alt_form(result, spec, mesh, v, geometry)
        except SingularFormError:
            alt = None
    return ShapeDerivativeReport(terms, alt, extras={"lambda": lam, "gradient": gradient})


def shape_derivative_alt_form(result: EigenResult, spec: ProblemSpec, mesh: Mesh, v: VectorField,
                              geometry: BoundaryGeometry | None = None, gradient: str = "robin",
                              threshold: float = 1e-8) -> float:
    """Same integral with the Robin term rewritten through the boundary condition.

    The rewrite presumes the trace satisfies the boundary condition, so by
    default the normal gradient is the one the condition dictates. The primary
    form is stationary in the normal derivative, hence the two agree to second
    order in the discrete boundary-condition defect.

    For ``p > 2`` the rewritten term divides by ``|grad u|^(p-2)``; a boundary
    gradient below ``threshold`` (relative to the largest one) is refused.
    """
    _checked(result)
    tr = boundary_trace(result, spec, mesh, geometry, gradient)
    p, beta, lam = spec.p, spec.beta, result.lambda_
    vn = _normal_velocity(v, mesh, tr.normals)
    au = np.abs(tr.u) ** p
    gmag = np.linalg.norm(tr.grad, axis=2)
    if p > 2.0 and np.min(gmag) <= threshold * max(float(np.max(gmag)), 1e-300):
        raise SingularFormError("alt form singular here")
    robin = -p * beta ** 2 * np.abs(tr.u) ** (2.0 * p - 2.0) * gmag ** (2.0 - p)
    V = spec.potential(tr.points)
    integrand = gmag ** p + V * au - lam * au + beta * tr.curvature * au + robin
    return float(np.sum(tr.weights * vn * integrand))


def dilation_identity_value(result: EigenResult, spec: ProblemSpec, mesh: Mesh) -> float:
    """``-p lambda + (p-1) beta d lambda/d beta``: the derivative along ``v = x`` when ``V = 0``."""
    from .beta_calculus import dlambda_dbeta_formula

    return -spec.p * result.lambda_ + (spec.p - 1.0) * spec.beta * dlambda_dbeta_formula(result, mesh)


def _lambda_on(spec, mesh, v, t, opts, u0):
    moved = perturb_mesh(mesh, v, t)
    r = solve_first_eigenpair(spec.on(moved), moved, opts, u0=u0)
    return require_converged(r, f"solve at t={t:g}").lambda_


def _central(spec, mesh, v, t0, opts, base):
    return (_lambda_on(spec, mesh, v, t0, opts, base.u) - _lambda_on(spec, mesh, v, -t0, opts, base.u)) / (2 * t0)


def shape_derivative_fd(spec: ProblemSpec, mesh: Mesh, v: VectorField, t0: float = 1e-3,
                        opts: SolverOptions | None = None, richardson: bool = False,
                        base: EigenResult | None = None) -> float:
    """``(lambda(Omega_t0) - lambda(Omega_-t0)) / (2 t0)`` on displaced copies of ``mesh``."""
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    base = base or require_converged(solve_first_eigenpair(spec, mesh, opts))
    d1 = _central(spec, mesh, v, t0, opts, base)
    if not richardson:
        return d1
    d2 = _central(spec, mesh, v, 0.5 * t0, opts, base)
    return (4.0 * d2 - d1) / 3.0


def shape_fd_order_ratio(spec: ProblemSpec, mesh: Mesh, v: VectorField, t0: float = 1e-3, opts=None) -> dict:
    base = require_converged(solve_first_eigenpair(spec, mesh, opts))
    d = [_central(spec, mesh, v, t0 / 2 ** k, opts, base) for k in range(3)]
    ratio = (d[0] - d[1]) / (d[1] - d[2]) if d[1] != d[2] else math.inf
    return {"steps": [t0, t0 / 2, t0 / 4], "fd": d, "ratio": ratio}


def shape_derivative_report(spec: ProblemSpec, mesh: Mesh, v: VectorField, t0: float = 1e-3,
                            opts: SolverOptions | None = None, richardson: bool = False,
                            gradient: str = "triangle") -> ShapeDerivativeReport:
    """Formula (both forms) next to the finite-difference value."""
    base = require_converged(solve_first_eigenpair(spec, mesh, opts))
    rep = shape_derivative_formula(base, spec, mesh, v, gradient=gradient, with_alt=True)
    fd = shape_derivative_fd(spec, mesh, v, t0, opts, richardson, base)
    steps = (t0, 0.5 * t0) if richardson else (t0,)
    return ShapeDerivativeReport(rep.terms, rep.alt_form_value, fd, steps, rep.extras)


# --- volume and perimeter expansions --------------------------------------------

def _area_increment(mesh: Mesh, disp: np.ndarray, t: float) -> float:
    """``|Omega_t| - |Omega|`` from the displacement, without cancellation."""
    x = mesh.vertices[mesh.triangles]
    d = disp[mesh.triangles]
    e1, e2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
    f1, f2 = d[:, 1] - d[:, 0], d[:, 2] - d[:, 0]

    def cross(a, b):
        return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]

    lin = 0.5 * (cross(e1, f2) + cross(f1, e2))
    quad = 0.5 * cross(f1, f2)
    return math.fsum(t * lin + t * t * quad)


def divergence_integral(mesh: Mesh, v: VectorField) -> float:
    """``int div v`` for the piecewise-linear interpolant of ``v`` on ``mesh``."""
    vals = v.vertex_values(mesh)
    g = mesh.basis_grads
    div = np.einsum("mkd,mkd->m", g, vals[mesh.triangles])
    return math.fsum(mesh.areas * div)


def hadamard_volume_expansion_check(mesh: Mesh, v: VectorField, ts=(1e-3, 5e-4, 2.5e-4)) -> dict:
    """Slopes ``(|Omega_t| - |Omega|) / t`` against ``int div v`` and the ``O(t^2)`` remainder."""
    ts = [float(t) for t in ts]
    predicted = divergence_integral(mesh, v)
    disp = v.vertex_values(mesh)
    slopes, remainders = [], []
    for t in ts:
        perturb_mesh(mesh, v, t)  # refuses inverted elements
        inc = _area_increment(mesh, disp, t)
        slopes.append(inc / t)
        remainders.append(inc - t * predicted)
    ratios = [a / b if b != 0 else math.inf for a, b in zip(remainders, remainders[1:])]
    rel = abs(slopes[-1] - predicted) / max(abs(predicted), 1e-300)
    return {"t": ts, "predicted": predicted, "slopes": slopes, "remainders": remainders, "ratios": ratios,
            "rel_err": rel, "abs_err": abs(slopes[-1] - predicted)}


def _perimeter_increment(mesh: Mesh, disp: np.ndarray, t: float) -> float:
    a, b = mesh.boundary_edges[:, 0], mesh.boundary_edges[:, 1]
    e = mesh.vertices[b] - mesh.vertices[a]
    f = disp[b] - disp[a]
    L0 = np.linalg.norm(e, axis=1)
    # |e + t f| - |e| = (2 t e.f + t^2 |f|^2) / (|e + t f| + |e|)
    num = 2.0 * t * np.einsum("kd,kd->k", e, f) + t * t * np.einsum("kd,kd->k", f, f)
    return math.fsum(num / (np.linalg.norm(e + t * f, axis=1) + L0))


def hadamard_surface_expansion_check(mesh: Mesh, v: VectorField, ts=(1e-3, 5e-4, 2.5e-4),
                                     geometry: BoundaryGeometry | None = None) -> dict:
    """Perimeter slope against ``int_bd kappa (v . eta) ds``.

    The tangential divergence part of the surface Jacobian integrates to zero
    over closed curves, so only the curvature term is predicted.
    """
    ts = [float(t) for t in ts]
    geometry = geometry or boundary_geometry(mesh)
    kappa = geometry.edge_curvature(mesh)
    vn = _normal_velocity(v, mesh, geometry.normals)
    w = np.repeat(mesh.edge_lengths[:, None] / 2.0, 2, axis=1)
    predicted = math.fsum((w * kappa * vn).ravel())
    disp = v.vertex_values(mesh)
    slopes = []
    for t in ts:
        perturb_mesh(mesh, v, t)
        slopes.append(_perimeter_increment(mesh, disp, t) / t)
    # first-order extrapolation of the slope to t = 0
    limit = 2.0 * slopes[-1] - slopes[-2] if len(slopes) > 1 else slopes[-1]
    rel = abs(limit - predicted) / max(abs(predicted), 1e-300)
    return {"t": ts, "predicted": predicted, "slopes": slopes, "slope_limit": limit, "rel_err": rel,
            "abs_err": abs(limit - predicted)}


# --- balls ------------------------------------------------------------------------

@dataclass(frozen=True)
class BallSignVerdict:
    p: float
    beta: float
    R: float
    n: int
    lambda_: float
    u_boundary: float
    integrand: float
    integrand_robin: float
    condition_a: bool
    condition_b: bool
    potential_ok: bool
    v_dot_eta: float
    derivative: float
    verdict: str
    strict: bool

    @property
    def hypotheses_met(self) -> bool:
        return (self.condition_a or self.condition_b) and self.potential_ok

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"hypotheses_met": self.hypotheses_met}


def ball_monotonicity_sign_check(p: float, beta: float, R: float = 1.0, n: int = 2, V_radial=None,
                                 v_dot_eta: float = 1.0, size: int = 10_000,
                                 opts: SolverOptions | None = None) -> BallSignVerdict:
    """Sign of the derivative on ``B(0, R)`` for a constant normal speed ``v_dot_eta``.

    The predicted sign is claimed only if ``beta >= ((n-1) / (R (p-1)))^(p-1)``
    or (``R >= 1``, ``beta >= 1``, ``p >= n``) holds, and ``V(R) <= lambda``.
    """
    from .radial import RadialGrid, radial_lambda1, _as_potential

    pot = _as_potential(V_radial)
    grid = RadialGrid.graded(R, n, size)
    res = require_converged(radial_lambda1(p, beta, pot, grid, opts), "radial solve")
    r = grid.nodes
    # the radial u has unit mass against r^(n-1) dr; spread it over the sphere
    sphere = n * math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    u = res.u / sphere ** (1.0 / p)
    uR = float(u[-1])
    du = float((u[-1] - u[-2]) / (r[-1] - r[-2]))
    VR = float(pot.radial_values(np.array([R]))[0])
    lam = res.lambda_
    base = VR * uR ** p - lam * uR ** p + beta * (n - 1) / R * uR ** p
    integrand = abs(du) ** p + base + p * beta * uR ** (p - 1) * du
    du_bc = -(beta * uR ** (p - 1)) ** (1.0 / (p - 1))
    integrand_robin = abs(du_bc) ** p + base + p * beta * uR ** (p - 1) * du_bc
    cond_a = beta >= ((n - 1) / (R * (p - 1))) ** (p - 1)
    cond_b = R >= 1 and beta >= 1 and p >= n
    pot_ok = VR <= lam
    deriv = integrand * v_dot_eta * sphere * R ** (n - 1)
    if not ((cond_a or cond_b) and pot_ok):
        verdict = "hypotheses not met"
    elif deriv < 0:
        verdict = "decreasing"
    elif deriv > 0:
        verdict = "increasing"
    else:
        verdict = "stationary"
    strict = bool(cond_a and beta > ((n - 1) / (R * (p - 1))) ** (p - 1)) or VR < lam
    return BallSignVerdict(p, beta, R, n, lam, uR, integrand, integrand_robin, cond_a, cond_b, pot_ok,
                           v_dot_eta, deriv, verdict, strict)

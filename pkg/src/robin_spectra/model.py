"""Problem instances, potentials, results and the discrete Rayleigh quotient."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator


class SpecError(ValueError):
    """Raised for an invalid problem instance; ``errors`` lists every violation."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "cosh", "sinh", "arctan", "pi")
}


@dataclass(frozen=True, eq=False)
class Potential:
    """Schroedinger potential ``V``.

    kinds: ``constant`` (``value``), ``radial`` (polynomial ``coeffs`` in r, or
    ``func(r)``), ``function`` (``func(x)`` on points of shape (..., 2)),
    ``expression`` (numpy expression in ``x1``, ``x2``, ``r``), ``grid``
    (bilinear interpolation of ``values`` on the tensor grid ``gx`` x ``gy``).
    ``offset`` is added to every kind.
    """

    kind: str = "constant"
    value: float = 0.0
    coeffs: tuple = ()
    func: Callable | None = None
    expr: str | None = None
    gx: tuple = ()
    gy: tuple = ()
    values: tuple = ()
    offset: float = 0.0

    # constructors
    @classmethod
    def constant(cls, c: float) -> "Potential":
        return cls("constant", value=float(c))

    @classmethod
    def radial_poly(cls, coeffs) -> "Potential":
        return cls("radial", coeffs=tuple(float(c) for c in coeffs))

    @classmethod
    def radial_func(cls, func) -> "Potential":
        return cls("radial", func=func)

    @classmethod
    def from_function(cls, func) -> "Potential":
        return cls("function", func=func)

    @classmethod
    def expression(cls, expr: str) -> "Potential":
        return cls("expression", expr=expr)

    @classmethod
    def grid(cls, gx, gy, values) -> "Potential":
        vals = np.asarray(values, dtype=float)
        return cls("grid", gx=tuple(map(float, gx)), gy=tuple(map(float, gy)),
                   values=tuple(map(tuple, vals.tolist())))

    def shifted(self, c: float) -> "Potential":
        if self.kind == "constant":
            return replace(self, value=self.value + c)
        return replace(self, offset=self.offset + c)

    @property
    def is_radial(self) -> bool:
        return self.kind in ("constant", "radial")

    @property
    def is_zero(self) -> bool:
        return self.kind == "constant" and self.value + self.offset == 0.0

    def radial_values(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            out = np.full(r.shape, self.value)
        elif self.kind == "radial":
            if self.func is not None:
                out = np.asarray(self.func(r), dtype=float) * np.ones_like(r)
            else:
                out = np.polynomial.polynomial.polyval(r, self.coeffs) if self.coeffs else np.zeros_like(r)
        else:
            raise ValueError(f"potential of kind {self.kind!r} is not radial")
        return out + self.offset

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at points ``x`` of shape (..., 2), or (..., 1) radii for radial kinds."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] == 1:
            return self.radial_values(x[..., 0])
        if self.kind in ("constant", "radial"):
            return self.radial_values(np.hypot(x[..., 0], x[..., 1]))
        if self.kind == "function":
            out = np.asarray(self.func(x), dtype=float) * np.ones(x.shape[:-1])
        elif self.kind == "expression":
            ns = dict(_EXPR_NAMESPACE, x1=x[..., 0], x2=x[..., 1], r=np.hypot(x[..., 0], x[..., 1]))
            out = np.asarray(eval(compile(self.expr, "<potential>", "eval"), {"__builtins__": {}}, ns), dtype=float)
            out = out * np.ones(x.shape[:-1])
        elif self.kind == "grid":
            interp = RegularGridInterpolator((np.array(self.gx), np.array(self.gy)), np.array(self.values),
                                             method="linear", bounds_error=False, fill_value=None)
            out = interp(x.reshape(-1, 2)).reshape(x.shape[:-1])
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        return out + self.offset

    def to_dict(self) -> dict:
        if self.func is not None:
            raise ValueError("callback potentials cannot be serialized")
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["value"] = self.value
        elif self.kind == "radial":
            d["coeffs"] = list(self.coeffs)
        elif self.kind == "expression":
            d["expr"] = self.expr
        elif self.kind == "grid":
            d.update(x=list(self.gx), y=list(self.gy), values=[list(r) for r in self.values])
        if self.offset:
            d["offset"] = self.offset
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Potential":
        kind = d.get("kind", "constant")
        offset = float(d.get("offset", 0.0))
        if kind == "constant":
            pot = cls.constant(d.get("value", 0.0))
        elif kind == "radial":
            pot = cls.radial_poly(d.get("coeffs", []))
        elif kind == "expression":
            pot = cls.expression(str(d["expr"]))
        elif kind == "grid":
            pot = cls.grid(d["x"], d["y"], d["values"])
        else:
            raise SpecError([f"unknown potential kind {kind!r}"])
        return replace(pot, offset=offset) if offset else pot


@dataclass(frozen=True)
class DomainRef:
    """Which domain a spec refers to: ``disk``/``ellipse``/``rect``/``ball`` or ``mesh`` (any mesh)."""

    kind: str
    R: float | None = None
    a: float | None = None
    b: float | None = None
    width: float | None = None
    height: float | None = None
    n: int = 2
    path: str | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for key in ("R", "a", "b", "width", "height", "path"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        if self.kind == "ball":
            d["n"] = self.n
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DomainRef":
        allowed = {"kind", "R", "a", "b", "width", "height", "n", "path"}
        unknown = set(d) - allowed
        if unknown:
            raise SpecError([f"unknown domain field(s): {sorted(unknown)}"])
        return cls(**d)

    def matches(self, mesh) -> bool:
        if self.kind == "mesh":
            return True
        info = getattr(mesh, "analytic_boundary", None)
        if self.kind == "ball":
            # radial grids carry (R, n); a 2D disk mesh matches a 2-ball
            if hasattr(mesh, "n") and hasattr(mesh, "R"):
                return math.isclose(mesh.R, self.R) and mesh.n == self.n
            return self.n == 2 and info is not None and info["kind"] == "circle" and math.isclose(info["R"], self.R)
        if info is None:
            return False
        if self.kind == "disk":
            return info["kind"] == "circle" and math.isclose(info["R"], self.R)
        if self.kind == "ellipse":
            return info["kind"] == "ellipse" and math.isclose(info["a"], self.a) and math.isclose(info["b"], self.b)
        if self.kind == "rect":
            c = np.asarray(info.get("corners", []))
            return (info["kind"] == "polygon" and c.shape == (4, 2)
                    and math.isclose(np.ptp(c[:, 0]), self.width) and math.isclose(np.ptp(c[:, 1]), self.height))
        return False


def domain_of(mesh) -> DomainRef:
    """A DomainRef that matches ``mesh`` exactly (analytic when possible)."""
    if hasattr(mesh, "n") and hasattr(mesh, "R"):
        return DomainRef("ball", R=mesh.R, n=mesh.n)
    info = mesh.analytic_boundary
    if info is not None and info["kind"] == "circle" and not any(info["center"]):
        return DomainRef("disk", R=info["R"])
    if info is not None and info["kind"] == "ellipse":
        return DomainRef("ellipse", a=info["a"], b=info["b"])
    return DomainRef("mesh")


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of the Robin p-Laplacian Schroedinger eigenproblem."""

    p: float
    beta: float
    potential: Potential = field(default_factory=Potential)
    domain: DomainRef | None = None

    def with_beta(self, beta: float) -> "ProblemSpec":
        return replace(self, beta=beta)

    def with_potential(self, potential: Potential) -> "ProblemSpec":
        return replace(self, potential=potential)

    def on(self, mesh) -> "ProblemSpec":
        """Same problem re-targeted to ``mesh``."""
        return replace(self, domain=domain_of(mesh))

    def to_dict(self) -> dict:
        return {"p": self.p, "beta": self.beta, "potential": self.potential.to_dict(),
                "domain": None if self.domain is None else self.domain.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        unknown = set(d) - {"p", "beta", "potential", "domain"}
        if unknown:
            raise SpecError([f"unknown spec field(s): {sorted(unknown)}"])
        missing = [k for k in ("p", "beta") if k not in d]
        if missing:
            raise SpecError([f"missing field {k!r}" for k in missing])
        pot = Potential.from_dict(d.get("potential") or {"kind": "constant", "value": 0.0})
        dom = d.get("domain")
        return cls(float(d["p"]), float(d["beta"]), pot, None if dom is None else DomainRef.from_dict(dom))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProblemSpec":
        return cls.from_dict(json.loads(text))


def _probe_points(domain: DomainRef | None) -> np.ndarray:
    g = np.linspace(-1.0, 1.0, 21)
    X, Y = np.meshgrid(g, g)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    if domain is None:
        return pts
    if domain.kind in ("disk", "ball"):
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= 1.0] * (domain.R or 1.0)
    elif domain.kind == "ellipse":
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= 1.0] * [domain.a, domain.b]
    elif domain.kind == "rect":
        pts = pts * [0.5 * domain.width, 0.5 * domain.height]
    return pts


def validate_spec(spec: ProblemSpec) -> list[str]:
    """Every violated precondition, as messages; empty list means valid."""
    errors = []
    if not (isinstance(spec.p, (int, float)) and spec.p > 1 and math.isfinite(spec.p)):
        errors.append("p must exceed 1")
    if not (isinstance(spec.beta, (int, float)) and spec.beta > 0 and math.isfinite(spec.beta)):
        errors.append("Robin parameter must be positive")
    if spec.domain is None:
        errors.append("missing domain")
    else:
        d = spec.domain
        if d.kind in ("disk", "ball") and not (d.R and d.R > 0):
            errors.append("domain radius must be positive")
        if d.kind == "ellipse" and not (d.a and d.b and d.a > 0 and d.b > 0):
            errors.append("ellipse semi-axes must be positive")
        if d.kind == "rect" and not (d.width and d.height and d.width > 0 and d.height > 0):
            errors.append("rectangle sides must be positive")
        if d.kind == "ball" and d.n < 2:
            errors.append("ball dimension must be at least 2")
        if d.kind not in ("disk", "ellipse", "rect", "ball", "mesh"):
            errors.append(f"unknown domain kind {d.kind!r}")
    try:
        pot = spec.potential
        if pot.kind == "grid":
            vals = np.asarray(pot.values, dtype=float)
        elif spec.domain is not None and spec.domain.kind == "ball":
            vals = pot.radial_values(np.linspace(0.0, spec.domain.R or 1.0, 101))
        else:
            vals = pot(_probe_points(spec.domain))
        if not np.all(np.isfinite(vals)):
            errors.append("potential is unbounded (non-finite samples)")
    except Exception as exc:  # evaluation failure is a spec error
        errors.append(f"potential cannot be evaluated: {exc}")
    return errors


def check_spec(spec: ProblemSpec, mesh=None) -> None:
    errors = validate_spec(spec)
    if mesh is not None and spec.domain is not None and not spec.domain.matches(mesh):
        errors.append("mesh does not match spec.domain")
    if errors:
        raise SpecError(errors)


@dataclass(frozen=True, eq=False)
class EigenResult:
    """First eigenpair on a discretization.

    ``u`` holds nonnegative nodal coefficients; in ``"Lp-unit"`` mode
    ``int |u|^p dx = 1`` with the package quadrature, in ``"sup-unit"`` mode
    ``max u = 1``. ``eps`` is the regularization of the final stage (0 for
    the exact energy); ``lambda_`` is the quotient of that energy.
    """

    lambda_: float
    u: np.ndarray
    normalization: str
    residual: float
    iterations: int
    converged: bool
    p: float = 2.0
    trace: tuple = ()
    stages: tuple = ()
    message: str = ""
    dirichlet: bool = False
    eps: float = 0.0

    def sup_unit(self) -> "EigenResult":
        return replace(self, u=self.u / np.max(np.abs(self.u)), normalization="sup-unit")

    def lp_unit(self, disc) -> "EigenResult":
        return replace(self, u=self.u / disc.lp_norm_p(self.u, self.p) ** (1.0 / self.p), normalization="Lp-unit")

    def to_dict(self, include_u: bool = True) -> dict:
        d = {"lambda": self.lambda_, "residual": self.residual, "iterations": self.iterations,
             "converged": self.converged}
        if include_u:
            d["u"] = self.u.tolist()
        return d


def _disc(mesh):
    return mesh.discretization


def quotient_parts(u, spec: ProblemSpec, disc, potential_values=None):
    """``(grad, potential, boundary, mass)`` integrals of the Rayleigh quotient."""
    p = spec.p
    grad, _ = disc.grad_energy(u, p)
    mass, _ = disc.volume_power(u, p)
    if potential_values is None:
        potential_values = spec.potential(disc.vol_points)
    pot, _ = disc.volume_power(u, p, weights=disc.vol_weights * potential_values)
    bnd, _ = disc.boundary_power(u, p)
    return grad, pot, bnd, mass


def rayleigh_quotient(u, spec: ProblemSpec, mesh) -> float:
    """``(int |grad u|^p + int V |u|^p + beta int_bd |u|^p) / int |u|^p``."""
    u = np.ascontiguousarray(u, dtype=float)
    disc = _disc(mesh)
    if u.shape != (disc.n_nodes,):
        raise SpecError(["coefficient vector does not match the mesh"])
    if spec.domain is not None and not spec.domain.matches(mesh):
        raise SpecError(["mesh does not match spec.domain"])
    if not np.any(u):
        raise ValueError("degenerate test function")
    grad, pot, bnd, mass = quotient_parts(u, spec, disc)
    if mass == 0.0:
        raise ValueError("degenerate test function")
    return (grad + pot + spec.beta * bnd) / mass


def potential_sup(spec: ProblemSpec, mesh) -> float:
    """Max of ``|V|`` over the volume quadrature points (a lower estimate of the sup norm)."""
    return float(np.max(np.abs(spec.potential(_disc(mesh).vol_points))))

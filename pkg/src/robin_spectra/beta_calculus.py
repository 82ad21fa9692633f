"""Dependence of the first eigenvalue on the Robin parameter.

For a normalized first eigenfunction ``u_beta``

    d lambda / d beta = int_bd |u|^p ds / int |u|^p dx,

and for ``beta1 > beta`` the difference quotient of ``lambda`` is bracketed by
this ratio at both ends. Dilating the domain by ``t`` maps ``(Omega, beta)`` to
``(t Omega, beta / t^(p-1))`` and ``lambda`` to ``t^(-p) lambda``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .concurrency import ordered_map
from .mesh import scale_mesh
from .model import EigenResult, ProblemSpec
from .solver import (SolverOptions, require_converged, solve_dirichlet_first, solve_first_eigenpair)


@dataclass(frozen=True)
class DerivativeReport:
    formula_value: float
    fd_value: float
    fd_step: float
    extras: dict = field(default_factory=dict)

    @property
    def abs_err(self) -> float:
        return abs(self.formula_value - self.fd_value)

    @property
    def rel_err(self) -> float:
        return self.abs_err / max(abs(self.fd_value), 1e-14)

    def to_dict(self) -> dict:
        return {"formula": self.formula_value, "fd": self.fd_value, "fd_step": self.fd_step,
                "abs_err": self.abs_err, "rel_err": self.rel_err, **self.extras}


def _solve(spec: ProblemSpec, mesh, opts=None, u0=None, what="solve") -> EigenResult:
    return require_converged(solve_first_eigenpair(spec, mesh, opts, u0=u0), what)


def boundary_ratio(u, p: float, mesh) -> float:
    """``int_bd |u|^p / int |u|^p``; invariant under ``u -> c u``."""
    disc = mesh.discretization
    u = np.ascontiguousarray(u, dtype=float)
    num = disc.boundary_power(u, p)[0]
    den = disc.volume_power(u, p)[0]
    if not den > 0:
        raise ValueError("degenerate test function")
    return num / den


def dlambda_dbeta_formula(result: EigenResult, mesh) -> float:
    """Boundary-to-volume ``L^p`` mass ratio of the eigenfunction."""
    require_converged(result)
    return boundary_ratio(result.u, result.p, mesh)


def _central(spec, mesh, opts, base, h):
    lo = _solve(spec.with_beta(spec.beta - h), mesh, opts, base.u, "solve at beta - h")
    hi = _solve(spec.with_beta(spec.beta + h), mesh, opts, base.u, "solve at beta + h")
    return (hi.lambda_ - lo.lambda_) / (2.0 * h)


def dlambda_dbeta_fd(spec: ProblemSpec, mesh, opts: SolverOptions | None = None, h_beta: float | None = None,
                     richardson: bool = False, base: EigenResult | None = None) -> float:
    """Central difference of ``lambda(beta)``, neighbours warm-started from ``base``.

    With ``richardson`` the steps ``h`` and ``h/2`` are combined to cancel the
    ``h^2`` term.
    """
    h = 1e-3 * max(1.0, spec.beta) if h_beta is None else float(h_beta)
    if not (h > 0 and spec.beta - h > 0):
        raise ValueError("need 0 < h_beta < beta")
    base = base or _solve(spec, mesh, opts)
    d1 = _central(spec, mesh, opts, base, h)
    if not richardson:
        return d1
    d2 = _central(spec, mesh, opts, base, 0.5 * h)
    return (4.0 * d2 - d1) / 3.0


def dlambda_dbeta_report(spec: ProblemSpec, mesh, opts=None, h_beta=None, richardson=False) -> DerivativeReport:
    base = _solve(spec, mesh, opts)
    h = 1e-3 * max(1.0, spec.beta) if h_beta is None else float(h_beta)
    formula = dlambda_dbeta_formula(base, mesh)
    # the ratio is scale free: same value under the max-norm scaling
    sup_value = boundary_ratio(base.sup_unit().u, spec.p, mesh)
    fd = dlambda_dbeta_fd(spec, mesh, opts, h, richardson, base)
    return DerivativeReport(formula, fd, h, {"lambda": base.lambda_, "formula_sup_unit": sup_value,
                                             "richardson": bool(richardson)})


def fd_order_ratio(spec: ProblemSpec, mesh, opts=None, h_beta=None) -> dict:
    """``(D(h) - D(h/2)) / (D(h/2) - D(h/4))``; about 4 for a second-order difference."""
    base = _solve(spec, mesh, opts)
    h = 1e-3 * max(1.0, spec.beta) if h_beta is None else float(h_beta)
    d = [_central(spec, mesh, opts, base, h / 2 ** k) for k in range(3)]
    ratio = (d[0] - d[1]) / (d[1] - d[2]) if d[1] != d[2] else math.inf
    return {"steps": [h, h / 2, h / 4], "fd": d, "ratio": ratio}


@dataclass(frozen=True)
class SandwichReport:
    beta: float
    beta1: float
    lower: float
    quotient: float
    upper: float
    tolerance: float
    lambda_beta: float
    lambda_beta1: float

    @property
    def lower_margin(self) -> float:
        return self.quotient - self.lower

    @property
    def upper_margin(self) -> float:
        return self.upper - self.quotient

    @property
    def passed(self) -> bool:
        return self.lower_margin >= -self.tolerance and self.upper_margin >= -self.tolerance

    def __iter__(self):
        # unpacks as (lower, quotient, upper, pass)
        return iter((self.lower, self.quotient, self.upper, self.passed))

    def to_dict(self) -> dict:
        return {"beta": self.beta, "beta1": self.beta1, "lower": self.lower, "quotient": self.quotient,
                "upper": self.upper, "tolerance": self.tolerance, "pass": self.passed}


def sandwich_check(spec: ProblemSpec, mesh, beta: float, beta1: float, opts: SolverOptions | None = None,
                   base: EigenResult | None = None) -> SandwichReport:
    """ratio(u_beta1) <= (lambda(beta1) - lambda(beta)) / (beta1 - beta) <= ratio(u_beta)."""
    if not beta1 > beta > 0:
        raise ValueError("need beta1 > beta > 0")
    opts = opts or SolverOptions()
    r0 = base or _solve(spec.with_beta(beta), mesh, opts)
    r1 = _solve(spec.with_beta(beta1), mesh, opts, r0.u, "solve at beta1")
    q = (r1.lambda_ - r0.lambda_) / (beta1 - beta)
    tol = 10.0 * opts.tol_lambda * max(abs(r0.lambda_), abs(r1.lambda_))
    return SandwichReport(beta, beta1, dlambda_dbeta_formula(r1, mesh), q, dlambda_dbeta_formula(r0, mesh), tol,
                          r0.lambda_, r1.lambda_)


@dataclass(frozen=True)
class SweepReport:
    rows: list
    lambda_dirichlet: float | None
    increasing: bool
    below_dirichlet: bool | None
    gap_decreasing: bool | None
    all_converged: bool

    @property
    def passed(self) -> bool:
        return (self.all_converged and self.increasing and self.below_dirichlet is not False
                and self.gap_decreasing is not False)

    def gap(self, beta: float) -> float:
        for row in self.rows:
            if math.isclose(row["beta"], beta):
                return row["gap"]
        raise KeyError(beta)


def beta_sweep(spec: ProblemSpec, mesh, betas, opts: SolverOptions | None = None, dirichlet: bool = True,
               fd: bool = False) -> SweepReport:
    """``lambda(beta)`` over increasing ``betas`` with the derivative and sandwich columns.

    ``sandwich_lower``/``sandwich_upper`` of a row bracket the difference
    quotient towards the next beta; ``gap`` is the distance to the Dirichlet
    eigenvalue on the same mesh.
    """
    betas = [float(b) for b in betas]
    if not betas or betas[0] <= 0 or any(b1 <= b0 for b0, b1 in zip(betas, betas[1:])):
        raise ValueError("betas must be positive and strictly increasing")
    opts = opts or SolverOptions()
    results = ordered_map(lambda b: solve_first_eigenpair(spec.with_beta(b), mesh, opts), betas)
    lam_d = None
    if dirichlet:
        lam_d = require_converged(solve_dirichlet_first(spec, mesh, opts), "Dirichlet solve").lambda_
    rows = []
    for k, (b, r) in enumerate(zip(betas, results)):
        row = {"beta": b, "lambda": r.lambda_, "converged": r.converged, "residual": r.residual,
               "dldb_formula": boundary_ratio(r.u, spec.p, mesh)}
        if fd and r.converged:
            row["dldb_fd"] = dlambda_dbeta_fd(spec.with_beta(b), mesh, opts, base=r)
            row["rel_err"] = abs(row["dldb_formula"] - row["dldb_fd"]) / max(abs(row["dldb_fd"]), 1e-14)
        if k + 1 < len(betas):
            nxt = results[k + 1]
            row["sandwich_lower"] = boundary_ratio(nxt.u, spec.p, mesh)
            row["sandwich_quotient"] = (nxt.lambda_ - r.lambda_) / (betas[k + 1] - b)
            row["sandwich_upper"] = row["dldb_formula"]
        if lam_d is not None:
            row["gap"] = lam_d - r.lambda_
        rows.append(row)
    lams = [r.lambda_ for r in results]
    increasing = all(b > a for a, b in zip(lams, lams[1:]))
    below = None if lam_d is None else all(x < lam_d for x in lams)
    gaps = None if lam_d is None else [lam_d - x for x in lams]
    gap_dec = None if gaps is None else all(b < a for a, b in zip(gaps, gaps[1:]))
    return SweepReport(rows, lam_d, increasing, below, gap_dec, all(r.converged for r in results))


# --- dilations ---------------------------------------------------------------

def _scaled(mesh, t: float):
    return mesh.scaled(t) if hasattr(mesh, "scaled") else scale_mesh(mesh, t)


def _require_zero_potential(spec: ProblemSpec) -> None:
    if not spec.potential.is_zero:
        raise ValueError("identity stated for V ≡ 0")


@dataclass(frozen=True)
class ScalingReport:
    t: float
    lambda_base: float
    lambda_scaled: float
    rescaled: float
    rel_diff: float

    def to_dict(self) -> dict:
        return {"t": self.t, "lambda_base": self.lambda_base, "lambda_scaled": self.lambda_scaled,
                "rescaled": self.rescaled, "rel_diff": self.rel_diff}


def scaling_identity_check(spec: ProblemSpec, mesh, t: float, opts: SolverOptions | None = None,
                           base: EigenResult | None = None) -> ScalingReport:
    """Compare ``t^p lambda(t Omega, beta / t^(p-1))`` with ``lambda(Omega, beta)``."""
    _require_zero_potential(spec)
    if not t > 0:
        raise ValueError("scale factor must be positive")
    p = spec.p
    base = base or _solve(spec, mesh, opts)
    big = _scaled(mesh, t)
    scaled = _solve(spec.with_beta(spec.beta / t ** (p - 1)).on(big), big, opts, what="solve on scaled domain")
    rescaled = t ** p * scaled.lambda_
    return ScalingReport(t, base.lambda_, scaled.lambda_, rescaled,
                         abs(rescaled - base.lambda_) / max(abs(base.lambda_), 1e-300))


@dataclass(frozen=True)
class MonotonicityReport:
    t: float
    lambda_base: float
    lambda_scaled: float
    middle: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (self.lambda_scaled <= self.middle + self.tolerance
                and self.middle <= self.lambda_base + self.tolerance)

    @property
    def margins(self) -> tuple:
        return self.middle - self.lambda_scaled, self.lambda_base - self.middle

    def to_dict(self) -> dict:
        return {"t": self.t, "lambda_scaled": self.lambda_scaled, "lambda_over_t": self.middle,
                "lambda_base": self.lambda_base, "tolerance": self.tolerance, "pass": self.passed}


def scaled_domain_monotonicity_check(spec: ProblemSpec, mesh, t: float, opts: SolverOptions | None = None,
                                     base: EigenResult | None = None) -> MonotonicityReport:
    """``lambda(t Omega, beta) <= lambda(Omega, beta) / t <= lambda(Omega, beta)`` for ``t >= 1``."""
    _require_zero_potential(spec)
    if not t >= 1:
        raise ValueError("need t >= 1")
    opts = opts or SolverOptions()
    base = base or _solve(spec, mesh, opts)
    big = _scaled(mesh, t)
    scaled = _solve(spec.on(big), big, opts, what="solve on scaled domain")
    tol = 10.0 * opts.tol_lambda * abs(base.lambda_)
    return MonotonicityReport(t, base.lambda_, scaled.lambda_, base.lambda_ / t, tol)


def f_decreasing_check(spec: ProblemSpec, mesh, factor: float | None = None,
                       opts: SolverOptions | None = None) -> dict:
    """``f(beta) = lambda(beta) / beta`` at ``beta`` and ``factor * beta`` (default ``2^(p-1)``)."""
    k = 2.0 ** (spec.p - 1.0) if factor is None else float(factor)
    if not k > 1:
        raise ValueError("factor must exceed 1")
    r0 = _solve(spec, mesh, opts)
    r1 = _solve(spec.with_beta(k * spec.beta), mesh, opts, r0.u)
    f0, f1 = r0.lambda_ / spec.beta, r1.lambda_ / (k * spec.beta)
    return {"beta": spec.beta, "beta2": k * spec.beta, "f": f0, "f2": f1, "decreasing": f1 < f0}

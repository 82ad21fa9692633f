"""How the first eigenvalue depends on the potential.

``lambda(V)`` is an infimum of quotients that are affine in ``V``. Hence it is
nondecreasing in ``V``, 1-Lipschitz in the sup norm, and shifts exactly with
constants. When ``lambda(V) > 0`` the energy controls the full ``W^{1,p}``
norm with an explicit constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Potential, ProblemSpec, potential_sup
from .solver import SolverOptions, energy_for, require_converged, solve_first_eigenpair


class HypothesisError(ValueError):
    pass


def _quad_values(V: Potential, mesh) -> np.ndarray:
    return np.asarray(V(mesh.discretization.vol_points), dtype=float)


def _lam(spec: ProblemSpec, V: Potential, mesh, opts, what: str) -> float:
    return require_converged(solve_first_eigenpair(spec.with_potential(V), mesh, opts), what).lambda_


def _slack(opts: SolverOptions | None, *lams) -> float:
    opts = opts or SolverOptions()
    return 10.0 * opts.tol_lambda * max(1.0, *(abs(x) for x in lams))


@dataclass(frozen=True)
class ComparisonReport:
    lambda1: float
    lambda2: float
    bound: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "lambda2": self.lambda2, "bound": self.bound, "slack": self.slack,
                "pass": self.passed}


def monotonicity_check(V1: Potential, V2: Potential, spec: ProblemSpec, mesh,
                       opts: SolverOptions | None = None) -> ComparisonReport:
    """``V1 <= V2`` at every quadrature point implies ``lambda(V1) <= lambda(V2)``."""
    if np.any(_quad_values(V1, mesh) > _quad_values(V2, mesh)):
        raise ValueError("inputs not ordered")
    l1 = _lam(spec, V1, mesh, opts, "solve with V1")
    l2 = _lam(spec, V2, mesh, opts, "solve with V2")
    slack = _slack(opts, l1, l2)
    return ComparisonReport(l1, l2, 0.0, slack, l1 <= l2 + slack)


def continuity_check(V1: Potential, V2: Potential, spec: ProblemSpec, mesh,
                     opts: SolverOptions | None = None) -> ComparisonReport:
    """``|lambda(V1) - lambda(V2)| <= max |V1 - V2|`` over the quadrature points.

    The Lipschitz bound follows from testing each quotient with the other
    eigenfunction; it is a derived modulus, not an assumption.
    """
    diff = _quad_values(V1, mesh) - _quad_values(V2, mesh)
    if not np.all(np.isfinite(diff)):
        raise ValueError("potentials must be bounded")
    bound = float(np.max(np.abs(diff)))
    l1 = _lam(spec, V1, mesh, opts, "solve with V1")
    l2 = _lam(spec, V2, mesh, opts, "solve with V2")
    slack = _slack(opts, l1, l2)
    return ComparisonReport(l1, l2, bound, slack, abs(l1 - l2) <= bound + slack)


@dataclass(frozen=True)
class ShiftReport:
    lambda_base: float
    lambda_shifted: float
    c: float
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance

    def to_dict(self) -> dict:
        return {"lambda": self.lambda_base, "lambda_shifted": self.lambda_shifted, "c": self.c,
                "error": self.error, "tolerance": self.tolerance, "pass": self.passed}


def shift_identity_check(V: Potential, c: float, spec: ProblemSpec, mesh, opts: SolverOptions | None = None,
                         tolerance: float = 1e-8) -> ShiftReport:
    """``lambda(V + c) - lambda(V) = c`` from identical starts on one mesh."""
    l0 = _lam(spec, V, mesh, opts, "solve with V")
    l1 = _lam(spec, V.shifted(float(c)), mesh, opts, "solve with V + c")
    return ShiftReport(l0, l1, float(c), abs(l1 - l0 - c), tolerance)


@dataclass(frozen=True)
class CoercivityReport:
    lambda1: float
    V_sup: float
    C: float
    M: float
    violations: int
    worst_margin: float
    samples: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "V_sup": self.V_sup, "C": self.C, "M": self.M,
                "violations": self.violations, "worst_margin": self.worst_margin, "samples": self.samples,
                "tolerance": self.tolerance, "pass": self.passed}


def coercivity_constants(lam: float, v_sup: float) -> tuple[float, float]:
    """``C = lambda / (2 (lambda + |V|_inf))`` and ``M = min(C, lambda) / 2``."""
    C = 0.5 * lam / (lam + v_sup)
    return C, 0.5 * min(C, lam)


def coercivity_check(spec: ProblemSpec, mesh, samples: int = 200, seed: int = 0,
                     opts: SolverOptions | None = None, tolerance: float = 1e-10) -> CoercivityReport:
    """Sample ``M (|grad u|_p^p + |u|_p^p) <= int |grad u|^p + int V|u|^p + beta int_bd |u|^p``.

    Test functions have standard normal nodal values. A sample violates the
    inequality when its margin is below ``-tolerance`` times the right side's
    scale.
    """
    lam = require_converged(solve_first_eigenpair(spec, mesh, opts)).lambda_
    if not lam > 0:
        raise HypothesisError("coercivity needs a positive first eigenvalue")
    v_sup = potential_sup(spec, mesh)
    C, M = coercivity_constants(lam, v_sup)
    energy = energy_for(spec, mesh)
    rng = np.random.default_rng(seed)
    violations, worst = 0, np.inf
    for _ in range(int(samples)):
        u = rng.standard_normal(energy.disc.n_nodes)
        grad, pot, bnd, mass = energy.parts(u)
        rhs = grad + pot + spec.beta * bnd
        margin = rhs - M * (grad + mass)
        scale = grad + abs(pot) + spec.beta * bnd + mass
        rel = margin / scale
        worst = min(worst, rel)
        if rel < -tolerance:
            violations += 1
    return CoercivityReport(lam, v_sup, C, M, violations, float(worst), int(samples), tolerance)


def ordered_pairs(count: int = 20, seed: int = 0) -> list[tuple[Potential, Potential]]:
    """Seeded pairs ``V1 <= V2``: random quadratics and a nonnegative bump added on top."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        a, b, c, d = rng.normal(size=4)
        base = f"{a:.6f}*x1**2 + {b:.6f}*x2**2 + {c:.6f}*x1*x2 + {d:.6f}"
        amp, w = abs(rng.normal()), 0.5 + rng.random()
        bump = f"{amp:.6f}*exp(-((x1 - {rng.normal() * 0.3:.6f})**2 + x2**2) / {w:.6f})"
        pairs.append((Potential.expression(base), Potential.expression(f"{base} + {bump}")))
    return pairs


def lipschitz_pairs(count: int = 20, seed: int = 1) -> list[tuple[Potential, Potential]]:
    """Seeded unordered pairs of smooth bounded potentials."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        k1, k2 = rng.normal(size=2)
        a1, a2 = rng.normal(size=2)
        pairs.append((Potential.expression(f"{a1:.6f}*sin({k1:.6f}*x1 + x2)"),
                      Potential.expression(f"{a2:.6f}*cos({k2:.6f}*x2) + {rng.normal() * 0.2:.6f}*x1")))
    return pairs

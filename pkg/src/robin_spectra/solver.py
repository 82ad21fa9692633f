"""First eigenpair by Rayleigh-quotient minimization.

The discrete energy on the unit sphere ``int |u|^p = 1`` is minimized by
projected gradient descent. Each step takes a preconditioned direction (a
weighted P1 Laplacian + Robin + mass operator, frozen at the current
iterate), backtracks until the Armijo condition holds for the candidate
``|u + a d|`` renormalized, and accepts it. Degenerate ``p != 2`` energies are
approached through the regularization
``|grad u|^p -> (|grad u|^2 + eps^2)^(p/2) - eps^p`` along a decreasing eps
schedule. For ``p >= 2`` the schedule ends with the exact energy; for
``p < 2`` it stops at the smallest positive eps and the result solves that
regularized problem.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .model import EigenResult, ProblemSpec, check_spec

log = logging.getLogger(__name__)


# relative size of summation noise in the discrete energy
ROUNDING = 1e-13


class ConvergenceError(RuntimeError):
    """A solve that a check depends on did not converge."""


def require_converged(result: EigenResult, what: str = "solve") -> EigenResult:
    if not result.converged:
        raise ConvergenceError(f"{what} did not converge ({result.message}, residual {result.residual:.3e})")
    return result


@dataclass(frozen=True)
class SolverOptions:
    tol_lambda: float = 1e-13
    tol_residual: float = 1e-9
    max_iter: int = 4000
    epsilon_schedule: tuple | None = None
    n_stages: int = 8
    stage_tol: float = 1e-6
    stage_max_iter: int = 150
    backtrack: float = 0.5
    armijo: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not (self.tol_lambda > 0 and self.tol_residual > 0 and self.stage_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.backtrack < 1 or not 0 < self.armijo < 1:
            raise ValueError("line search parameters must lie in (0, 1)")
        if self.epsilon_schedule is not None:
            eps = list(self.epsilon_schedule)
            if not eps or any(e < 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
                raise ValueError("epsilon schedule must be nonnegative and strictly decreasing")


class Energy:
    """Discrete energy of one problem on one discretization.

    ``N_eps(u) = sum w_c phi_eps(|grad u|) + int V|u|^p + beta int_bd |u|^p`` and
    ``D(u) = int |u|^p``. With ``fixed`` nodes (Dirichlet) the boundary term is
    dropped and those coefficients stay zero.
    """

    def __init__(self, disc, p: float, beta: float, potential_values: np.ndarray, fixed=None):
        self.disc = disc
        self.p = float(p)
        self.beta = float(beta)
        self.vq = np.asarray(potential_values, dtype=float)
        self.pot_weights = np.ascontiguousarray(disc.vol_weights * self.vq)
        self.has_potential = bool(np.any(self.vq != 0.0))
        self.free = np.ones(disc.n_nodes, dtype=bool)
        if fixed is not None:
            self.free[fixed] = False
        self.dirichlet = not self.free.all()
        self.test_norms = disc.test_norms(self.p)

    # --- values ---------------------------------------------------------

    def numerator(self, u, eps=0.0):
        """``N_eps(u)`` and its gradient."""
        g = np.zeros(self.disc.n_nodes)
        e = self.disc.grad_energy(u, self.p, eps, out=g)[0]
        if self.has_potential:
            e += self.disc.volume_power(u, self.p, weights=self.pot_weights, out=g)[0]
        if not self.dirichlet:
            gb = np.zeros(self.disc.n_nodes)
            e += self.beta * self.disc.boundary_power(u, self.p, out=gb)[0]
            g += self.beta * gb
        return e, g

    def denominator(self, u):
        return self.disc.volume_power(u, self.p)

    def parts(self, u):
        grad = self.disc.grad_energy(u, self.p)[0]
        pot = self.disc.volume_power(u, self.p, weights=self.pot_weights)[0] if self.has_potential else 0.0
        bnd = 0.0 if self.dirichlet else self.disc.boundary_power(u, self.p)[0]
        mass = self.denominator(u)[0]
        return grad, pot, bnd, mass

    def quotient(self, u) -> float:
        grad, pot, bnd, mass = self.parts(u)
        return (grad + pot + self.beta * bnd) / mass

    def normalize(self, u):
        u = np.abs(u)
        u[~self.free] = 0.0
        d = self.denominator(u)[0]
        if not d > 0:
            raise ValueError("degenerate test function")
        return u / d ** (1.0 / self.p)

    def objective(self, w, eps) -> float:
        return self.numerator(w, eps)[0] / self.denominator(w)[0]

    def state(self, w, eps):
        """Objective, multiplier and tangent gradient at a normalized ``w``."""
        n, gn = self.numerator(w, eps)
        d, gd = self.denominator(w)
        mu = float(np.dot(gn, w)) / (self.p * d)
        g = (gn - mu * gd) / d
        g[~self.free] = 0.0
        return n / d, mu, g

    def residual_of(self, g) -> float:
        r = np.abs(g[self.free]) / self.p
        return float(np.max(r / self.test_norms[self.free])) if r.size else 0.0

    # --- preconditioner -------------------------------------------------

    def preconditioner(self, w, eps):
        disc, p = self.disc, self.p
        gc = disc.cell_gradients(w)
        s2 = np.einsum("md,md->m", gc, gc) + eps * eps
        gscale2 = float(np.dot(disc.cell_weights, s2) / disc.measure)
        floor2 = max(1e-6 * gscale2, 1e-300)
        cw = np.maximum(s2, floor2) ** (0.5 * p - 1.0)
        ufloor = 1e-3 * float(np.max(np.abs(w)))
        vq = disc.volume_values(w)
        mw = np.maximum(np.abs(vq), ufloor) ** (p - 2.0)
        K = disc.stiffness(cw)
        if not self.dirichlet:
            bq = disc.boundary_values(w)
            K = K + self.beta * disc.boundary_mass(np.maximum(np.abs(bq), ufloor) ** (p - 2.0))
        M = disc.mass(mw)
        shift = max(float(w @ (K @ w)) / float(w @ (M @ w)), 1e-300)
        P = (K + shift * M).tocsc()
        if self.dirichlet:
            idx = np.flatnonzero(self.free)
            P = P[idx][:, idx]
        return splu(P.tocsc())


def gradient_scale(disc, p: float) -> float:
    """``|O|^(-1/p) |dO| / |O|``: a gradient size of Lp-unit functions.

    Geometric only, so every solve on one domain shares one eps schedule and
    dilations map schedules onto each other exactly.
    """
    return disc.measure ** (-1.0 / p) * disc.boundary_measure / disc.measure


def default_schedule(energy: Energy, n_stages: int = 8) -> tuple:
    """``eps_0 = 0.1 * gradient scale``, halved per stage; the exact stage is appended for ``p >= 2``."""
    eps0 = 0.1 * gradient_scale(energy.disc, energy.p)
    stages = tuple(eps0 / 2 ** k for k in range(n_stages))
    return stages + (0.0,) if energy.p >= 2.0 else stages


def final_eps(energy: Energy, n_stages: int = 8) -> float:
    return default_schedule(energy, n_stages)[-1]


def _line_search(energy: Energy, w, d, F, slope, alpha, eps, opts: SolverOptions):
    """Step along ``a -> normalize(|w + a d|)`` accepted by Armijo or approximate Wolfe.

    One trial step, one secant step on the directional derivative, then plain
    backtracking from the shorter of the two. Approximate Wolfe accepts a value
    within rounding of ``F`` when the slope has dropped, so a step may raise the
    objective by at most ``ROUNDING * |F|``. Returns ``(candidate, value, step)``
    or Nones.
    """

    noise = ROUNDING * max(abs(F), 1e-300)

    def phi(a):
        raw = w + a * d
        c = energy.normalize(raw)
        f, _, gc = energy.state(c, eps)
        # gc is tangent at c, so the renormalization only rescales d
        dphi = float(np.dot(gc, d)) * float(np.dot(c, raw) / np.dot(raw, raw))
        return c, f, dphi

    def ok(a, f, dphi):
        if f <= F + opts.armijo * a * slope:
            return True
        # approximate Wolfe: value change below rounding, slope reduced
        return f <= F + noise and abs(dphi) <= 0.9 * abs(slope)

    tried = []
    a0 = alpha
    c0, f0, s0 = phi(a0)
    tried.append((f0, a0, c0, s0))
    if s0 > slope:
        aq = min(max(a0 * slope / (slope - s0), 0.1 * a0), 10.0 * a0)
        cq, fq, sq = phi(aq)
        tried.append((fq, aq, cq, sq))
    good = [t for t in tried if ok(t[1], t[0], t[3])]
    if good:
        f, a, c, _ = min(good, key=lambda t: (t[0], abs(t[3])))
        return c, f, a
    a = min(t[1] for t in tried)
    while a > 1e-18:
        a *= opts.backtrack
        c, f, s = phi(a)
        if ok(a, f, s):
            return c, f, a
    return None, None, None


def _descend(energy: Energy, w, eps, tol_res, tol_lam, max_iter, opts: SolverOptions):
    """One eps stage. Returns (w, F, mu, residual, iterations, trace, converged, message)."""
    F, mu, g = energy.state(w, eps)
    trace = [F]
    res = energy.residual_of(g)
    alpha = 1.0 / energy.p
    free = energy.free
    it = 0
    message = "max_iter reached"
    converged = False
    prev_F = math.inf
    while it < max_iter:
        scale = max(abs(F), abs(mu), 1e-300)
        if res <= tol_res and abs(prev_F - F) <= tol_lam * scale:
            converged, message = True, "converged"
            break
        lu = energy.preconditioner(w, eps)
        d = np.zeros_like(w)
        d[free] = -lu.solve(g[free])
        slope = float(np.dot(g, d))
        if not slope < 0:
            converged = res <= tol_res
            message = "no descent direction"
            break
        cand, Fc, a = _line_search(energy, w, d, F, slope, alpha, eps, opts)
        if cand is None:
            converged = res <= tol_res
            message = "line search stalled"
            break
        alpha = a
        w = cand
        prev_F = F
        F, mu, g = energy.state(w, eps)
        res = energy.residual_of(g)
        trace.append(F)
        it += 1
    return w, F, mu, res, it, trace, converged, message


def minimize(energy: Energy, u0, opts: SolverOptions, schedule=None) -> EigenResult:
    w = energy.normalize(np.asarray(u0, dtype=float).copy())
    if schedule is None:
        schedule = opts.epsilon_schedule if opts.epsilon_schedule is not None else default_schedule(
            energy, opts.n_stages)
    schedule = tuple(float(e) for e in schedule)
    traces, stages = [], []
    total = 0
    converged, message, res, mu = False, "", math.inf, math.nan
    for k, eps in enumerate(schedule):
        last = k == len(schedule) - 1
        budget = opts.max_iter - total if last else min(opts.stage_max_iter, opts.max_iter - total)
        tol_res = opts.tol_residual if last else opts.stage_tol
        tol_lam = opts.tol_lambda if last else 1e-10
        w, F, mu, res, it, trace, converged, message = _descend(energy, w, eps, tol_res, tol_lam, budget, opts)
        total += it
        traces.append(tuple(trace))
        stages.append({"eps": eps, "objective": F, "multiplier": mu, "residual": res, "iterations": it})
        log.debug("stage eps=%.3e F=%.15g res=%.3e it=%d (%s)", eps, F, res, it, message)
    eps = schedule[-1]
    lam = energy.quotient(w) if eps == 0.0 else energy.objective(w, eps)
    return EigenResult(lambda_=float(lam), u=w, normalization="Lp-unit", residual=float(res), iterations=total,
                       converged=bool(converged), p=energy.p, trace=tuple(traces), stages=tuple(stages),
                       message=message, dirichlet=energy.dirichlet, eps=eps)


def energy_for(spec: ProblemSpec, mesh, dirichlet: bool = False) -> Energy:
    disc = mesh.discretization
    vq = spec.potential(disc.vol_points)
    fixed = disc.boundary_nodes if dirichlet else None
    return Energy(disc, spec.p, 0.0 if dirichlet else spec.beta, vq, fixed)


def solve_first_eigenpair(spec: ProblemSpec, mesh, opts: SolverOptions | None = None, u0=None,
                          schedule=None) -> EigenResult:
    """First Robin eigenpair, Lp-unit normalized and nonnegative.

    ``u0`` warm-starts the iteration (default ``u = 1``); warm starts skip the
    regularization stages unless ``schedule`` is given.
    """
    opts = opts or SolverOptions()
    check_spec(spec, mesh)
    energy = energy_for(spec, mesh)
    if u0 is None:
        u0 = np.ones(energy.disc.n_nodes)
    elif schedule is None and opts.epsilon_schedule is None:
        schedule = (final_eps(energy, opts.n_stages),)
    return minimize(energy, u0, opts, schedule)


def solve_dirichlet_first(spec: ProblemSpec, mesh, opts: SolverOptions | None = None, u0=None,
                          schedule=None) -> EigenResult:
    """Same minimization restricted to functions vanishing at boundary nodes."""
    opts = opts or SolverOptions()
    check_spec(spec, mesh)
    energy = energy_for(spec, mesh, dirichlet=True)
    if u0 is None:
        u0 = np.ones(energy.disc.n_nodes)
    elif schedule is None and opts.epsilon_schedule is None:
        schedule = (final_eps(energy, opts.n_stages),)
    return minimize(energy, u0, opts, schedule)


def solve_radial_first(p, beta, V_radial, R=1.0, n=2, size=10_000, opts=None) -> EigenResult:
    """First eigenpair of the radial reduction on a ball (see :mod:`radial`)."""
    from .radial import RadialGrid, radial_lambda1

    return radial_lambda1(p, beta, V_radial, RadialGrid.graded(R, n, size), opts)


def regularized_energy(u, spec: ProblemSpec, mesh, eps: float):
    """``N_eps(u)`` and its analytic gradient (unnormalized ``u``)."""
    return energy_for(spec, mesh).numerator(np.ascontiguousarray(u, dtype=float), eps)


def weak_residual(result: EigenResult, spec: ProblemSpec, mesh, lam: float | None = None) -> float:
    """Max over hat functions of the weak-form defect divided by ``||phi_i||_{W^{1,p}}``.

    ``u`` is taken in Lp-unit normalization and the energy is regularized with
    the result's final ``eps``. ``lam`` defaults to the Lagrange multiplier
    ``<N'(u), u> / p``, which is the result's value when ``eps = 0`` and differs
    from it by O(eps^2) otherwise (the regularized energy is not homogeneous).
    """
    energy = energy_for(spec, mesh, dirichlet=result.dirichlet)
    u = energy.normalize(np.asarray(result.u, dtype=float).copy())
    _, gn = energy.numerator(u, result.eps)
    d, gd = energy.denominator(u)
    if lam is None:
        lam = float(np.dot(gn, u)) / (energy.p * d)
    g = gn - lam * gd
    g[~energy.free] = 0.0
    return energy.residual_of(g)


def residual_scale(result: EigenResult, spec: ProblemSpec, mesh) -> float:
    """``max_i int |u|^(p-1) phi_i / ||phi_i||``: residual produced by a unit eigenvalue error."""
    energy = energy_for(spec, mesh, dirichlet=result.dirichlet)
    u = energy.normalize(np.asarray(result.u, dtype=float).copy())
    _, gd = energy.denominator(u)
    gd[~energy.free] = 0.0
    return energy.residual_of(gd)

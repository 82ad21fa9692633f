"""Radial reduction on balls and the Bessel oracle for the p=2 disk.

On ``B(0, R)`` in R^n with radial ``V`` the first eigenfunction is radial, so
the Rayleigh quotient reduces to

    (int_0^R (|u'|^p + V |u|^p) r^(n-1) dr + beta R^(n-1) |u(R)|^p) / int_0^R |u|^p r^(n-1) dr

which is discretized with P1 elements on a grid graded toward ``r = R`` and
minimized by the same solver as the 2D problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import cached_property

import numpy as np

from .discretize import Discretization
from .model import DomainRef, EigenResult, Potential, ProblemSpec


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Nodes ``0 = r_0 < ... < r_N = R`` with lumped ``r^(n-1) dr`` weights."""

    R: float
    n: int
    nodes: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        if self.n < 2:
            raise ValueError("ball dimension must be at least 2")
        if len(r) < 3 or r[0] != 0.0 or not math.isclose(r[-1], self.R) or np.any(np.diff(r) <= 0):
            raise ValueError("radial nodes must increase strictly from 0 to R")
        r = r.copy()
        r[-1] = self.R
        r.setflags(write=False)
        object.__setattr__(self, "nodes", r)

    @classmethod
    def graded(cls, R: float = 1.0, n: int = 2, size: int = 10_000) -> "RadialGrid":
        """``r = R sin(pi s / 2)`` on a uniform ``s`` grid: fine near the boundary."""
        s = np.linspace(0.0, 1.0, int(size))
        return cls(float(R), int(n), R * np.sin(0.5 * np.pi * s))

    @classmethod
    def uniform(cls, R: float = 1.0, n: int = 2, size: int = 1000) -> "RadialGrid":
        return cls(float(R), int(n), np.linspace(0.0, R, int(size)))

    def scaled(self, t: float) -> "RadialGrid":
        return RadialGrid(self.R * t, self.n, self.nodes * t)

    @property
    def n_vertices(self) -> int:
        return len(self.nodes)

    @cached_property
    def weights(self) -> np.ndarray:
        """``r_i^(n-1)`` times the dual cell length (zero at the origin)."""
        r = self.nodes
        dual = np.zeros_like(r)
        dual[:-1] += 0.5 * np.diff(r)
        dual[1:] += 0.5 * np.diff(r)
        return r ** (self.n - 1) * dual

    @cached_property
    def discretization(self) -> Discretization:
        return Discretization.radial(self.nodes, self.n)

    @property
    def h_max(self) -> float:
        return float(np.max(np.diff(self.nodes)))


def _as_potential(V) -> Potential:
    if V is None:
        return Potential.constant(0.0)
    if isinstance(V, Potential):
        if not V.is_radial:
            raise ValueError("potential must be radial on a ball")
        return V
    if callable(V):
        return Potential.radial_func(V)
    return Potential.constant(float(V))


def radial_spec(p: float, beta: float, V, grid: RadialGrid) -> ProblemSpec:
    return ProblemSpec(float(p), float(beta), _as_potential(V), DomainRef("ball", R=grid.R, n=grid.n))


def radial_lambda1(p: float, beta: float, V, grid: RadialGrid, opts=None) -> EigenResult:
    """First eigenpair of the radial problem; ``u`` holds nodal values on ``grid.nodes``."""
    from .solver import solve_first_eigenpair

    return solve_first_eigenpair(radial_spec(p, beta, V, grid), grid, opts)


# --- Bessel functions of the first kind, orders 0 and 1 ------------------

def _bessel_series(x: float, order: int) -> float:
    # the alternating series cancels heavily for x ~ 10, so sum in 40 digits
    with localcontext() as ctx:
        ctx.prec = 40
        half = Decimal(repr(float(x))) / 2
        q = -half * half
        term = Decimal(1) if order == 0 else half
        total = term
        k = 0
        tiny = Decimal(10) ** -35
        while True:
            k += 1
            term = term * q / (k * (k + order))
            total += term
            if abs(term) < tiny and k > abs(float(half)):
                break
        return float(total)


def bessel_j0(x) -> float | np.ndarray:
    """``J_0`` by its power series; absolute error well below 1e-12 on [0, 12]."""
    if np.ndim(x):
        return np.array([_bessel_series(v, 0) for v in np.ravel(x)]).reshape(np.shape(x))
    return _bessel_series(x, 0)


def bessel_j1(x) -> float | np.ndarray:
    if np.ndim(x):
        return np.array([_bessel_series(v, 1) for v in np.ravel(x)]).reshape(np.shape(x))
    return -_bessel_series(-x, 1) if x < 0 else _bessel_series(x, 1)


def _bisect(f, lo: float, hi: float, tol: float = 1e-15) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"root not bracketed in [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol * max(abs(hi), 1e-300):
            break
    return 0.5 * (lo + hi)


def j0_first_zero() -> float:
    """First positive zero of ``J_0`` (about 2.404826)."""
    return _bisect(bessel_j0, 2.0, 3.0)


def bessel_robin_root(beta: float) -> float:
    """``lambda = s^2`` for the smallest root of ``s J_1(s) = beta J_0(s)``.

    This is the first Robin eigenvalue of the Laplacian on the unit disk. The
    root lies in ``(0, j_01)`` where ``s J_1 - beta J_0`` changes sign once.
    """
    beta = float(beta)
    if not beta > 0:
        raise ValueError("Robin parameter must be positive")
    j01 = j0_first_zero()
    s = _bisect(lambda s: s * bessel_j1(s) - beta * bessel_j0(s), 0.0, j01)
    return s * s

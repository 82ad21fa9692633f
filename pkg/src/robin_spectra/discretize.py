"""Quadrature structure shared by 2D triangle meshes and 1D radial grids.

A :class:`Discretization` reduces every integral of the Rayleigh quotient to
three generic sums over nodal P1 coefficients ``u``:

* cells with constant gradient ``G_c u`` and measure ``w_c``,
* interior quadrature points ``v_q = sum_k phi_qk u[n_qk]`` with weights,
* boundary quadrature points of the same form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import kernels
from .mesh import GAUSS2, Mesh


@dataclass(frozen=True, eq=False)
class Discretization:
    n_nodes: int
    cell_nodes: np.ndarray
    cell_grads: np.ndarray
    cell_weights: np.ndarray
    vol_nodes: np.ndarray
    vol_phi: np.ndarray
    vol_weights: np.ndarray
    vol_points: np.ndarray
    bnd_nodes: np.ndarray
    bnd_phi: np.ndarray
    bnd_weights: np.ndarray
    bnd_points: np.ndarray
    boundary_nodes: np.ndarray
    dim: int = 2

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "Discretization":
        tris = mesh.triangles
        m = len(tris)
        # midpoint of edge (i, i+1) only touches those two nodes
        pairs = np.stack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=1).reshape(-1, 2)
        bnd = mesh.boundary_edges
        bnd_nodes = np.repeat(bnd, 2, axis=0)
        bnd_phi = np.tile(np.column_stack([1.0 - GAUSS2, GAUSS2]), (len(bnd), 1))
        return cls(
            n_nodes=mesh.n_vertices,
            cell_nodes=np.ascontiguousarray(tris),
            cell_grads=mesh.basis_grads,
            cell_weights=np.ascontiguousarray(mesh.areas),
            vol_nodes=np.ascontiguousarray(pairs),
            vol_phi=np.full((3 * m, 2), 0.5),
            vol_weights=np.repeat(mesh.areas / 3.0, 3),
            vol_points=mesh.volume_points.reshape(-1, 2),
            bnd_nodes=np.ascontiguousarray(bnd_nodes),
            bnd_phi=np.ascontiguousarray(bnd_phi),
            bnd_weights=np.repeat(mesh.edge_lengths / 2.0, 2),
            bnd_points=mesh.boundary_points.reshape(-1, 2),
            boundary_nodes=mesh.boundary_vertices,
            dim=2,
        )

    @classmethod
    def radial(cls, nodes: np.ndarray, n: int, gauss_points: int = 3) -> "Discretization":
        """Intervals of ``[0, R]`` with measure ``r^(n-1) dr``.

        Cell measures are exact; interior integrals use Gauss-Legendre with the
        weight folded in. The boundary is the single point ``r = R``.
        """
        r = np.asarray(nodes, dtype=float)
        left, right = r[:-1], r[1:]
        dr = right - left
        cells = np.column_stack([np.arange(len(r) - 1), np.arange(1, len(r))]).astype(np.int64)
        grads = np.stack([-1.0 / dr, 1.0 / dr], axis=1)[:, :, None]
        meas = (right ** n - left ** n) / n
        xg, wg = np.polynomial.legendre.leggauss(gauss_points)
        s = 0.5 * (xg + 1.0)
        pts = left[:, None] + s[None, :] * dr[:, None]
        w = 0.5 * wg[None, :] * dr[:, None] * pts ** (n - 1)
        R = r[-1]
        return cls(
            n_nodes=len(r),
            cell_nodes=cells,
            cell_grads=np.ascontiguousarray(grads),
            cell_weights=np.ascontiguousarray(meas),
            vol_nodes=np.ascontiguousarray(np.repeat(cells, gauss_points, axis=0)),
            vol_phi=np.ascontiguousarray(np.column_stack([np.tile(1.0 - s, len(dr)), np.tile(s, len(dr))])),
            vol_weights=w.ravel(),
            vol_points=pts.reshape(-1, 1),
            bnd_nodes=np.array([[len(r) - 1]], dtype=np.int64),
            bnd_phi=np.array([[1.0]]),
            bnd_weights=np.array([R ** (n - 1)]),
            bnd_points=np.array([[R]]),
            boundary_nodes=np.array([len(r) - 1], dtype=np.int64),
            dim=1,
        )

    # --- energy pieces --------------------------------------------------

    def grad_energy(self, u, p, eps=0.0, out=None):
        """``sum_c w_c [(|grad u|^2 + eps^2)^(p/2) - eps^p]`` and its gradient."""
        g = np.zeros(self.n_nodes) if out is None else out
        e = kernels.cell_energy(self.cell_nodes, self.cell_grads, self.cell_weights, u, float(p), float(eps), g)
        return e, g

    def volume_power(self, u, p, weights=None, out=None):
        """``sum_q w_q |u_q|^p``; ``weights`` defaults to the plain measure."""
        g = np.zeros(self.n_nodes) if out is None else out
        w = self.vol_weights if weights is None else weights
        e = kernels.quad_energy(self.vol_nodes, self.vol_phi, w, u, float(p), g)
        return e, g

    def boundary_power(self, u, p, out=None):
        g = np.zeros(self.n_nodes) if out is None else out
        e = kernels.quad_energy(self.bnd_nodes, self.bnd_phi, self.bnd_weights, u, float(p), g)
        return e, g

    # --- helpers --------------------------------------------------------

    def cell_gradients(self, u) -> np.ndarray:
        return np.einsum("mkd,mk->md", self.cell_grads, u[self.cell_nodes])

    def volume_values(self, u) -> np.ndarray:
        return np.einsum("qk,qk->q", self.vol_phi, u[self.vol_nodes])

    def boundary_values(self, u) -> np.ndarray:
        return np.einsum("qk,qk->q", self.bnd_phi, u[self.bnd_nodes])

    def lp_norm_p(self, u, p) -> float:
        return float(np.dot(self.vol_weights, np.abs(self.volume_values(u)) ** p))

    @cached_property
    def measure(self) -> float:
        return float(self.cell_weights.sum())

    @cached_property
    def boundary_measure(self) -> float:
        return float(self.bnd_weights.sum())

    def test_norms(self, p: float) -> np.ndarray:
        """``(int |grad phi_i|^p + int |phi_i|^p)^(1/p)`` for every hat function."""
        gnorm = np.linalg.norm(self.cell_grads, axis=2) ** p
        grad_part = np.bincount(self.cell_nodes.ravel(), (gnorm * self.cell_weights[:, None]).ravel(),
                                minlength=self.n_nodes)
        mass_part = np.bincount(self.vol_nodes.ravel(), (self.vol_phi ** p * self.vol_weights[:, None]).ravel(),
                                minlength=self.n_nodes)
        return (grad_part + mass_part) ** (1.0 / p)

    # --- sparse operators (preconditioning, linear oracles) -------------

    @cached_property
    def _cell_pattern(self):
        k = self.cell_nodes.shape[1]
        rows = np.repeat(self.cell_nodes, k, axis=1).ravel()
        cols = np.tile(self.cell_nodes, (1, k)).ravel()
        local = np.einsum("mad,mbd->mab", self.cell_grads, self.cell_grads) * self.cell_weights[:, None, None]
        return rows, cols, local.reshape(len(self.cell_nodes), -1)

    @staticmethod
    def _quad_pattern(nodes, phi, weights):
        k = nodes.shape[1]
        rows = np.repeat(nodes, k, axis=1).ravel()
        cols = np.tile(nodes, (1, k)).ravel()
        local = np.einsum("qa,qb->qab", phi, phi) * weights[:, None, None]
        return rows, cols, local.reshape(len(nodes), -1)

    @cached_property
    def _vol_pattern(self):
        return self._quad_pattern(self.vol_nodes, self.vol_phi, self.vol_weights)

    @cached_property
    def _bnd_pattern(self):
        return self._quad_pattern(self.bnd_nodes, self.bnd_phi, self.bnd_weights)

    def _assemble(self, pattern, scale=None):
        rows, cols, local = pattern
        data = local if scale is None else local * scale[:, None]
        return sp.csr_matrix((data.ravel(), (rows, cols)), shape=(self.n_nodes, self.n_nodes))

    def stiffness(self, cell_scale=None):
        return self._assemble(self._cell_pattern, cell_scale)

    def mass(self, point_scale=None):
        return self._assemble(self._vol_pattern, point_scale)

    def boundary_mass(self, point_scale=None):
        return self._assemble(self._bnd_pattern, point_scale)

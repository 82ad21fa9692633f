"""Pure numpy implementation of the energy kernels.

Signatures mirror the compiled ``_kernels`` module exactly; the public
selection happens in :mod:`robin_spectra.kernels`.
"""

import numpy as np


def cell_energy(cell_nodes, cell_grads, cell_weights, u, p, eps, out_grad):
    """Regularized gradient energy ``sum_c w_c [(|G_c u|^2 + eps^2)^(p/2) - eps^p]``.

    The gradient with respect to ``u`` is *added* to ``out_grad``.
    """
    g = np.einsum("mkd,mk->md", cell_grads, u[cell_nodes])
    s2 = np.einsum("md,md->m", g, g) + eps * eps
    energy = float(np.dot(cell_weights, s2 ** (0.5 * p))) - eps ** p * float(cell_weights.sum())
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = p * cell_weights * s2 ** (0.5 * p - 1.0)
    coef[s2 == 0.0] = 0.0
    contrib = np.einsum("mkd,md->mk", cell_grads, g) * coef[:, None]
    out_grad += np.bincount(cell_nodes.ravel(), contrib.ravel(), minlength=out_grad.shape[0])
    return energy


def quad_energy(q_nodes, q_phi, q_weights, u, p, out_grad):
    """Power energy ``sum_q w_q |(I u)_q|^p``; gradient added to ``out_grad``."""
    v = np.einsum("qk,qk->q", q_phi, u[q_nodes])
    a = np.abs(v)
    energy = float(np.dot(q_weights, a ** p))
    with np.errstate(divide="ignore", invalid="ignore"):
        dv = p * q_weights * a ** (p - 1.0) * np.sign(v)
    dv[a == 0.0] = 0.0
    out_grad += np.bincount(q_nodes.ravel(), (q_phi * dv[:, None]).ravel(), minlength=out_grad.shape[0])
    return energy

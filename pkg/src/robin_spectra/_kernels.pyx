# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled energy kernels (fused element loops, no temporaries)."""

from libc.math cimport pow, fabs


def cell_energy(const long[:, ::1] cell_nodes, const double[:, :, ::1] cell_grads,
                const double[::1] cell_weights, const double[::1] u,
                double p, double eps, double[::1] out_grad):
    cdef Py_ssize_t m = cell_nodes.shape[0]
    cdef Py_ssize_t k = cell_nodes.shape[1]
    cdef Py_ssize_t d = cell_grads.shape[2]
    cdef Py_ssize_t c, a, j
    cdef double energy = 0.0, wsum = 0.0
    cdef double s2, coef, uj, dot
    cdef double eps2 = eps * eps
    cdef double half_p = 0.5 * p
    cdef double g[3]
    if d > 3:
        raise ValueError("cell gradients limited to 3 dimensions")
    for c in range(m):
        for j in range(d):
            g[j] = 0.0
        for a in range(k):
            uj = u[cell_nodes[c, a]]
            for j in range(d):
                g[j] += cell_grads[c, a, j] * uj
        s2 = eps2
        for j in range(d):
            s2 += g[j] * g[j]
        wsum += cell_weights[c]
        if s2 == 0.0:
            continue
        if p == 2.0:
            energy += cell_weights[c] * s2
            coef = 2.0 * cell_weights[c]
        else:
            coef = pow(s2, half_p - 1.0)
            energy += cell_weights[c] * coef * s2
            coef *= p * cell_weights[c]
        for a in range(k):
            dot = 0.0
            for j in range(d):
                dot += cell_grads[c, a, j] * g[j]
            out_grad[cell_nodes[c, a]] += coef * dot
    return energy - pow(eps, p) * wsum


def quad_energy(const long[:, ::1] q_nodes, const double[:, ::1] q_phi,
                const double[::1] q_weights, const double[::1] u,
                double p, double[::1] out_grad):
    cdef Py_ssize_t nq = q_nodes.shape[0]
    cdef Py_ssize_t k = q_nodes.shape[1]
    cdef Py_ssize_t q, a
    cdef double energy = 0.0
    cdef double v, av, t, dv
    for q in range(nq):
        v = 0.0
        for a in range(k):
            v += q_phi[q, a] * u[q_nodes[q, a]]
        av = fabs(v)
        if av == 0.0:
            continue
        if p == 2.0:
            energy += q_weights[q] * v * v
            dv = 2.0 * q_weights[q] * v
        else:
            t = pow(av, p - 1.0)
            energy += q_weights[q] * t * av
            dv = p * q_weights[q] * t
            if v < 0.0:
                dv = -dv
        for a in range(k):
            out_grad[q_nodes[q, a]] += q_phi[q, a] * dv
    return energy

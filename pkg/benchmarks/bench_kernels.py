"""Compare the compiled and numpy energy kernels on disk meshes.

Usage: python3 benchmarks/bench_kernels.py [--h 0.05 0.025] [--repeat 20]
"""

import argparse
import logging
import timeit

import numpy as np

from robin_spectra import _kernels_py
from robin_spectra.mesh import generate_disk_mesh

log = logging.getLogger("bench")

try:
    from robin_spectra import _kernels as _compiled
except ImportError:
    _compiled = None


def time_backend(impl, disc, u, p, eps, repeat):
    g = np.zeros(disc.n_nodes)

    def run():
        g[:] = 0.0
        impl.cell_energy(disc.cell_nodes, disc.cell_grads, disc.cell_weights, u, p, eps, g)
        impl.quad_energy(disc.vol_nodes, disc.vol_phi, disc.vol_weights, u, p, g)
        impl.quad_energy(disc.bnd_nodes, disc.bnd_phi, disc.bnd_weights, u, p, g)

    run()
    best = min(timeit.repeat(run, number=1, repeat=repeat))
    e = impl.cell_energy(disc.cell_nodes, disc.cell_grads, disc.cell_weights, u, p, eps, np.zeros(disc.n_nodes))
    return best, e


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--h", type=float, nargs="+", default=[0.05, 0.025])
    parser.add_argument("--p", type=float, default=2.5)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    if _compiled is None:
        log.warning("compiled extension not built; timing the numpy kernels only")
    rng = np.random.default_rng(0)
    print(f"{'h':>7} {'nodes':>7} {'python ms':>10} {'cython ms':>10} {'speedup':>8} {'|dE|/E':>9}")
    for h in args.h:
        disc = generate_disk_mesh(1.0, h).discretization
        u = 1.0 + 0.1 * rng.standard_normal(disc.n_nodes)
        t_py, e_py = time_backend(_kernels_py, disc, u, args.p, 1e-3, args.repeat)
        if _compiled is None:
            print(f"{h:7.3f} {disc.n_nodes:7d} {1e3 * t_py:10.3f} {'-':>10} {'-':>8} {'-':>9}")
            continue
        t_cy, e_cy = time_backend(_compiled, disc, u, args.p, 1e-3, args.repeat)
        print(f"{h:7.3f} {disc.n_nodes:7d} {1e3 * t_py:10.3f} {1e3 * t_cy:10.3f} {t_py / t_cy:8.2f} "
              f"{abs(e_py - e_cy) / abs(e_py):9.1e}")


if __name__ == "__main__":
    main()

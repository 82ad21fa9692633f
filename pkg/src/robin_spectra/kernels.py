"""Backend selection for the energy kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Setting ``ROBIN_SPECTRA_PURE=1`` forces the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("ROBIN_SPECTRA_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

cell_energy = _impl.cell_energy
quad_energy = _impl.quad_energy

__all__ = ["BACKEND", "cell_energy", "quad_energy"]

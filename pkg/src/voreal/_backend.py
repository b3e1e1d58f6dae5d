"""Pick the compiled kernels when available, the numpy twins otherwise.

Set ``VOREAL_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels as python_kernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("VOREAL_PURE_PYTHON", "") not in ("1", "true"):
    kernels = compiled_kernels
    BACKEND = "cython"
else:
    kernels = python_kernels
    BACKEND = "python"

nearest_sites = kernels.nearest_sites
cell_areas_2d = kernels.cell_areas_2d
grouped_hull_areas_2d = kernels.grouped_hull_areas_2d

"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the numpy
fallback. ``HUCKEL_VQD_BACKEND=python`` forces the fallback.
"""

import os

from . import _pykernels as python_kernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("HUCKEL_VQD_BACKEND", "").lower() != "python":
    kernels = compiled_kernels
    NAME = "compiled"
else:
    kernels = python_kernels
    NAME = "python"

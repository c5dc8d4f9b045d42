"""Hot tree kernels, compiled when available.

The Cython extension is used if it was built; otherwise, or when the
environment variable ``MARKETRANK_PURE`` is set to a non-empty value, the
numpy implementations are used.  ``BACKEND`` names the active choice.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
try:
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("MARKETRANK_PURE"):
    _active = compiled_backend
    BACKEND = "cython"
else:
    _active = python_backend
    BACKEND = "python"

integrate = _active.integrate
child_average = _active.child_average
backward_induction = _active.backward_induction
gram_schmidt = _active.gram_schmidt

__all__ = [
    "BACKEND",
    "backward_induction",
    "child_average",
    "compiled_backend",
    "gram_schmidt",
    "integrate",
    "python_backend",
]

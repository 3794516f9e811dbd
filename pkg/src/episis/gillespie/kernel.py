"""Kernel selection: compiled extension when available, pure Python
otherwise.  Both produce identical streams; see ``rng.py``."""

try:
    from . import _kernel as impl
    COMPILED = True
except ImportError:  # extension not built
    from . import _kernel_py as impl
    COMPILED = False

"""Kernel backend selection.

`_core` is a single source file.  When the package was built with the
optional Cython extension (``python setup.py build_ext --inplace`` or
``pip install -e .[speed]``), the import below picks up the compiled
module; otherwise the plain interpreter runs the same code.
"""
from ._core import (CON, FUN, STALL_BUDGET, STALL_NOMATCH, VAR, WHNF,
                    KernelSession)
from ._core import COMPILED as KERNEL_COMPILED

KERNEL_BACKEND = "compiled" if KERNEL_COMPILED else "pure"

__all__ = [
    "KernelSession", "VAR", "CON", "FUN",
    "WHNF", "STALL_NOMATCH", "STALL_BUDGET",
    "KERNEL_BACKEND", "KERNEL_COMPILED",
]

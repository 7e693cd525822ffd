"""Optional compiled build of the rewrite kernel.

`coeq.kernel._core` is plain Python that also compiles under Cython's
pure-Python mode.  When Cython and a C toolchain are available the kernel
is built as an extension and `coeq.kernel` picks it up automatically; the
interpreter version of the same source is the fallback.

    python3 setup.py build_ext --inplace   # compile in a source checkout
    COEQ_PURE=1 pip install .              # force the pure build
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("COEQ_PURE") != "1":
    try:
        from Cython.Build import cythonize
        ext_modules = cythonize(
            [Extension("coeq.kernel._core", ["src/coeq/kernel/_core.py"])],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)

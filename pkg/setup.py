"""Build the optional compiled core; installation falls back to pure Python without it."""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QFI_LAB_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("qfi_lab._jetc", ["src/qfi_lab/_jetc.pyx"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)

"""Build script: compiles the optional range-coder extension.

The package works without the extension (a pure-Python backend is selected
at import time); a failed compile therefore must not fail the install.
"""

from setuptools import setup, Extension

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "jdnd.entropy._rangecoder_cy",
                ["src/jdnd/entropy/_rangecoder_cy.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)

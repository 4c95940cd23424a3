"""Build hook for the optional compiled scanner.

The package is pure Python.  If Cython and a C compiler are present the
line scanner is additionally built as an extension module; when the build
fails or the import fails later, the pure implementation is used instead.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    extensions = []
else:
    extensions = cythonize(
        [Extension("gtrans.lexer._speedups", ["src/gtrans/lexer/_speedups.pyx"])],
        compiler_directives={"language_level": "3"},
    )

for ext in extensions:
    ext.optional = True

setup(ext_modules=extensions)

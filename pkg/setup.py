"""Build script: compiles the optional simplex pivot kernel.

The package is pure Python plus one optional Cython extension
(``coneccp._simplex_cy``).  If Cython or a C compiler is unavailable the
install still succeeds and the numpy fallback kernel is used at import time.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Never fail the install because the accelerator did not compile."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping compiled kernel ({exc!r})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc!r}); "
                  "the pure-python kernel will be used")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not installed; building without compiled kernel")
        return []
    return cythonize(
        [Extension("coneccp._simplex_cy", ["src/coneccp/_simplex_cy.pyx"])],
        language_level="3",
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the kernels if a compiler is available; the numpy fallback covers failures."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover
            print(f"warning: compiled kernels not built ({exc}); using the numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover
            print(f"warning: failed to build {ext.name} ({exc}); using the numpy fallback")


try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        ["src/qwqram/_core/_ckernels.pyx"],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.extra_compile_args.append("-O3")
except ImportError:  # pragma: no cover
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})

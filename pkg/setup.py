from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "episis.gillespie._kernel",
                ["src/episis/gillespie/_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # pure-Python fallback kernel is used when the extension is absent
    ext_modules = []

setup(ext_modules=ext_modules)

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # no Cython: install the pure-Python fallback only
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("newshawkes._core", ["src/newshawkes/_core.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)

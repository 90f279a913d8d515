from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
except ImportError:  # the pure-Python kernels are used instead
    pass
else:
    ext_modules = cythonize(
        [Extension("depsess.constraints._kernel", ["src/depsess/constraints/_kernel.pyx"])],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )

setup(ext_modules=ext_modules)

"""Dependent session types: constraint solver, type checker and pool runtime."""

from .program import CheckedProgram, check_program, load

__version__ = "0.1.0"

__all__ = ["CheckedProgram", "check_program", "load", "__version__"]

from .parser import Program, StypeDef, parse_program, parse_static, parse_term
from .printer import print_program, print_term
from .reader import ParseError

__all__ = [
    "ParseError",
    "Program",
    "StypeDef",
    "parse_program",
    "parse_static",
    "parse_term",
    "print_program",
    "print_term",
]

"""Cyclic equational prover for functional programs."""

from ._core import (
    AssumptionError,
    Error,
    ParseError,
    ProofError,
    Program,
    __version__,
    check,
    normalize,
    parse_file,
    parse_program,
    prove,
    ri_prove,
    run,
)

__all__ = [
    "AssumptionError",
    "Error",
    "ParseError",
    "ProofError",
    "Program",
    "__version__",
    "check",
    "normalize",
    "parse_file",
    "parse_program",
    "prove",
    "ri_prove",
    "run",
]

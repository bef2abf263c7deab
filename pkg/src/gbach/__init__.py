"""Coordination-language toolkit: interpreter, model checker and guarded-list refinement."""

from .checker import Limits, Trace, Verdict, check, enumerate_space, replay
from .errors import GBachError, ProgramError
from .parser import parse_agent, parse_formula, parse_program, parse_prop, parse_term
from .semantics import Config, Engine, successors
from .syntax import Program, format_program
from .terms import Store, canonical_encode, rewrite

__all__ = [
    "Config", "Engine", "GBachError", "Limits", "Program", "ProgramError", "Store", "Trace", "Verdict",
    "canonical_encode", "check", "enumerate_space", "format_program", "parse_agent", "parse_formula",
    "parse_program", "parse_prop", "parse_term", "replay", "rewrite", "successors",
]

__version__ = "0.1.0"

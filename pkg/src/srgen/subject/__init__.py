"""Subject-language front end: parsing, checking and static analysis."""
from .analysis import (
    ControlDependencyGraph, CoverageGoal, StaticModel, build_cdg,
    extract_goals, static_call_closure,
)
from .lexer import DuplicateError, KindError, ParseError, ResolutionError, SubjectError
from .nodes import CONSTRUCTOR, MethodDecl, SubjectUnit
from .parser import parse_subject, parse_subject_file
from .printer import print_subject

__all__ = [
    "CONSTRUCTOR", "ControlDependencyGraph", "CoverageGoal", "DuplicateError",
    "KindError", "MethodDecl", "ParseError", "ResolutionError", "StaticModel",
    "SubjectError", "SubjectUnit", "build_cdg", "extract_goals",
    "parse_subject", "parse_subject_file", "print_subject",
    "static_call_closure",
]

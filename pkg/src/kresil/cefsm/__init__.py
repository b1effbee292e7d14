"""CEFSM modeling frontend: parse replicated machine templates with shared
counters and rendezvous channels, then compile them (via counter abstraction)
into explicit transition systems."""

from .compiler import (
    CompileError,
    StateSpaceCapExceeded,
    compile_explicit,
    compile_model,
)
from .model import (
    CefsmError,
    CefsmModel,
    CefsmStaticError,
    CefsmSyntaxError,
    Expr,
    LocalTransition,
    SharedVar,
    Template,
    Update,
)
from .parser import parse

__all__ = [
    "CefsmError",
    "CefsmModel",
    "CefsmStaticError",
    "CefsmSyntaxError",
    "CompileError",
    "Expr",
    "LocalTransition",
    "SharedVar",
    "StateSpaceCapExceeded",
    "Template",
    "Update",
    "compile_explicit",
    "compile_model",
    "parse",
]

"""Abstraction lattices of transition systems, CTL model checking, and the
modal logic of refining abstractions over finite classes of systems."""

from .ctl import check_ctl, parse_ctl
from .errors import EvaluationError, FormatError, InvariantError, MlarError, ParseError
from .general_frame import build_general_frame, enumerate_abstractions, valid_on_general
from .modal import KripkeFrame, parse_modal, valid_on_frame
from .ts import TransitionSystem, find_abstraction, is_abstraction

__all__ = [
    "check_ctl", "parse_ctl", "EvaluationError", "FormatError", "InvariantError", "MlarError",
    "ParseError", "build_general_frame", "enumerate_abstractions", "valid_on_general",
    "KripkeFrame", "parse_modal", "valid_on_frame", "TransitionSystem", "find_abstraction",
    "is_abstraction",
]
__version__ = "0.1.0"

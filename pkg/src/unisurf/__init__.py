"""Branched coverings of the 4-ball over labelled ribbon surfaces.

Permutation algebra, labelled ribbon diagrams, a covering-move calculus
with checked preconditions, and the construction turning a braided Kirby
diagram into a covering branched over a fixed five-component surface.
"""

from .perm import Permutation, orbits
from .diagram import Band, Event, LabelledDiagram, Piece, validate
from .kirby import KirbyInput
from .lift import coherence_check, covering_connected, covering_euler_char
from .moves import MoveError, MoveRecord, run_move
from .pipeline import check_template, end_to_end
from .dsl import dump, parse

__all__ = [
    "Permutation", "orbits", "Band", "Event", "LabelledDiagram", "Piece", "validate",
    "KirbyInput", "coherence_check", "covering_connected", "covering_euler_char",
    "MoveError", "MoveRecord", "run_move", "check_template", "end_to_end", "dump", "parse",
]
__version__ = "0.1.0"

"""CTC alignment, loss, brute-force oracle and best-path decoders."""
from .automaton import CTCAutomaton, build_automaton, collapse, collapse_indices
from .decode import (
    BestPath,
    ParagraphResult,
    StopPolicy,
    best_path_decode,
    paragraph_decode,
    span_decode,
)
from .io import read_lattices, write_lattices
from .loss import brute_force_prob, ctc_loss, ctc_loss_grad, validate_lattice

__all__ = [
    "BestPath",
    "CTCAutomaton",
    "ParagraphResult",
    "StopPolicy",
    "best_path_decode",
    "brute_force_prob",
    "build_automaton",
    "collapse",
    "collapse_indices",
    "ctc_loss",
    "ctc_loss_grad",
    "paragraph_decode",
    "read_lattices",
    "span_decode",
    "validate_lattice",
    "write_lattices",
]

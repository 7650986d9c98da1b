"""Random heaps on Z_m x Z+: simulation, run statistics and analytic bounds."""

from .heap import (
    CHAINS,
    ConfigChain,
    Heap,
    Piece,
    blocking_chain,
    level_decomposition,
    make_config,
    new_heap,
    validate,
)
from .process import ProcessConfig, Trajectory, drift_estimate, run
from .words import Word, heap_to_word, normalize, parse_word, word_to_heap, words_equal

__all__ = [
    "CHAINS",
    "ConfigChain",
    "Heap",
    "Piece",
    "ProcessConfig",
    "Trajectory",
    "Word",
    "blocking_chain",
    "drift_estimate",
    "heap_to_word",
    "level_decomposition",
    "make_config",
    "new_heap",
    "normalize",
    "parse_word",
    "run",
    "validate",
    "word_to_heap",
    "words_equal",
]

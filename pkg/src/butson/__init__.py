"""Exact verification, construction and search for Butson-type Hadamard matrices."""

from .bmatrix import ExponentMatrix, VerificationReport, dephase, verify_bh
from .cyclo import CycElem, cyclotomic_poly
from .fixtures import w19
from .petrescu import PetrescuBlocks, assemble, extract_blocks
from .search import SearchConfig, SearchOutcome, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "CycElem",
    "ExponentMatrix",
    "PetrescuBlocks",
    "SearchConfig",
    "SearchOutcome",
    "VerificationReport",
    "assemble",
    "cyclotomic_poly",
    "dephase",
    "extract_blocks",
    "run_pipeline",
    "verify_bh",
    "w19",
]

"""Built-in matrices: the BH(19, 6) witness and small reference cases."""

from __future__ import annotations

import hashlib

from .bmatrix import ExponentMatrix, format_grid, parse_grid

__all__ = ["W19", "W19_SHA256", "w19", "named", "NAMES", "grid_sha256"]

# Exponent j encodes exp(2*pi*i*j/6).  Block partition is 6 | 6 | 7.
W19 = """\
q 6 n 19
3 0 1 1 0 0 5 4 3 5 3 2 1 1 3 5 4 3 0
0 0 1 3 3 1 4 2 4 5 1 5 1 4 3 3 1 5 0
0 0 1 4 2 4 2 4 3 2 4 1 3 3 1 4 5 1 0
1 2 4 2 1 2 4 4 2 4 5 0 3 5 1 1 3 4 0
2 5 4 3 2 0 4 2 0 1 4 2 4 1 5 3 1 3 0
0 3 5 4 5 0 4 5 3 1 3 4 5 3 4 1 3 1 0
5 4 3 5 3 2 3 0 1 1 0 0 1 1 3 5 4 3 0
4 2 4 5 1 5 0 0 1 3 3 1 1 4 3 3 1 5 0
2 4 3 2 4 1 0 0 1 4 2 4 3 3 1 4 5 1 0
4 4 2 4 5 0 1 2 4 2 1 2 3 5 1 1 3 4 0
4 2 0 1 4 2 2 5 4 3 2 0 4 1 5 3 1 3 0
4 5 3 1 3 4 0 3 5 4 5 0 5 3 4 1 3 1 0
5 5 3 3 2 1 5 5 3 3 2 1 0 0 0 0 1 1 3
5 2 3 1 5 3 5 2 3 1 5 3 0 0 1 3 0 1 0
3 3 5 5 1 2 3 3 5 5 1 2 1 3 0 0 0 1 0
1 3 2 5 3 5 1 3 2 5 3 5 0 1 0 1 0 4 1
2 5 1 3 5 3 2 5 1 3 5 3 1 0 4 1 1 0 0
3 1 5 2 3 5 3 1 5 2 3 5 1 0 1 0 4 0 1
0 0 0 0 0 0 0 0 0 0 0 0 4 1 1 0 1 0 0
"""

# sha256 of the headerless canonical grid (rows joined by newlines, trailing newline)
W19_SHA256 = "065c032a7ac52b59e6c35104ec1f980c4c5e45df20279704bc3b532ae9906ab4"


def grid_sha256(M: ExponentMatrix) -> str:
    return hashlib.sha256(format_grid(M, header=False).encode()).hexdigest()


def w19() -> ExponentMatrix:
    M = parse_grid(W19)
    digest = grid_sha256(M)
    if digest != W19_SHA256:
        raise RuntimeError(f"W19 fixture checksum mismatch: {digest}")
    return M


NAMES = ("w19",)


def named(name: str) -> ExponentMatrix:
    """Look up a built-in matrix by name (the CLI spells it ``@w19``)."""
    key = name.lstrip("@").lower()
    if key == "w19":
        return w19()
    raise KeyError(f"unknown built-in matrix {name!r}; known: {', '.join(NAMES)}")

"""Matrices of q-th roots of unity stored by exponent.

Entry ``j`` stands for exp(2*pi*i*j/q).  Everything here is exact: inner
products are exponent-difference count vectors reduced modulo Phi_q.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .cyclo import CycElem, reduction_table

__all__ = [
    "ExponentMatrix",
    "GridParseError",
    "VerificationReport",
    "Permute",
    "Scale",
    "inner_product",
    "verify_bh",
    "dephase",
    "equivalence_move",
    "conj_transpose",
    "fourier",
    "product_counts",
    "reduce_counts",
    "parse_grid",
    "format_grid",
    "to_document",
    "from_document",
    "dumps_document",
    "loads_document",
    "load_matrix",
    "FORMAT_VERSION",
]

FORMAT_VERSION = 1


class ExponentMatrix:
    """Immutable rectangular matrix of exponents modulo ``q``."""

    __slots__ = ("q", "_a")

    def __init__(self, q: int, entries):
        if q < 1:
            raise ValueError(f"q must be positive, got {q}")
        a = np.array(entries, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise ValueError(f"expected a nonempty 2-d grid, got shape {a.shape}")
        if a.min() < 0 or a.max() >= q:
            raise ValueError(f"entries must lie in 0..{q - 1}")
        a.setflags(write=False)
        self.q = int(q)
        self._a = a

    @classmethod
    def _wrap(cls, q: int, a: np.ndarray) -> "ExponentMatrix":
        # trusted constructor, a already reduced mod q
        m = cls.__new__(cls)
        a = np.ascontiguousarray(a, dtype=np.int64)
        a.setflags(write=False)
        m.q = int(q)
        m._a = a
        return m

    @property
    def array(self) -> np.ndarray:
        """Read-only int64 view of the exponents."""
        return self._a

    @property
    def n_rows(self) -> int:
        return self._a.shape[0]

    @property
    def n_cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def __getitem__(self, idx):
        return self._a[idx]

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def submatrix(self, rows: slice, cols: slice) -> "ExponentMatrix":
        return ExponentMatrix._wrap(self.q, self._a[rows, cols])

    def with_entry(self, i: int, j: int, value: int) -> "ExponentMatrix":
        a = self._a.copy()
        a[i, j] = value % self.q
        return ExponentMatrix._wrap(self.q, a)

    def to_complex(self) -> np.ndarray:
        return np.exp(2j * np.pi * self._a / self.q)

    def __eq__(self, other):
        if not isinstance(other, ExponentMatrix):
            return NotImplemented
        return self.q == other.q and np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash((self.q, self._a.shape, self._a.tobytes()))

    def __repr__(self):
        return f"ExponentMatrix(q={self.q}, shape={self.shape})"

    def __str__(self):
        return format_grid(self, header=False).rstrip("\n")


def product_counts(A: np.ndarray, B: np.ndarray, q: int) -> np.ndarray:
    """Count vectors of the root-matrix product ``A @ B``.

    ``A`` is (n, k) and ``B`` is (k, m), both exponent arrays.  Returns an
    int64 array of shape (n, m, q) whose [i, j, e] entry counts the ``c``
    with A[i, c] + B[c, j] == e (mod q).
    """
    e = (A[:, :, None] + B[None, :, :]) % q
    onehot = np.zeros(e.shape + (q,), dtype=np.int64)
    np.put_along_axis(onehot, e[..., None], 1, axis=-1)
    return onehot.sum(axis=1)


def reduce_counts(counts: np.ndarray, q: int) -> np.ndarray:
    """Reduce count vectors (last axis of length q) modulo Phi_q."""
    return counts @ reduction_table(q)


def _conj_t(a: np.ndarray, q: int) -> np.ndarray:
    return (-a.T) % q


def inner_product(M: ExponentMatrix, i: int, k: int) -> CycElem:
    """Row inner product <row i, row k> as an unreduced count vector."""
    n = M.n_rows
    if not (0 <= i < n and 0 <= k < n):
        raise IndexError(f"row index out of range for {n} rows: {i}, {k}")
    diff = (M[i] - M[k]) % M.q
    return CycElem(M.q, tuple(np.bincount(diff, minlength=M.q).tolist()))


@dataclass
class VerificationReport:
    """Outcome of :func:`verify_bh`.

    ``violations`` lists every row pair (i, k), i < k, whose inner product
    is nonzero, sorted by (i, k).  ``column_violations`` is the same for
    columns; for square matrices of roots of unity the two are empty
    together.
    """

    is_hadamard: bool
    order: int
    q: int
    violations: list[tuple[int, int, CycElem]] = field(default_factory=list)
    column_violations: list[tuple[int, int, CycElem]] = field(default_factory=list)

    def to_json(self) -> dict:
        def enc(vs):
            return [{"row_i": i, "row_k": k, "residual": list(r.coeffs)} for i, k, r in vs]

        return {
            "format_version": FORMAT_VERSION,
            "is_hadamard": self.is_hadamard,
            "order": self.order,
            "q": self.q,
            "violations": enc(self.violations),
            "column_violations": enc(self.column_violations),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "VerificationReport":
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
        q = int(doc["q"])

        def dec(vs):
            return [(int(v["row_i"]), int(v["row_k"]), CycElem(q, tuple(v["residual"]))) for v in vs]

        return cls(
            is_hadamard=bool(doc["is_hadamard"]),
            order=int(doc["order"]),
            q=q,
            violations=dec(doc["violations"]),
            column_violations=dec(doc.get("column_violations", [])),
        )

    def summary(self) -> str:
        status = "PASS" if self.is_hadamard else "FAIL"
        return f"BH({self.order},{self.q}): {status}"


def _pair_violations(a: np.ndarray, q: int) -> list[tuple[int, int, CycElem]]:
    # all row-pair Gram entries at once; only nonzero off-diagonal ones kept
    counts = product_counts(a, _conj_t(a, q), q)
    red = reduce_counts(counts, q)
    n = a.shape[0]
    bad = []
    iu, ku = np.triu_indices(n, k=1)
    nz = np.any(red[iu, ku] != 0, axis=-1)
    for i, k in zip(iu[nz].tolist(), ku[nz].tolist()):
        bad.append((i, k, CycElem(q, tuple(counts[i, k].tolist()))))
    return bad


def verify_bh(M: ExponentMatrix) -> VerificationReport:
    """Exact check that M is a BH(n, q) matrix.

    Rows and columns are checked independently; a disagreement between the
    two is an internal error since they are equivalent for square matrices
    of roots of unity.
    """
    if not M.is_square:
        raise ValueError(f"verify_bh needs a square matrix, got {M.shape}")
    rows = _pair_violations(M.array, M.q)
    cols = _pair_violations(M.array.T, M.q)
    if bool(rows) != bool(cols):
        raise RuntimeError("row and column orthogonality disagree; arithmetic is broken")
    return VerificationReport(not rows, M.n_rows, M.q, rows, cols)


def dephase(M: ExponentMatrix) -> ExponentMatrix:
    """Normalise so that the first row and first column are all exponent 0."""
    if not M.is_square:
        raise ValueError("dephase needs a square matrix")
    a = (M.array - M.array[0][None, :]) % M.q
    a = (a - a[:, :1]) % M.q
    return ExponentMatrix._wrap(M.q, a)


def conj_transpose(M: ExponentMatrix) -> ExponentMatrix:
    return ExponentMatrix._wrap(M.q, _conj_t(M.array, M.q))


@dataclass(frozen=True)
class Permute:
    """Reorder rows (axis 0) or columns (axis 1): new[k] = old[perm[k]]."""

    axis: int
    perm: tuple[int, ...]


@dataclass(frozen=True)
class Scale:
    """Multiply one row (axis 0) or column (axis 1) by zeta**exponent."""

    axis: int
    index: int
    exponent: int


def equivalence_move(M: ExponentMatrix, move: Union[Permute, Scale]) -> ExponentMatrix:
    if move.axis not in (0, 1):
        raise ValueError(f"axis must be 0 or 1, got {move.axis}")
    size = M.shape[move.axis]
    a = M.array
    if isinstance(move, Permute):
        perm = tuple(move.perm)
        if sorted(perm) != list(range(size)):
            raise ValueError(f"not a permutation of range({size}): {perm}")
        out = a[list(perm), :] if move.axis == 0 else a[:, list(perm)]
        return ExponentMatrix._wrap(M.q, out)
    if isinstance(move, Scale):
        if not 0 <= move.index < size:
            raise IndexError(f"index {move.index} out of range for size {size}")
        out = a.copy()
        if move.axis == 0:
            out[move.index, :] = (out[move.index, :] + move.exponent) % M.q
        else:
            out[:, move.index] = (out[:, move.index] + move.exponent) % M.q
        return ExponentMatrix._wrap(M.q, out)
    raise TypeError(f"unknown move {move!r}")


def fourier(n: int) -> ExponentMatrix:
    """The Fourier matrix F_n as a BH(n, n): entry (i, k) is i*k mod n."""
    i = np.arange(n)
    return ExponentMatrix(n, np.outer(i, i) % n)


# -- text grid format -------------------------------------------------------

class GridParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


_HEADER = re.compile(r"^\s*q\s+(\d+)\s+n\s+(\d+)(?:\s+m\s+(\d+))?\s*$")
_SKIP = re.compile(r"^\s*(\\?hline|\\hline\s*)?\s*$")


def parse_grid(text: str, q: int | None = None) -> ExponentMatrix:
    """Parse the whitespace-separated exponent grid format.

    An optional header ``q <q> n <rows> [m <cols>]`` may precede the rows.
    LaTeX array residue is tolerated: ``&`` and ``|`` act as separators,
    trailing ``\\\\`` is dropped and ``hline`` lines are skipped, so the
    matrix can be pasted straight from a typeset source.
    """
    rows: list[list[int]] = []
    n_rows = n_cols = None
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if _SKIP.match(line):
            continue
        m = _HEADER.match(line)
        if m:
            if header_seen or rows:
                raise GridParseError("header must come first and only once", lineno)
            header_seen = True
            hq = int(m.group(1))
            if q is not None and q != hq:
                raise GridParseError(f"header says q={hq} but q={q} was requested", lineno)
            q = hq
            n_rows = int(m.group(2))
            n_cols = int(m.group(3)) if m.group(3) else n_rows
            continue
        line = line.replace("\\\\", " ").replace("&", " ").replace("|", " ")
        row = []
        for tok in re.finditer(r"\S+", line):
            if not tok.group().isdigit():
                raise GridParseError(f"unexpected token {tok.group()!r}", lineno, tok.start() + 1)
            row.append((int(tok.group()), tok.start() + 1))
        if rows and len(row) != len(rows[0][0]):
            raise GridParseError(f"expected {len(rows[0][0])} entries, found {len(row)}", lineno)
        rows.append(([v for v, _ in row], lineno, [c for _, c in row]))
    if q is None:
        raise GridParseError("no modulus: add a 'q <q> n <n>' header or pass q")
    if not rows:
        raise GridParseError("empty matrix")
    for values, lineno, cols in rows:
        for v, c in zip(values, cols):
            if v >= q:
                raise GridParseError(f"exponent {v} out of range for q={q}", lineno, c)
    if n_rows is not None and (len(rows) != n_rows or len(rows[0][0]) != n_cols):
        raise GridParseError(
            f"header declares {n_rows}x{n_cols} but body is {len(rows)}x{len(rows[0][0])}"
        )
    return ExponentMatrix(q, [values for values, _, _ in rows])


def format_grid(M: ExponentMatrix, header: bool = True) -> str:
    out = []
    if header:
        out.append(f"q {M.q} n {M.n_rows}" + ("" if M.is_square else f" m {M.n_cols}"))
    for row in M.tolist():
        out.append(" ".join(str(x) for x in row))
    return "\n".join(out) + "\n"


# -- structured format -------------------------------------------------------

def to_document(M: ExponentMatrix) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "q": M.q,
        "n_rows": M.n_rows,
        "n_cols": M.n_cols,
        "rows": M.tolist(),
    }


def from_document(doc: dict) -> ExponentMatrix:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    M = ExponentMatrix(int(doc["q"]), doc["rows"])
    if M.shape != (doc["n_rows"], doc["n_cols"]):
        raise ValueError(f"declared shape {doc['n_rows']}x{doc['n_cols']} != rows {M.shape}")
    return M


def dumps_document(M: ExponentMatrix) -> str:
    """Canonical serialisation: one JSON object per file, one row per line."""
    rows = ",\n    ".join(json.dumps(r) for r in M.tolist())
    return (
        "{\n"
        f'  "format_version": {FORMAT_VERSION},\n'
        f'  "q": {M.q},\n'
        f'  "n_rows": {M.n_rows},\n'
        f'  "n_cols": {M.n_cols},\n'
        f'  "rows": [\n    {rows}\n  ]\n'
        "}\n"
    )


def loads_document(text: str) -> ExponentMatrix:
    return from_document(json.loads(text))


def load_matrix(text: str, q: int | None = None) -> ExponentMatrix:
    """Parse either format, sniffing JSON by its leading brace."""
    if text.lstrip().startswith("{"):
        try:
            M = loads_document(text)
        except (json.JSONDecodeError,) as exc:
            raise GridParseError(exc.msg, exc.lineno, exc.colno) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise GridParseError(f"bad structured document: {exc}") from exc
        if q is not None and M.q != q:
            raise GridParseError(f"document has q={M.q} but q={q} was requested")
        return M
    return parse_grid(text, q)

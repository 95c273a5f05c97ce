"""Petrescu's block array of order 3s+1 and its orthogonality equations.

    H = [ X   Y   T ]
        [ Y   X   T ]
        [ T*  T*  D ]

X, Y are s x s, T is s x (s+1) and D is (s+1) x (s+1), all over q-th roots
of unity.  Two equation systems are checked here, both exactly:

* the direct one, read off from H H* = (3s+1) I blockwise
  (:func:`check_system_a`);
* the split one used by the search: conditions on D alone
  (:func:`check_d`), the forced value of X+Y (:func:`compute_x_plus_y`) and
  the Gram condition on X-Y (:func:`check_difference`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .bmatrix import ExponentMatrix, conj_transpose, product_counts, reduce_counts
from .cyclo import CycElem, cyc_div_exact, cyc_is_zero, cyc_sub

__all__ = [
    "PetrescuBlocks",
    "SumMatrix",
    "BlockReport",
    "NotPetrescuFormError",
    "assemble",
    "extract_blocks",
    "check_system_a",
    "check_d",
    "compute_x_plus_y",
    "decompose_pair_sum",
    "check_difference",
    "t_gram_failures",
    "EQ_A1",
    "EQ_A2",
    "EQ_A3",
    "EQ_A4",
    "EQ_DDH",
    "EQ_DHD",
    "EQ_LINES",
    "EQ_DIFF",
]

EQ_A1 = "2T*T + DD* = (3s+1)I"
EQ_A2 = "XX* + YY* + TT* = (3s+1)I"
EQ_A3 = "(X+Y)T + TD* = 0"
EQ_A4 = "XY* + YX* + TT* = 0"
EQ_DDH = "DD* = (s-1)I + 2J"
EQ_DHD = "D*D = (s-1)I + 2J"
EQ_LINES = "DJ = JD"
EQ_DIFF = "(X-Y)(X-Y)* = (3s+1)I"


class NotPetrescuFormError(ValueError):
    def __init__(self, message: str, position: tuple[int, int] | None = None):
        self.position = position
        super().__init__(message)


@dataclass(frozen=True)
class PetrescuBlocks:
    s: int
    q: int
    X: ExponentMatrix
    Y: ExponentMatrix
    T: ExponentMatrix
    D: ExponentMatrix

    def __post_init__(self):
        s = self.s
        want = {"X": (s, s), "Y": (s, s), "T": (s, s + 1), "D": (s + 1, s + 1)}
        for name, shape in want.items():
            m = getattr(self, name)
            if m.shape != shape:
                raise ValueError(f"block {name} has shape {m.shape}, expected {shape}")
            if m.q != self.q:
                raise ValueError(f"block {name} has q={m.q}, expected {self.q}")


@dataclass(frozen=True)
class SumMatrix:
    """Grid of CycElem values sharing one modulus."""

    entries: tuple[tuple[CycElem, ...], ...]

    @property
    def q(self) -> int:
        return self.entries[0][0].q

    @property
    def n_rows(self) -> int:
        return len(self.entries)

    @property
    def n_cols(self) -> int:
        return len(self.entries[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, SumMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    @classmethod
    def of_roots(cls, X: ExponentMatrix, Y: ExponentMatrix) -> "SumMatrix":
        """Entrywise zeta**X + zeta**Y."""
        q = X.q
        return cls(tuple(
            tuple(CycElem.from_exponents(q, (x, y)) for x, y in zip(rx, ry))
            for rx, ry in zip(X.tolist(), Y.tolist())
        ))


@dataclass
class BlockReport:
    """Per-equation outcome.  ``failures`` holds (equation, i, j, residual)."""

    equations: tuple[str, ...]
    failures: list[tuple[str, int, int, CycElem]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def failed_equations(self) -> set[str]:
        return {f[0] for f in self.failures}

    def status(self) -> dict[str, bool]:
        bad = self.failed_equations()
        return {eq: eq not in bad for eq in self.equations}

    def __bool__(self):
        return self.passed


def assemble(b: PetrescuBlocks) -> ExponentMatrix:
    Th = conj_transpose(b.T).array
    top = np.hstack([b.X.array, b.Y.array, b.T.array])
    mid = np.hstack([b.Y.array, b.X.array, b.T.array])
    bot = np.hstack([Th, Th, b.D.array])
    return ExponentMatrix._wrap(b.q, np.vstack([top, mid, bot]))


def extract_blocks(M: ExponentMatrix, s: int) -> PetrescuBlocks:
    """Inverse of :func:`assemble`; checks the repeated-block structure."""
    n = 3 * s + 1
    if s < 1 or M.shape != (n, n):
        raise NotPetrescuFormError(f"expected order 3*{s}+1 = {n}, got {M.shape}")
    a, q = M.array, M.q
    X, Y, T = a[:s, :s], a[:s, s:2 * s], a[:s, 2 * s:]
    checks = [
        # (region in M, expected contents, row offset, col offset, label)
        (a[s:2 * s, :s], Y, s, 0, "block(1,0) != block(0,1)"),
        (a[s:2 * s, s:2 * s], X, s, s, "block(1,1) != block(0,0)"),
        (a[s:2 * s, 2 * s:], T, s, 2 * s, "block(1,2) != block(0,2)"),
        (a[2 * s:, :s], (-T.T) % q, 2 * s, 0, "block(2,0) != T*"),
        (a[2 * s:, s:2 * s], (-T.T) % q, 2 * s, s, "block(2,1) != T*"),
    ]
    for got, want, r0, c0, label in checks:
        bad = np.argwhere(got != want)
        if len(bad):
            i, j = (int(v) for v in bad[0])
            pos = (r0 + i, c0 + j)
            raise NotPetrescuFormError(f"{label} at position {pos}", pos)
    w = ExponentMatrix._wrap
    return PetrescuBlocks(s, q, w(q, X), w(q, Y), w(q, T), w(q, a[2 * s:, 2 * s:]))


def _collect(label: str, counts: np.ndarray, q: int, diag: int, out: list):
    # record nonzero entries of counts - diag*I, counts shape (n, m, q)
    counts = counts.copy()
    n = min(counts.shape[0], counts.shape[1])
    counts[np.arange(n), np.arange(n), 0] -= diag
    red = reduce_counts(counts, q)
    for i, j in np.argwhere(np.any(red != 0, axis=-1)).tolist():
        out.append((label, i, j, CycElem(q, tuple(counts[i, j].tolist()))))


def check_system_a(b: PetrescuBlocks) -> BlockReport:
    """Evaluate the four blockwise identities of H H* = (3s+1) I exactly."""
    q, n = b.q, 3 * b.s + 1
    X, Y, T, D = b.X.array, b.Y.array, b.T.array, b.D.array
    Xh, Yh, Th, Dh = ((-m.T) % q for m in (X, Y, T, D))
    pc = product_counts
    fails: list = []
    _collect(EQ_A1, 2 * pc(Th, T, q) + pc(D, Dh, q), q, n, fails)
    _collect(EQ_A2, pc(X, Xh, q) + pc(Y, Yh, q) + pc(T, Th, q), q, n, fails)
    _collect(EQ_A3, pc(X, T, q) + pc(Y, T, q) + pc(T, Dh, q), q, 0, fails)
    _collect(EQ_A4, pc(X, Yh, q) + pc(Y, Xh, q) + pc(T, Th, q), q, 0, fails)
    return BlockReport((EQ_A1, EQ_A2, EQ_A3, EQ_A4), fails)


def check_d(D: ExponentMatrix, s: int) -> BlockReport:
    """Check DD* = D*D = (s-1)I + 2J and that all line sums of D agree.

    Failures of the line-sum condition are reported as ("DJ = JD", k, -1, r)
    for row k and (.., -1, k, r) for column k, where r is the line sum minus
    the sum of row 0.
    """
    if D.shape != (s + 1, s + 1):
        raise ValueError(f"D must be {(s + 1, s + 1)}, got {D.shape}")
    q, a = D.q, D.array
    ah = (-a.T) % q
    fails: list = []
    # (s-1)I + 2J has diagonal s+1 and off-diagonal 2
    for label, counts in ((EQ_DDH, product_counts(a, ah, q)), (EQ_DHD, product_counts(ah, a, q))):
        counts = counts.copy()
        counts[..., 0] -= 2
        _collect(label, counts, q, s - 1, fails)
    rows = [CycElem.from_exponents(q, r) for r in a.tolist()]
    cols = [CycElem.from_exponents(q, c) for c in a.T.tolist()]
    ref = rows[0]
    for k, r in enumerate(rows):
        diff = cyc_sub(r, ref)
        if not cyc_is_zero(diff):
            fails.append((EQ_LINES, k, -1, diff))
    for k, c in enumerate(cols):
        diff = cyc_sub(c, ref)
        if not cyc_is_zero(diff):
            fails.append((EQ_LINES, -1, k, diff))
    return BlockReport((EQ_DDH, EQ_DHD, EQ_LINES), fails)


def compute_x_plus_y(T: ExponentMatrix, D: ExponentMatrix, s: int) -> SumMatrix:
    """The forced value -T D* T* / (s+1).

    Raises NotDivisibleError when some entry is not divisible by s+1, which
    means no X, Y over roots of unity can complete this (T, D).
    """
    if T.shape != (s, s + 1) or D.shape != (s + 1, s + 1):
        raise ValueError(f"need T {(s, s + 1)} and D {(s + 1, s + 1)}, got {T.shape}, {D.shape}")
    q = T.q
    t, d = T.array, D.array
    # entry (i, j) counts exponents T[i,a] - D[b,a] - T[j,b]
    e = (t[:, None, :, None] - d.T[None, None, :, :] - t[None, :, None, :]) % q
    counts = np.zeros(e.shape[:2] + (q,), dtype=np.int64)
    for i in range(s):
        for j in range(s):
            counts[i, j] = np.bincount(e[i, j].ravel(), minlength=q)
    rows = []
    for i in range(s):
        row = []
        for j in range(s):
            neg = CycElem(q, tuple((-counts[i, j]).tolist()))
            row.append(cyc_div_exact(neg, s + 1))
        rows.append(tuple(row))
    return SumMatrix(tuple(rows))


def decompose_pair_sum(c: CycElem) -> list[tuple[int, int]]:
    """All unordered {a, b}, a <= b, with zeta**a + zeta**b == c."""
    q = c.q
    out = []
    for a, b in itertools.combinations_with_replacement(range(q), 2):
        pair = CycElem.from_exponents(q, (a, b))
        if cyc_is_zero(cyc_sub(pair, c)):
            out.append((a, b))
    return out


def check_difference(X: ExponentMatrix, Y: ExponentMatrix, s: int) -> BlockReport:
    """Check (X-Y)(X-Y)* = (3s+1) I with X-Y taken entrywise over roots."""
    if X.shape != (s, s) or Y.shape != (s, s) or X.q != Y.q:
        raise ValueError("X and Y must both be s x s with the same q")
    q = X.q
    x, y = X.array, Y.array
    xh, yh = (-x.T) % q, (-y.T) % q
    counts = (product_counts(x, xh, q) - product_counts(x, yh, q)
              - product_counts(y, xh, q) + product_counts(y, yh, q))
    fails: list = []
    _collect(EQ_DIFF, counts, q, 3 * s + 1, fails)
    return BlockReport((EQ_DIFF,), fails)


def t_gram_failures(T: ExponentMatrix) -> list[str]:
    """Check T T* = (s+1) I and T* T = (s+1) I - J; return failed identities."""
    s, q = T.n_rows, T.q
    if T.n_cols != s + 1:
        raise ValueError(f"T must be s x (s+1), got {T.shape}")
    t, th = T.array, (-T.array.T) % q
    out = []
    a = product_counts(t, th, q).copy()
    a[np.arange(s), np.arange(s), 0] -= s + 1
    if np.any(reduce_counts(a, q)):
        out.append("TT* = (s+1)I")
    b = product_counts(th, t, q).copy()
    b[..., 0] += 1
    b[np.arange(s + 1), np.arange(s + 1), 0] -= s + 1
    if np.any(reduce_counts(b, q)):
        out.append("T*T = (s+1)I - J")
    return out

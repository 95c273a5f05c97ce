"""Three-phase search for Petrescu-form BH(3s+1, q) matrices.

1. :func:`search_d` backtracks over candidate lower-right blocks D with
   DD* = (s-1)I + 2J and equal line sums.
2. :func:`enumerate_t` lists the s x (s+1) blocks T obtained by deleting the
   all-ones row from a BH(s+1, q).
3. For each (D, T) the forced value of X+Y is computed; :func:`assign_xy`
   then backtracks over ways of splitting every entry into two roots while
   keeping the rows of X-Y orthogonal.

:func:`run_pipeline` ties the phases together and only accepts a solution
after :func:`verify_bh` passes on the assembled matrix.

Symmetry breaking
-----------------
D:  D[0,0] = 0 (global scalar), D[0,1:] nondecreasing (simultaneous
    permutations fixing index 0), rows 1..s in nondecreasing lexicographic
    order.  The last rule is not a symmetry of the full array, so the
    search is not exhaustive up to equivalence.
T:  first column all zero (row scalings, absorbed by X, Y) and rows in
    strictly increasing lexicographic order (row permutations, likewise).
"""

from __future__ import annotations

import functools
import itertools
import logging
import multiprocessing as mp
import time
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .bmatrix import ExponentMatrix, dephase, verify_bh
from .cyclo import CycElem, reduction_table, rotation_table
from .petrescu import (
    PetrescuBlocks,
    SumMatrix,
    assemble,
    check_d,
    decompose_pair_sum,
)

__all__ = [
    "SearchConfig",
    "SearchStats",
    "SearchOutcome",
    "Solution",
    "MAX_TABLE_SIZE",
    "all_vectors",
    "zero_sum_rows",
    "search_d",
    "enumerate_t",
    "assign_xy",
    "run_pipeline",
]

log = logging.getLogger(__name__)

# q**(s+1) vectors are tabulated in memory; refuse anything much larger
MAX_TABLE_SIZE = 5_000_000


@dataclass(frozen=True)
class SearchConfig:
    s: int = 6
    q: int = 6
    max_d_candidates: Optional[int] = None
    max_t_candidates: Optional[int] = None
    max_solutions: int = 1  # 0 means no limit
    deterministic_order: bool = True
    time_budget: Optional[float] = None
    workers: int = 1
    prune: bool = True

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        if self.q < 2 or self.q % 2:
            raise ValueError(f"q must be even and >= 2 (antipodal pairs needed), got {self.q}")
        if self.max_solutions < 0:
            raise ValueError("max_solutions must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SearchStats:
    d_candidates: int = 0
    t_candidates: int = 0
    pairs_tried: int = 0
    xy_branches: int = 0
    prunes_by_phase: dict = field(default_factory=lambda: {
        "d": 0, "divisibility": 0, "pair_sum": 0, "xy": 0, "duplicate": 0,
    })
    solutions: int = 0
    elapsed_ms: int = 0

    def merge(self, other: "SearchStats"):
        self.pairs_tried += other.pairs_tried
        self.xy_branches += other.xy_branches
        for k, v in other.prunes_by_phase.items():
            self.prunes_by_phase[k] = self.prunes_by_phase.get(k, 0) + v

    def to_json(self) -> dict:
        return {
            "d_candidates": self.d_candidates,
            "t_candidates": self.t_candidates,
            "pairs_tried": self.pairs_tried,
            "xy_branches": self.xy_branches,
            "prunes_by_phase": dict(self.prunes_by_phase),
            "solutions": self.solutions,
            "elapsed_ms": self.elapsed_ms,
        }


@dataclass(frozen=True)
class Solution:
    blocks: PetrescuBlocks
    matrix: ExponentMatrix


@dataclass
class SearchOutcome:
    solutions: list[Solution]
    stats: SearchStats
    truncated: bool = False


# -- tables -----------------------------------------------------------------

@functools.cache
def all_vectors(length: int, q: int) -> np.ndarray:
    """Every exponent vector of the given length, in lexicographic order.

    Row ``k`` is the base-q expansion of ``k``, so vectors can be looked up
    by code.
    """
    if q ** length > MAX_TABLE_SIZE:
        raise ValueError(f"{q}**{length} vectors exceed the table limit {MAX_TABLE_SIZE}")
    v = np.indices((q,) * length).reshape(length, -1).T.astype(np.int64)
    v.setflags(write=False)
    return v


@functools.cache
def _place_values(length: int, q: int) -> np.ndarray:
    return q ** np.arange(length - 1, -1, -1, dtype=np.int64)


def _codes(v: np.ndarray, q: int) -> np.ndarray:
    return v @ _place_values(v.shape[-1], q)


@functools.cache
def _vector_sums(length: int, q: int) -> np.ndarray:
    """Reduced root sum of every vector in :func:`all_vectors`, shape (q**length, phi)."""
    red = reduction_table(q)
    out = red[all_vectors(length, q)].sum(axis=1)
    out.setflags(write=False)
    return out


def _inner_with(cands: np.ndarray, v: np.ndarray, q: int) -> np.ndarray:
    """Reduced inner products <cand, v> for every row of ``cands``."""
    diff = (cands - v[None, :]) % q
    return _vector_sums(cands.shape[1], q)[_codes(diff, q)]


@functools.cache
def _reach(q: int, r_max: int) -> tuple[frozenset, ...]:
    # reach[r] = reduced values of sums of exactly r q-th roots
    red = [tuple(x) for x in reduction_table(q).tolist()]
    reach = [frozenset({tuple([0] * len(red[0]))})]
    for _ in range(r_max):
        reach.append(frozenset(
            tuple(a + b for a, b in zip(p, z)) for p in reach[-1] for z in red
        ))
    return tuple(reach)


def zero_sum_rows(s: int, q: int) -> np.ndarray:
    """All length-(s+1) exponent vectors whose roots sum to zero, lex order."""
    sums = _vector_sums(s + 1, q)
    return all_vectors(s + 1, q)[~np.any(sums, axis=1)]


# -- phase 1: D ---------------------------------------------------------------

def _first_rows(s: int, q: int, prune: bool) -> np.ndarray:
    vecs = all_vectors(s + 1, q)
    mask = (vecs[:, 0] == 0) & np.all(np.diff(vecs[:, 1:], axis=1) >= 0, axis=1)
    rows = vecs[mask]
    if prune:
        # |line sum|^2 = 3s+1 is forced by DD* = (s-1)I + 2J and DJ = JD
        target = np.zeros(reduction_table(q).shape[1], dtype=np.int64)
        target[0] = 3 * s + 1
        keep = []
        for r in rows:
            keep.append(np.array_equal(_norm_of_sum(r, q), target))
        rows = rows[np.array(keep, dtype=bool)]
    return rows


def _norm_of_sum(v: np.ndarray, q: int) -> np.ndarray:
    # |sum zeta**v|^2 = sum over ordered pairs of zeta**(v_a - v_b)
    d = (v[:, None] - v[None, :]) % q
    return reduction_table(q)[d.ravel()].sum(axis=0)


def search_d(
    s: int,
    q: int,
    max_candidates: Optional[int] = None,
    prune: bool = True,
    stats: Optional[SearchStats] = None,
) -> Iterator[ExponentMatrix]:
    """Yield (s+1) x (s+1) blocks D passing :func:`check_d`, in canonical order.

    Rows are placed whole.  With ``prune`` a row is only considered if its
    inner product with every placed row is exactly 2, and a partial column
    is abandoned once its sum can no longer reach the common line sum with
    the rows that remain.  Without it every row with the right row sum is
    tried and :func:`check_d` alone decides at the leaves.
    """
    n = s + 1
    vecs = all_vectors(n, q)
    sums = _vector_sums(n, q)
    two = np.zeros(sums.shape[1], dtype=np.int64)
    two[0] = 2
    reach = _reach(q, n)
    emitted = 0

    def compatible(cands, v):
        return np.all(_inner_with(cands, v, q) == two, axis=1)

    for r0 in _first_rows(s, q, prune):
        lam = sums[_codes(r0, q)]
        lam_t = tuple(lam.tolist())
        pool = vecs[np.all(sums == lam, axis=1)]
        if prune:
            pool = pool[compatible(pool, r0)]
        pool_codes = _codes(pool, q)
        red_rows = reduction_table(q)[pool]  # (P, n, phi)

        # stack of (placed row indices into pool, column partial sums, candidate mask)
        col0 = reduction_table(q)[r0]
        stack = [((), col0, np.ones(len(pool), dtype=bool))]
        while stack:
            placed, cols, cand = stack.pop()
            depth = len(placed) + 1
            if depth == n:
                D = ExponentMatrix._wrap(q, np.vstack([r0] + [pool[k] for k in placed]))
                if not check_d(D, s).passed:
                    if stats is not None:
                        stats.prunes_by_phase["d"] += 1
                    continue
                yield D
                emitted += 1
                if max_candidates is not None and emitted >= max_candidates:
                    return
                continue
            remaining = n - depth - 1
            children = []
            for k in np.flatnonzero(cand):
                new_cols = cols + red_rows[k]
                if prune and any(
                    tuple(a - b for a, b in zip(lam_t, c)) not in reach[remaining]
                    for c in new_cols.tolist()
                ):
                    if stats is not None:
                        stats.prunes_by_phase["d"] += 1
                    continue
                nxt = cand & (pool_codes >= pool_codes[k])
                if prune and remaining:
                    idx = np.flatnonzero(nxt)
                    ok = compatible(pool[idx], pool[k])
                    nxt = np.zeros_like(nxt)
                    nxt[idx[ok]] = True
                children.append((placed + (int(k),), new_cols, nxt))
            # reversed so the smallest row is explored first
            stack.extend(reversed(children))


# -- phase 2: T ---------------------------------------------------------------

def _t_pool(s: int, q: int) -> np.ndarray:
    z = zero_sum_rows(s, q)
    return z[z[:, 0] == 0]


def enumerate_t(s: int, q: int, max_candidates: Optional[int] = None) -> Iterator[ExponentMatrix]:
    """Yield normalised T blocks: T T* = (s+1)I and T* T = (s+1)I - J.

    Rows come from the zero-sum vectors with leading exponent 0 (orthogonal
    to the deleted all-ones row); s mutually orthogonal ones are chosen in
    strictly increasing lexicographic order.
    """
    pool = _t_pool(s, q)
    zero = ~np.any(_vector_sums(s + 1, q), axis=1)
    emitted = 0

    def rec(chosen, cand):
        nonlocal emitted
        if len(chosen) == s:
            yield ExponentMatrix._wrap(q, pool[list(chosen)])
            emitted += 1
            return
        need = s - len(chosen)
        idx = np.flatnonzero(cand)
        for pos, k in enumerate(idx):
            if len(idx) - pos < need:
                break
            rest = idx[pos + 1:]
            ok = zero[_codes((pool[rest] - pool[k]) % q, q)]
            nxt = np.zeros_like(cand)
            nxt[rest[ok]] = True
            yield from rec(chosen + (int(k),), nxt)
            if max_candidates is not None and emitted >= max_candidates:
                return

    if len(pool) == 0:
        return
    yield from rec((), np.ones(len(pool), dtype=bool))


@functools.cache
def _t_stack(s: int, q: int, max_candidates: Optional[int]) -> np.ndarray:
    ts = [t.array for t in enumerate_t(s, q, max_candidates)]
    if not ts:
        return np.zeros((0, s, s + 1), dtype=np.int64)
    out = np.stack(ts)
    out.setflags(write=False)
    return out


# -- phase 3: X, Y ------------------------------------------------------------

@functools.cache
def _pair_sum_table(q: int) -> np.ndarray:
    """Reduced values of zeta**a + zeta**b over unordered pairs, shape (P, phi)."""
    red = reduction_table(q)
    vals = {tuple((red[a] + red[b]).tolist())
            for a, b in itertools.combinations_with_replacement(range(q), 2)}
    return np.array(sorted(vals), dtype=np.int64)


@functools.cache
def _diff_products(q: int) -> np.ndarray:
    """(q*q, q*q, phi): reduced (z^a - z^b) * conj(z^c - z^d) for options a*q+b, c*q+d."""
    red = reduction_table(q)
    a, b = np.divmod(np.arange(q * q), q)
    A, C = a[:, None], a[None, :]
    B, Dd = b[:, None], b[None, :]
    out = red[(A - C) % q] - red[(A - Dd) % q] - red[(B - C) % q] + red[(B - Dd) % q]
    out.setflags(write=False)
    return out


def _x_plus_y_batch(ts: np.ndarray, D: np.ndarray, s: int, q: int):
    """Batched -T D* T* / (s+1) in reduced coordinates.

    Returns (divisible mask over the batch, quotient array (N, s, s, phi)).
    """
    red = reduction_table(q)
    rot = rotation_table(q)
    # A[n,i,b] = sum_a zeta**(T[n,i,a] - D[b,a])  (the T D* factor)
    e = (ts[:, :, None, :] - D[None, None, :, :]) % q
    A = red[e].sum(axis=3)
    # M[n,i,j] = sum_b A[n,i,b] * zeta**(-T[n,j,b])
    R = rot[(-ts) % q]
    M = np.einsum("nibk,njbkl->nijl", A, R)
    ok = np.all(M % (s + 1) == 0, axis=(1, 2, 3))
    return ok, -(M // (s + 1))


def _sum_matrix(S: np.ndarray, q: int) -> SumMatrix:
    return SumMatrix(tuple(
        tuple(CycElem.from_reduced(q, v) for v in row) for row in S.tolist()
    ))


def assign_xy(
    S: SumMatrix,
    s: int,
    q: int,
    stats: Optional[SearchStats] = None,
    deadline: Optional[float] = None,
) -> Iterator[tuple[ExponentMatrix, ExponentMatrix]]:
    """Yield every (X, Y) with zeta**X + zeta**Y == S and (X-Y)(X-Y)* = (3s+1)I.

    Backtracks row by row.  A row choice survives only if its difference
    vector has squared norm 3s+1 and is orthogonal to every earlier row.
    """
    opts = []
    for i in range(s):
        row = []
        for j in range(s):
            pairs = decompose_pair_sum(S[i, j])
            if not pairs:
                return
            o = []
            for a, b in pairs:
                o.append(a * q + b)
                if a != b:
                    o.append(b * q + a)
            row.append(sorted(o))
        opts.append(row)
    P = _diff_products(q)
    phi = P.shape[-1]
    norm = np.zeros(phi, dtype=np.int64)
    norm[0] = 3 * s + 1

    def row_choices(i, chosen):
        grid = np.array(list(itertools.product(*opts[i])), dtype=np.int64)
        ok = np.all(P[grid, grid].sum(axis=1) == norm, axis=1)
        for prev in chosen:
            ok &= ~np.any(P[grid, prev[None, :].repeat(len(grid), 0)].sum(axis=1), axis=1)
        if stats is not None:
            stats.xy_branches += len(grid)
            stats.prunes_by_phase["xy"] += int(len(grid) - ok.sum())
        return grid[ok]

    def rec(chosen):
        if deadline is not None and time.monotonic() > deadline:
            raise _BudgetExceeded
        i = len(chosen)
        if i == s:
            g = np.stack(chosen)
            X, Y = np.divmod(g, q)
            yield ExponentMatrix._wrap(q, X), ExponentMatrix._wrap(q, Y)
            return
        for row in row_choices(i, chosen):
            yield from rec(chosen + [row])

    yield from rec([])


class _BudgetExceeded(Exception):
    pass


# -- pipeline -----------------------------------------------------------------

def _solve_for_d(D: ExponentMatrix, cfg: SearchConfig, deadline: Optional[float]):
    """All verified solutions for one D, capped at cfg.max_solutions.

    Returns (solutions, stats, truncated).  Shared by the serial and the
    worker-parallel drivers so both see exactly the same per-D results.
    """
    s, q = cfg.s, cfg.q
    st = SearchStats()
    out: list[Solution] = []
    ts = _t_stack(s, q, cfg.max_t_candidates)
    if len(ts) == 0:
        return out, st, False
    ok, S_all = _x_plus_y_batch(ts, D.array, s, q)
    st.prunes_by_phase["divisibility"] += int((~ok).sum())
    idx = np.flatnonzero(ok)
    pairs = _pair_sum_table(q)
    if len(idx):
        S = S_all[idx]
        hit = np.all(S[..., None, :] == pairs, axis=-1).any(axis=-1)
        dec = hit.all(axis=(1, 2))
        st.prunes_by_phase["pair_sum"] += int((~dec).sum())
        idx = idx[dec]
    try:
        for n in idx.tolist():
            if deadline is not None and time.monotonic() > deadline:
                return out, st, True
            st.pairs_tried += 1
            T = ExponentMatrix._wrap(q, ts[n])
            Smat = _sum_matrix(S_all[n], q)
            for X, Y in assign_xy(Smat, s, q, st, deadline):
                blocks = PetrescuBlocks(s, q, X, Y, T, D)
                H = assemble(blocks)
                if not verify_bh(H).is_hadamard:  # pragma: no cover - final gate
                    log.error("block equations passed but verify_bh failed; dropping")
                    continue
                out.append(Solution(blocks, H))
                if cfg.max_solutions and len(out) >= cfg.max_solutions:
                    return out, st, False
    except _BudgetExceeded:
        return out, st, True
    return out, st, False


# state handed to forked workers
_WORKER_CFG: Optional[SearchConfig] = None
_WORKER_DEADLINE: Optional[float] = None


def _worker_init(cfg, deadline):
    global _WORKER_CFG, _WORKER_DEADLINE
    _WORKER_CFG, _WORKER_DEADLINE = cfg, deadline


def _worker_solve(d_array: np.ndarray):
    cfg = _WORKER_CFG
    D = ExponentMatrix._wrap(cfg.q, d_array)
    sols, st, trunc = _solve_for_d(D, cfg, _WORKER_DEADLINE)
    return d_array, [(x.blocks.X.array, x.blocks.Y.array, x.blocks.T.array) for x in sols], st, trunc


def _d_arrays(cfg: SearchConfig, stats: SearchStats, deadline: Optional[float], flag: dict):
    for D in search_d(cfg.s, cfg.q, cfg.max_d_candidates, cfg.prune, stats):
        if deadline is not None and time.monotonic() > deadline:
            flag["truncated"] = True
            return
        yield D.array


def run_pipeline(cfg: SearchConfig) -> SearchOutcome:
    """Search for Petrescu-form BH(3s+1, q) matrices.

    Solutions are deduplicated by their dephased form and returned in the
    canonical D order (for ``deterministic_order``), so serial and parallel
    runs agree.
    """
    t0 = time.monotonic()
    deadline = None if cfg.time_budget is None else t0 + cfg.time_budget
    stats = SearchStats()
    flag = {"truncated": False}
    solutions: list[Solution] = []
    seen: set = set()

    # build shared tables before any fork
    ts = _t_stack(cfg.s, cfg.q, cfg.max_t_candidates)
    stats.t_candidates = len(ts)
    log.info("s=%d q=%d: %d T candidates", cfg.s, cfg.q, len(ts))

    def accept(sol: Solution) -> bool:
        key = dephase(sol.matrix)
        if key in seen:
            stats.prunes_by_phase["duplicate"] += 1
            return False
        seen.add(key)
        solutions.append(sol)
        return True

    def done() -> bool:
        return bool(cfg.max_solutions) and len(solutions) >= cfg.max_solutions

    d_stream = _d_arrays(cfg, stats, deadline, flag)
    q, s = cfg.q, cfg.s

    def consume(d, sols, st, trunc) -> bool:
        # returns True when the search should stop
        stats.d_candidates += 1
        stats.merge(st)
        for sol in sols:
            if accept(sol) and done():
                break
        if trunc:
            flag["truncated"] = True
        return done() or trunc

    if cfg.workers == 1:
        for d in d_stream:
            sols, st, trunc = _solve_for_d(ExponentMatrix._wrap(q, d), cfg, deadline)
            if consume(d, sols, st, trunc):
                break
    else:
        method = "fork" if "fork" in mp.get_all_start_methods() else None
        ctx = mp.get_context(method)
        batch_size = 4 * cfg.workers
        with ctx.Pool(cfg.workers, initializer=_worker_init, initargs=(cfg, deadline)) as pool:
            stop = False
            while not stop:
                batch = list(itertools.islice(d_stream, batch_size))
                if not batch:
                    break
                if cfg.deterministic_order:
                    results = pool.map(_worker_solve, batch, chunksize=1)
                else:
                    results = pool.imap_unordered(_worker_solve, batch)
                for d, raw, st, trunc in results:
                    D = ExponentMatrix._wrap(q, d)
                    sols = []
                    for x, y, t in raw:
                        blocks = PetrescuBlocks(
                            s, q, ExponentMatrix._wrap(q, x), ExponentMatrix._wrap(q, y),
                            ExponentMatrix._wrap(q, t), D,
                        )
                        H = assemble(blocks)
                        if verify_bh(H).is_hadamard:
                            sols.append(Solution(blocks, H))
                    if consume(d, sols, st, trunc):
                        stop = True
                        break
            pool.terminate()

    stats.solutions = len(solutions)
    stats.elapsed_ms = int(round((time.monotonic() - t0) * 1000))
    return SearchOutcome(solutions, stats, flag["truncated"] and not done())

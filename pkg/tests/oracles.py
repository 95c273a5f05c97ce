"""Independent brute-force oracles.

Nothing here imports the exact-arithmetic code paths under test: values
are checked in floating point or by direct combinatorics.
"""

import itertools

import numpy as np

TOL = 1e-9


def roots(E, q):
    return np.exp(2j * np.pi * np.asarray(E) / q)


def float_is_hadamard(E, q):
    H = roots(E, q)
    n = H.shape[-1]
    G = H @ np.conj(np.swapaxes(H, -1, -2))
    return np.all(np.abs(G - n * np.eye(n)) < TOL, axis=(-1, -2))


def float_inner(E, q, i, k):
    H = roots(E, q)
    return np.vdot(H[k], H[i])


def dephase_np(E, q):
    E = np.asarray(E)
    E = (E - E[..., :1, :]) % q
    return (E - E[..., :, :1]) % q


def petrescu_np(X, Y, T, D, q):
    Th = (-np.swapaxes(T, -1, -2)) % q
    top = np.concatenate([X, Y, T], axis=-1)
    mid = np.concatenate([Y, X, T], axis=-1)
    bot = np.concatenate([Th, Th, D], axis=-1)
    return np.concatenate([top, mid, bot], axis=-2)


def canonical_d(D):
    """The search's declared symmetry breaking for the D block."""
    D = np.asarray(D)
    if D[0, 0] != 0:
        return False
    if any(D[0, c] > D[0, c + 1] for c in range(1, D.shape[1] - 1)):
        return False
    rows = [tuple(r) for r in D[1:].tolist()]
    return rows == sorted(rows)


def canonical_t(T):
    T = np.asarray(T)
    if np.any(T[:, 0] != 0):
        return False
    rows = [tuple(r) for r in T.tolist()]
    return all(a < b for a, b in zip(rows, rows[1:]))


def brute_d(s, q):
    """Every canonical D with DD* = (s-1)I + 2J and equal line sums (float check)."""
    n = s + 1
    out = []
    free = n * n - 1
    grid = np.array(list(itertools.product(range(q), repeat=free)), dtype=np.int64)
    grid = np.concatenate([np.zeros((len(grid), 1), dtype=np.int64), grid], axis=1)
    Ds = grid.reshape(-1, n, n)
    H = roots(Ds, q)
    G = H @ np.conj(np.swapaxes(H, -1, -2))
    target = (s - 1) * np.eye(n) + 2
    ok = np.all(np.abs(G - target) < TOL, axis=(1, 2))
    rs = H.sum(axis=2)
    cs = H.sum(axis=1)
    ok &= np.all(np.abs(rs - rs[:, :1]) < TOL, axis=1)
    ok &= np.all(np.abs(cs - rs[:, :1]) < TOL, axis=1)
    for D in Ds[ok]:
        if canonical_d(D):
            out.append(D)
    return out


def brute_t(s, q):
    """Every canonical T with T T* = (s+1)I and T* T = (s+1)I - J (float check)."""
    n = s + 1
    out = []
    for cells in itertools.product(range(q), repeat=s * s):
        T = np.zeros((s, n), dtype=np.int64)
        T[:, 1:] = np.array(cells).reshape(s, s)
        if not canonical_t(T):
            continue
        H = roots(T, q)
        if np.allclose(H @ H.conj().T, n * np.eye(s), atol=TOL) and np.allclose(
            H.conj().T @ H, n * np.eye(n) - 1, atol=TOL
        ):
            out.append(T)
    return out


def brute_pipeline(s, q, chunk=200_000):
    """Dephased forms of all Hadamard Petrescu arrays over the canonical D, T space."""
    found = set()
    xy_all = np.array(list(itertools.product(range(q), repeat=2 * s * s)), dtype=np.int64)
    for D in brute_d(s, q):
        for T in brute_t(s, q):
            for lo in range(0, len(xy_all), chunk):
                xy = xy_all[lo:lo + chunk]
                X = xy[:, :s * s].reshape(-1, s, s)
                Y = xy[:, s * s:].reshape(-1, s, s)
                k = len(xy)
                H = petrescu_np(X, Y, np.broadcast_to(T, (k,) + T.shape),
                                np.broadcast_to(D, (k,) + D.shape), q)
                ok = float_is_hadamard(H, q)
                for E in H[ok]:
                    found.add(dephase_np(E, q).tobytes())
    return found


def all_sign_hadamards_4():
    """All 4x4 matrices over {0,1} exponents (q=2) that are Hadamard, by exhaustion."""
    out = []
    for bits in range(1 << 16):
        E = np.array([(bits >> k) & 1 for k in range(16)]).reshape(4, 4)
        H = 1 - 2 * E
        if np.array_equal(H @ H.T, 4 * np.eye(4, dtype=int)):
            out.append(E)
    return out


def is_two_pairs_plus_triple(v):
    """True iff the multiset v (length 7, q=6) splits as {a,a+3},{b,b+3},{c,c+2,c+4}."""
    items = sorted(int(x) for x in v)
    for c in range(6):
        triple = [c % 6, (c + 2) % 6, (c + 4) % 6]
        rest = list(items)
        try:
            for t in triple:
                rest.remove(t)
        except ValueError:
            continue
        for a in range(6):
            for b in range(6):
                r2 = list(rest)
                try:
                    for t in (a, (a + 3) % 6, b, (b + 3) % 6):
                        r2.remove(t)
                except ValueError:
                    continue
                if not r2:
                    return True
    return False

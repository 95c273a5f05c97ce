"""Exact arithmetic for integer combinations of q-th roots of unity.

An element of Z[zeta_q] is stored as a length-q integer vector ``coeffs``
where ``coeffs[j]`` is the multiplicity of zeta_q**j.  This representation
is not unique when q > 1, so equality, zero testing and exact division all
go through the canonical form: the coefficient polynomial reduced modulo
the cyclotomic polynomial Phi_q, a vector of length phi(q).

Coefficients are Python ints, so nothing can overflow here.  The
vectorised helpers at the bottom (:func:`reduction_table`,
:func:`rotation_table`) expose the same reduction as int64 numpy arrays for
the batched search code.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CycElem",
    "IntPolynomial",
    "NotDivisibleError",
    "cyclotomic_poly",
    "poly_divmod",
    "euler_phi",
    "root",
    "zero",
    "cyc_is_zero",
    "cyc_reduce",
    "cyc_add",
    "cyc_sub",
    "cyc_neg",
    "cyc_scale",
    "cyc_mul_root",
    "cyc_conj",
    "cyc_div_exact",
    "cyc_to_complex",
    "reduction_table",
    "rotation_table",
]


class NotDivisibleError(ArithmeticError):
    """Raised by :func:`cyc_div_exact` when the quotient leaves Z[zeta_q]."""


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, coefficients lowest degree first.

    The zero polynomial has ``coeffs == ()``; otherwise the last coefficient
    is nonzero.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(int(x) for x in c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if self.is_zero() or other.is_zero():
            return IntPolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(tuple(out))

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{mono}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def poly_divmod(a: IntPolynomial, b: IntPolynomial) -> tuple[IntPolynomial, IntPolynomial]:
    """Divide ``a`` by the monic polynomial ``b`` over the integers."""
    if b.is_zero() or b.coeffs[-1] != 1:
        raise ValueError("divisor must be monic")
    rem = list(a.coeffs)
    db = b.degree
    quot = [0] * max(len(rem) - db, 0)
    for k in range(len(rem) - 1 - db, -1, -1):
        c = rem[k + db]
        if c:
            quot[k] = c
            for j, bj in enumerate(b.coeffs):
                rem[k + j] -= c * bj
    return IntPolynomial(tuple(quot)), IntPolynomial(tuple(rem[:db]))


@functools.cache
def cyclotomic_poly(q: int) -> IntPolynomial:
    """Return Phi_q as ``(x**q - 1) / prod(Phi_d for d | q, d < q)``."""
    if not isinstance(q, (int, np.integer)) or q < 1:
        raise ValueError(f"cyclotomic_poly needs q >= 1, got {q!r}")
    q = int(q)
    num = IntPolynomial((-1,) + (0,) * (q - 1) + (1,))
    den = IntPolynomial((1,))
    for d in range(1, q):
        if q % d == 0:
            den = den * cyclotomic_poly(d)
    quot, rem = poly_divmod(num, den)
    if not rem.is_zero():  # pragma: no cover - would mean a bug in the recursion
        raise ArithmeticError(f"x^{q} - 1 not divisible by lower cyclotomic factors")
    return quot


@functools.cache
def euler_phi(q: int) -> int:
    return cyclotomic_poly(q).degree


@functools.cache
def _reduced_powers(q: int) -> tuple[tuple[int, ...], ...]:
    # row j holds x**j mod Phi_q, length phi(q)
    phi = cyclotomic_poly(q)
    m = phi.degree
    rows = []
    cur = [1] + [0] * (m - 1)
    for _ in range(q):
        rows.append(tuple(cur))
        # multiply by x, then fold the x**m term back with x**m = -sum(phi[k] x**k)
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for k in range(m):
                cur[k] -= top * phi.coeffs[k]
    return tuple(rows)


@dataclass(frozen=True, eq=False)
class CycElem:
    """An element ``sum(coeffs[j] * zeta_q**j)`` of Z[zeta_q].

    Equality and hashing use the reduced form, so ``1 + zeta_6**3`` equals
    the zero element.
    """

    q: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"root order must be >= 1, got {self.q}")
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) != self.q:
            raise ValueError(f"expected {self.q} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_exponents(cls, q: int, exponents: Iterable[int]) -> "CycElem":
        """Sum of zeta**e over ``exponents`` (taken mod q)."""
        c = [0] * q
        for e in exponents:
            c[int(e) % q] += 1
        return cls(q, tuple(c))

    @classmethod
    def from_reduced(cls, q: int, reduced: Sequence[int]) -> "CycElem":
        c = [int(x) for x in reduced]
        return cls(q, tuple(c + [0] * (q - len(c))))

    def reduced(self) -> tuple[int, ...]:
        return cyc_reduce(self)

    def is_zero(self) -> bool:
        return cyc_is_zero(self)

    def __eq__(self, other):
        if not isinstance(other, CycElem):
            return NotImplemented
        return self.q == other.q and self.reduced() == other.reduced()

    def __hash__(self):
        return hash((self.q, self.reduced()))

    def __add__(self, other):
        return cyc_add(self, other)

    def __sub__(self, other):
        return cyc_sub(self, other)

    def __neg__(self):
        return cyc_neg(self)

    def __complex__(self):
        return cyc_to_complex(self)

    def __repr__(self):
        return f"CycElem(q={self.q}, coeffs={self.coeffs})"


def root(q: int, j: int) -> CycElem:
    """zeta_q**j as a CycElem."""
    c = [0] * q
    c[j % q] = 1
    return CycElem(q, tuple(c))


def zero(q: int) -> CycElem:
    return CycElem(q, (0,) * q)


def cyc_reduce(a: CycElem) -> tuple[int, ...]:
    """Canonical form: coefficients of ``a`` modulo Phi_q, length phi(q)."""
    table = _reduced_powers(a.q)
    out = [0] * len(table[0])
    for j, c in enumerate(a.coeffs):
        if c:
            for k, t in enumerate(table[j]):
                if t:
                    out[k] += c * t
    return tuple(out)


def cyc_is_zero(a: CycElem) -> bool:
    return not any(cyc_reduce(a))


def _check_same_q(a: CycElem, b: CycElem):
    if a.q != b.q:
        raise ValueError(f"modulus mismatch: {a.q} != {b.q}")


def cyc_add(a: CycElem, b: CycElem) -> CycElem:
    _check_same_q(a, b)
    return CycElem(a.q, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))


def cyc_sub(a: CycElem, b: CycElem) -> CycElem:
    _check_same_q(a, b)
    return CycElem(a.q, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))


def cyc_neg(a: CycElem) -> CycElem:
    return CycElem(a.q, tuple(-x for x in a.coeffs))


def cyc_scale(a: CycElem, k: int) -> CycElem:
    return CycElem(a.q, tuple(k * x for x in a.coeffs))


def cyc_mul_root(a: CycElem, j: int) -> CycElem:
    """zeta**j * a, a cyclic shift of the coefficient vector."""
    q = a.q
    j %= q
    return CycElem(q, a.coeffs[q - j:] + a.coeffs[:q - j])


def cyc_conj(a: CycElem) -> CycElem:
    q = a.q
    return CycElem(q, tuple(a.coeffs[(-j) % q] for j in range(q)))


def cyc_div_exact(a: CycElem, k: int) -> CycElem:
    """Return b with k*b == a, or raise NotDivisibleError.

    Divisibility is decided on the reduced form; the result is returned in
    reduced form (zero-padded to length q).
    """
    if k < 1:
        raise ValueError(f"divisor must be positive, got {k}")
    red = cyc_reduce(a)
    if any(c % k for c in red):
        raise NotDivisibleError(f"{red} not divisible by {k} in Z[zeta_{a.q}]")
    return CycElem.from_reduced(a.q, [c // k for c in red])


def cyc_to_complex(a: CycElem) -> complex:
    """Floating-point value; for cross-checks only."""
    w = np.exp(2j * np.pi * np.arange(a.q) / a.q)
    return complex(np.dot(np.asarray(a.coeffs, dtype=float), w))


@functools.cache
def reduction_table(q: int) -> np.ndarray:
    """int64 array of shape (q, phi(q)); row j is zeta**j in reduced coordinates.

    Reduction is linear, so a count vector ``c`` reduces to ``c @ table``.
    """
    t = np.array(_reduced_powers(q), dtype=np.int64)
    t.setflags(write=False)
    return t


@functools.cache
def rotation_table(q: int) -> np.ndarray:
    """int64 array (q, phi, phi): ``v @ rot[j]`` multiplies reduced ``v`` by zeta**j."""
    red = reduction_table(q)
    m = red.shape[1]
    rot = np.zeros((q, m, m), dtype=np.int64)
    for j in range(q):
        for k in range(m):
            # basis vector x**k times x**j
            rot[j, k] = red[(k + j) % q]
    rot.setflags(write=False)
    return rot

"""Arithmetic over binary extension fields GF(2^p), 1 <= p <= 8.

Elements are integers in ``[0, q)``; bit ``k`` of an element is the
coefficient of ``x^k`` of the polynomial it represents, so addition is XOR.
Multiplication goes through log/antilog tables built from a fixed primitive
polynomial per extension degree (see ``PRIMITIVE_POLYS``).
"""

from __future__ import annotations

import numpy as np

# Lexicographically smallest primitive polynomial per degree, bit-packed
# (bit k = coefficient of x^k). p = 1 is GF(2) itself.
PRIMITIVE_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
}


class FieldError(ValueError):
    """Bad field configuration or an undefined field operation."""


def poly_mulmod(a: int, b: int, poly: int, p: int) -> int:
    """Carry-less product of ``a`` and ``b`` reduced modulo ``poly``.

    Shift-and-add reference, independent of the tables. Used to build and to
    cross-check them.
    """
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> p & 1:
            a ^= poly
    return result


class Field:
    """GF(2^p) with table-driven arithmetic.

    Immutable after construction. Besides the scalar operations the field
    exposes full ``q x q`` addition/multiplication tables and an inverse
    vector, which is what the vectorized decoders index into.
    """

    def __init__(self, p: int):
        if not isinstance(p, (int, np.integer)) or not 1 <= p <= 8:
            raise FieldError(f"extension degree must be in 1..8, got {p!r}")
        self.p = int(p)
        self.q = 1 << self.p
        self.primitive_poly = PRIMITIVE_POLYS[self.p]

        q = self.q
        exp = np.zeros(2 * q, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = poly_mulmod(x, 2, self.primitive_poly, self.p)
        exp[q - 1 : 2 * (q - 1)] = exp[: q - 1]
        self.exp_table = exp
        self.log_table = log

        elems = np.arange(q)
        self.add_table = elems[:, None] ^ elems[None, :]
        mul = np.zeros((q, q), dtype=np.int64)
        nz = elems[1:]
        mul[1:, 1:] = exp[(log[nz][:, None] + log[nz][None, :]) % (q - 1)]
        self.mul_table = mul
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = exp[(q - 1 - log[nz]) % (q - 1)]
        self.inv_table = inv
        for t in (self.exp_table, self.log_table, self.add_table, self.mul_table, self.inv_table):
            t.setflags(write=False)

    def __repr__(self):
        return f"Field(p={self.p}, q={self.q}, poly={self.primitive_poly:#x})"

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def _check(self, a):
        if not 0 <= a < self.q:
            raise FieldError(f"{a} is not an element of GF({self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def elements(self) -> np.ndarray:
        return np.arange(self.q)


_CACHE: dict[int, Field] = {}


def field_new(p: int) -> Field:
    """Return the (cached) field GF(2^p)."""
    if p not in _CACHE:
        _CACHE[p] = Field(p)
    return _CACHE[p]


def field_from_q(q: int) -> Field:
    p = int(q).bit_length() - 1
    if q < 2 or 1 << p != q:
        raise FieldError(f"q must be a power of two in 2..256, got {q}")
    return field_new(p)

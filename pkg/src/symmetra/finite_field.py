"""Galois fields GF(p^n) as lookup tables.

Elements are integers ``0 .. p^n - 1``; the base-``p`` digits of an element are
its coefficients in the polynomial basis ``1, x, ..., x^(n-1)``, least
significant first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NotPrime, TooLarge

MAX_ORDER = 64


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % k for k in range(2, int(p**0.5) + 1))


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of ``a`` modulo monic ``m`` (coefficient lists, low degree first)."""
    a = a[:]
    dm = len(m) - 1
    for k in range(len(a) - 1, dm - 1, -1):
        c = a[k] % p
        if c:
            for j in range(dm + 1):
                a[k - dm + j] = (a[k - dm + j] - c * m[j]) % p
    return [c % p for c in a[:dm]] + [0] * max(0, dm - len(a))


def _is_irreducible(m: list[int], p: int) -> bool:
    n = len(m) - 1
    for deg in range(1, n // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            if not any(_poly_mod(m, list(low) + [1], p)):
                return False
    return True


def least_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of degree ``n``, compared from ``x^(n-1)`` down."""
    for high_first in itertools.product(range(p), repeat=n):
        m = list(reversed(high_first)) + [1]
        if _is_irreducible(m, p):
            return tuple(m)
    raise AssertionError("an irreducible polynomial always exists")


@dataclass(frozen=True, eq=False)
class FiniteField:
    p: int
    n: int
    modulus: tuple[int, ...]
    add: np.ndarray
    mul: np.ndarray
    trace: np.ndarray

    @property
    def d(self) -> int:
        return self.p**self.n

    @property
    def elements(self) -> range:
        return range(self.d)

    def coords(self, x: int) -> list[int]:
        return [(x // self.p**k) % self.p for k in range(self.n)]

    def from_coords(self, c) -> int:
        return int(sum((int(v) % self.p) * self.p**k for k, v in enumerate(c)))

    @cached_property
    def neg(self) -> np.ndarray:
        return np.argmax(self.add == 0, axis=1)

    @cached_property
    def inv(self) -> np.ndarray:
        out = np.full(self.d, -1, dtype=np.int64)
        out[1:] = np.argmax(self.mul[1:] == 1, axis=1)
        return out

    def sub(self, a, b):
        return self.add[a, self.neg[b]]

    def scalar(self, k: int) -> int:
        """The prime-field element ``k * 1``."""
        return k % self.p

    def power(self, x: int, k: int) -> int:
        out = 1
        for _ in range(k):
            out = int(self.mul[out, x])
        return out

    @cached_property
    def basis(self) -> tuple[int, ...]:
        return tuple(self.p**k for k in range(self.n))

    @cached_property
    def dual_basis(self) -> tuple[int, ...]:
        return self.dual_of(self.basis)

    def dual_of(self, basis) -> tuple[int, ...]:
        out = []
        for s in range(self.n):
            for y in self.elements:
                if all(self.trace[self.mul[e, y]] == (r == s) for r, e in enumerate(basis)):
                    out.append(y)
                    break
            else:
                raise ValueError("basis has no dual (not linearly independent)")
        return tuple(out)

    @cached_property
    def self_dual_basis(self) -> tuple[int, ...] | None:
        """A basis equal to its own trace-dual basis, if one exists (always for p = 2)."""
        for cand in itertools.combinations(range(1, self.d), self.n):
            try:
                if tuple(cand) == self.dual_of(cand):
                    return tuple(cand)
            except ValueError:
                continue
        return None

    @cached_property
    def primitive_element(self) -> int:
        for x in range(2 if self.d > 2 else 1, self.d):
            y, k = x, 1
            while y != 1:
                y = int(self.mul[y, x])
                k += 1
            if k == self.d - 1:
                return x
        raise AssertionError("multiplicative group is cyclic")


def build_field(p: int, n: int = 1) -> FiniteField:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if n < 1:
        raise ValueError("degree must be positive")
    d = p**n
    if d > MAX_ORDER:
        raise TooLarge(f"field order {d} exceeds {MAX_ORDER}")
    m = list(least_irreducible(p, n))
    digits = np.array([[(x // p**k) % p for k in range(n)] for x in range(d)])
    weights = p ** np.arange(n)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    mul = np.empty((d, d), dtype=np.int64)
    for a in range(d):
        for b in range(d):
            prod = np.convolve(digits[a], digits[b]).tolist() if n > 1 else [digits[a][0] * digits[b][0]]
            mul[a, b] = int(np.dot(_poly_mod(prod, m, p), weights))
    trace = np.empty(d, dtype=np.int64)
    for x in range(d):
        t, y = 0, x
        for _ in range(n):
            t = add[t, y]
            y = _pow(mul, y, p)
        if t >= p:
            raise AssertionError("trace left the prime field")
        trace[x] = t
    return FiniteField(p, n, tuple(m), add.astype(np.int64), mul, trace)


def _pow(mul, x, k):
    out = 1
    for _ in range(k):
        out = int(mul[out, x])
    return out


def field_of_order(d: int) -> FiniteField:
    """The field with ``d`` elements, ``d`` a prime power."""
    for p in range(2, d + 1):
        if d % p == 0:
            break
    else:
        raise NotPrime(f"{d} is not a prime power")
    n, q = 0, d
    while q % p == 0:
        q //= p
        n += 1
    if q != 1 or not is_prime(p):
        raise NotPrime(f"{d} is not a prime power")
    return build_field(p, n)

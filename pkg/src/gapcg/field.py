"""Exact arithmetic in prime fields F_q.

All values are integer residues in [0, q).  The modulus is carried by a
:class:`FieldSpec`; bulk operations work directly on numpy integer arrays.
q is restricted to odd primes below 2**16 so that any product of two
residues fits comfortably in a 32-bit accumulator (we use int64 throughout,
which leaves further headroom).  Nothing here is constant-time: this is a
research artifact, not hardened cryptographic code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SpecMismatch, ZeroInverse

MAX_Q = 1 << 16


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality test (fine for n < 2**16)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of n, ascending."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def smallest_primitive_root(q: int) -> int:
    """Smallest generator of F_q^* (deterministic across runs)."""
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    if q == 2:
        return 1
    factors = prime_factors(q - 1)
    for g in range(2, q):
        if all(pow(g, (q - 1) // p, q) != 1 for p in factors):
            return g
    raise AssertionError("unreachable: every prime field has a generator")


class FieldSpec:
    """The prime field F_q, 3 <= q < 2**16.

    Scalar helpers take and return plain ints; the ``*_arr`` variants are
    vectorised over numpy int64 arrays with entries already reduced mod q.
    """

    __slots__ = ("q",)

    def __init__(self, q: int):
        if not (3 <= q < MAX_Q):
            raise ValueError(f"q must satisfy 3 <= q < 2**16, got {q}")
        if not is_prime(q):
            raise ValueError(f"q must be prime, got {q}")
        self.q = q

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("FieldSpec", self.q))

    def __repr__(self) -> str:
        return f"FieldSpec(q={self.q})"

    # -- scalar operations -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def inv(self, a: int) -> int:
        """Multiplicative inverse via Fermat; raises ZeroInverse on 0."""
        a %= self.q
        if a == 0:
            raise ZeroInverse("0 has no multiplicative inverse")
        return pow(a, self.q - 2, self.q)

    def pow(self, a: int, e: int) -> int:
        """a**e mod q with the convention 0**0 = 1."""
        if e < 0:
            raise ValueError("exponent must be nonnegative")
        return pow(a % self.q, e, self.q)

    @property
    def bit_width(self) -> int:
        """ceil(log2 q): bits needed to store one residue."""
        return (self.q - 1).bit_length()

    @property
    def primitive_root(self) -> int:
        return smallest_primitive_root(self.q)

    def root_of_unity(self, order: int) -> int:
        """An element of multiplicative order exactly `order` (must divide q-1)."""
        if order <= 0 or (self.q - 1) % order != 0:
            raise ValueError(f"no root of unity of order {order} in F_{self.q}")
        return pow(self.primitive_root, (self.q - 1) // order, self.q)

    # -- array operations --------------------------------------------------

    def reduce_arr(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a, dtype=np.int64) % self.q

    def add_arr(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a + b) % self.q

    def mul_arr(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a * b) % self.q

    def neg_arr(self, a: np.ndarray) -> np.ndarray:
        return (self.q - a) % self.q

    def random_arr(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.integers(0, self.q, size=size, dtype=np.int64)

    def random_nonzero_arr(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.integers(1, self.q, size=size, dtype=np.int64)


@dataclass(frozen=True)
class FieldElement:
    """A residue in [0, q) tagged with its field."""

    value: int
    spec: FieldSpec

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.spec.q)

    def _check(self, other: "FieldElement") -> None:
        if self.spec != other.spec:
            raise SpecMismatch("elements of different fields")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.value + other.value, self.spec)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.value - other.value, self.spec)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.value * other.value, self.spec)

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.value, self.spec)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.spec.inv(self.value), self.spec)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return self * other.inverse()

    def __pow__(self, e: int) -> "FieldElement":
        return FieldElement(self.spec.pow(self.value, e), self.spec)

    def __int__(self) -> int:
        return self.value


def field_inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def field_pow(a: FieldElement, e: int) -> FieldElement:
    return a ** e


def primitive_root(q: int) -> FieldElement:
    spec = FieldSpec(q)
    return FieldElement(spec.primitive_root, spec)

"""Elements of F_q[G] for finite abelian G = Z/d_1 x ... x Z/d_n.

Elements are dense coefficient vectors in the canonical mixed-radix order:
the tuple (a_1, ..., a_n) sits at index a_1 + a_2*d_1 + a_3*d_1*d_2 + ...
(factor 1 fastest).  Multiplication is convolution over the group; when every
d_i divides q-1 a multidimensional number-theoretic transform evaluates the
element simultaneously at all character points, which both speeds up products
and realises the CRT isomorphism F_q[G] ~ F_q^|G| used to split one ring
correlation into |G| scalar ones.

A module-level ``FIELD_OPS`` counter tallies field additions/multiplications
performed by the transform code paths (single-threaded instrumentation).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import IndexOutOfRange, NoRootOfUnity, NotASubgroup, SpecMismatch
from .field import FieldSpec


class OpCounter:
    """Field-operation tally for the transform code paths."""

    __slots__ = ("count", "enabled")

    def __init__(self):
        self.count = 0
        self.enabled = False

    def reset(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        if self.enabled:
            self.count += int(n)


FIELD_OPS = OpCounter()

# Products of elements at least this large go through the transform when the
# root-of-unity preconditions hold; smaller ones use direct convolution.
FFT_CROSSOVER = 64


class GroupSpec:
    """G = Z/d_1 x ... x Z/d_n over an ambient prime field.

    Requires gcd(|G|, q) = 1 (semisimplicity; the transform needs it and
    nothing in this package works without it).
    """

    def __init__(self, orders: tuple[int, ...] | list[int], field: FieldSpec):
        orders = tuple(int(d) for d in orders)
        if not orders or any(d < 1 for d in orders):
            raise ValueError("each cyclic factor order must be >= 2")
        # canonical form: drop trivial factors; the trivial group itself is (1,)
        stripped = tuple(d for d in orders if d > 1)
        orders = stripped if stripped else (1,)
        self.orders = orders
        self.field = field
        size = 1
        for d in orders:
            size *= d
        self.size = size
        if np.gcd(size, field.q) != 1:
            raise ValueError(f"|G| = {size} must be coprime to q = {field.q}")
        self._weights = []
        w = 1
        for d in orders:
            self._weights.append(w)
            w *= d
        self._weights = np.asarray(self._weights, dtype=np.int64)
        self._orders_arr = np.asarray(orders, dtype=np.int64)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupSpec)
            and other.orders == self.orders
            and other.field == self.field
        )

    def __hash__(self) -> int:
        return hash(("GroupSpec", self.orders, self.field.q))

    def __repr__(self) -> str:
        return f"GroupSpec(orders={self.orders}, q={self.field.q})"

    @property
    def n_factors(self) -> int:
        return len(self.orders)

    def decode(self, idx) -> np.ndarray:
        """Mixed-radix digits of one index or an array of indices, shape (..., n)."""
        idx = np.asarray(idx, dtype=np.int64)
        digits = np.empty(idx.shape + (len(self.orders),), dtype=np.int64)
        rem = idx
        for i, d in enumerate(self.orders):
            digits[..., i] = rem % d
            rem = rem // d
        return digits

    def encode(self, digits: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`decode`."""
        digits = np.asarray(digits, dtype=np.int64)
        return (digits * self._weights).sum(axis=-1)

    def mul_indices(self, i, j):
        """Index of the group product (componentwise sum mod the orders)."""
        i_arr = np.asarray(i, dtype=np.int64)
        j_arr = np.asarray(j, dtype=np.int64)
        if np.any(i_arr < 0) or np.any(i_arr >= self.size) or np.any(j_arr < 0) or np.any(j_arr >= self.size):
            raise IndexOutOfRange("group index out of range")
        out = self.encode((self.decode(i_arr) + self.decode(j_arr)) % self._orders_arr)
        return int(out) if np.isscalar(i) and np.isscalar(j) else out

    def inverse_indices(self, i):
        """Index of the group inverse (componentwise negation)."""
        i_arr = np.asarray(i, dtype=np.int64)
        out = self.encode((-self.decode(i_arr)) % self._orders_arr)
        return int(out) if np.isscalar(i) else out

    @cached_property
    def inverse_permutation(self) -> np.ndarray:
        return self.inverse_indices(np.arange(self.size))

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, np.zeros(self.size, dtype=np.int64))

    def one(self) -> "AlgebraElement":
        c = np.zeros(self.size, dtype=np.int64)
        c[0] = 1
        return AlgebraElement(self, c)

    def monomial(self, index: int, value: int = 1) -> "AlgebraElement":
        c = np.zeros(self.size, dtype=np.int64)
        c[index] = value % self.field.q
        return AlgebraElement(self, c)

    def from_coeffs(self, coeffs) -> "AlgebraElement":
        return AlgebraElement(self, np.asarray(coeffs, dtype=np.int64) % self.field.q)

    def random(self, rng: np.random.Generator) -> "AlgebraElement":
        return AlgebraElement(self, self.field.random_arr(rng, self.size))

    def dft_supported(self) -> bool:
        return all((self.field.q - 1) % d == 0 for d in self.orders)


@dataclass(frozen=True)
class AlgebraElement:
    """Dense element of F_q[G]: |G| residues in the canonical order."""

    group: GroupSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.int64)
        if c.shape != (self.group.size,):
            raise ValueError(f"need exactly {self.group.size} coefficients")
        object.__setattr__(self, "coeffs", c)

    def _check(self, other: "AlgebraElement") -> None:
        if self.group != other.group:
            raise SpecMismatch("elements of different group algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.group, (self.coeffs + other.coeffs) % self.group.field.q)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.group, (self.coeffs - other.coeffs) % self.group.field.q)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.group, (-self.coeffs) % self.group.field.q)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return mul(self, other)

    def scale(self, k: int) -> "AlgebraElement":
        return AlgebraElement(self.group, (self.coeffs * (k % self.group.field.q)) % self.group.field.q)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AlgebraElement)
            and self.group == other.group
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def weight(self) -> int:
        return int(np.count_nonzero(self.coeffs))

    def to_bytes(self) -> bytes:
        return serialize_element(self)


@dataclass(frozen=True)
class SparseElement:
    """Position-value form: sorted strictly-increasing indices, nonzero values."""

    group: GroupSpec
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.int64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices/values must be equal-length 1-d arrays")
        if idx.size:
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= self.group.size:
                raise IndexOutOfRange("sparse index out of range")
            if np.any(val % self.group.field.q == 0):
                raise ValueError("sparse values must be nonzero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val % self.group.field.q)

    @property
    def weight(self) -> int:
        return int(self.indices.size)


def sparse_from_pairs(group: GroupSpec, indices, values) -> SparseElement:
    """Build a SparseElement from unsorted, possibly colliding pairs (values add)."""
    idx = np.asarray(indices, dtype=np.int64)
    val = np.asarray(values, dtype=np.int64) % group.field.q
    dense = np.zeros(group.size, dtype=np.int64)
    np.add.at(dense, idx, val)
    dense %= group.field.q
    nz = np.nonzero(dense)[0]
    return SparseElement(group, nz, dense[nz])


def sparse_to_dense(s: SparseElement) -> AlgebraElement:
    c = np.zeros(s.group.size, dtype=np.int64)
    c[s.indices] = s.values
    return AlgebraElement(s.group, c)


def dense_to_sparse(a: AlgebraElement) -> SparseElement:
    nz = np.nonzero(a.coeffs)[0]
    return SparseElement(a.group, nz, a.coeffs[nz])


def weight(a: AlgebraElement) -> int:
    return a.weight()


def group_mul_indices(i: int, j: int, g: GroupSpec) -> int:
    return g.mul_indices(i, j)


# ---------------------------------------------------------------------------
# products


def _grid(a: AlgebraElement) -> np.ndarray:
    """View coefficients as an n-dim array with axis i indexing factor i."""
    return a.coeffs.reshape(a.group.orders, order="F")


def _ungrid(grid: np.ndarray, group: GroupSpec) -> np.ndarray:
    return grid.reshape(group.size, order="F")


def mul_naive(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Exact convolution, O(|G|^2) field multiplications."""
    a._check(b)
    g = a.group
    q = g.field.q
    bg = _grid(b)
    acc = np.zeros(g.orders, dtype=np.int64)
    digits = g.decode(np.arange(g.size))
    axes = tuple(range(g.n_factors))
    for h in range(g.size):
        ah = int(a.coeffs[h])
        if ah == 0:
            continue
        shifted = np.roll(bg, shift=tuple(digits[h]), axis=axes)
        acc = (acc + ah * shifted) % q
    return AlgebraElement(g, _ungrid(acc, g))


def _dft_matrix(d: int, q: int, zeta: int) -> np.ndarray:
    k = np.arange(d, dtype=np.int64)
    exps = (k[:, None] * k[None, :]) % d
    pows = np.array([pow(zeta, int(e), q) for e in range(d)], dtype=np.int64)
    return pows[exps]


def _dft_1d(mat: np.ndarray, d: int, q: int, zeta: int) -> np.ndarray:
    """Transform the last axis (length d) of `mat`; zeta has order d mod q.

    Prime lengths use the d x d character matrix; composite lengths split off
    the smallest prime factor p (Cooley-Tukey), so the operation count follows
    the sum of prime factors of d, per axis.
    """
    batch = mat.shape[0]
    if d == 1:
        return mat
    if d == 2:
        # order-2 root is -1: pure butterfly, no multiplications
        s = (mat[:, 0] + mat[:, 1]) % q
        t = (mat[:, 0] - mat[:, 1]) % q
        FIELD_OPS.add(2 * batch)
        return np.stack([s, t], axis=1)
    p = next(f for f in range(2, d + 1) if d % f == 0)
    if p == d:
        out = (mat @ _dft_matrix(d, q, zeta)) % q
        FIELD_OPS.add(batch * d * d + batch * d * (d - 1))
        return out
    m = d // p
    # decimate in time: stride-p subsequences, recurse at order m, then
    # X[k] = sum_j zeta^(k*j) * A_j[k mod m]  for the p inner transforms A_j
    sub = mat.reshape(batch, m, p)  # sub[:, r, j] = mat[:, r*p + j]
    zeta_m = pow(zeta, p, q)
    inner = np.empty((batch, p, m), dtype=np.int64)
    for j in range(p):
        inner[:, j, :] = _dft_1d(np.ascontiguousarray(sub[:, :, j]), m, q, zeta_m)
    zpows = np.array([pow(zeta, int(e), q) for e in range(d)], dtype=np.int64)
    zp_m = pow(zeta, m, q)  # order-p root
    wp = np.array([pow(zp_m, int(e), q) for e in range(p)], dtype=np.int64)
    k = np.arange(d)
    kmod = k % m
    kdiv = k // m
    acc = inner[:, 0, kmod].copy()
    for j in range(1, p):
        tw = wp[(j * kdiv) % p] * zpows[(j * kmod) % d] % q
        acc = (acc + inner[:, j, kmod] * tw) % q
        FIELD_OPS.add(3 * batch * d)
    return acc


def _dft(a: AlgebraElement, inverse: bool) -> np.ndarray:
    g = a.group
    q = g.field.q
    for d in g.orders:
        if (q - 1) % d != 0:
            raise NoRootOfUnity(f"factor order {d} does not divide q-1 = {q - 1}")
    grid = _grid(a)
    n = g.n_factors
    for i, d in enumerate(g.orders):
        zeta = g.field.root_of_unity(d)
        if inverse:
            zeta = g.field.inv(zeta)
        moved = np.moveaxis(grid, i, -1)
        shape = moved.shape
        flat = moved.reshape(-1, d)
        flat = _dft_1d(flat, d, q, zeta)
        grid = np.moveaxis(flat.reshape(shape), -1, i)
    out = _ungrid(grid, g)
    if inverse:
        out = (out * g.field.inv(g.size % q)) % q
        FIELD_OPS.add(g.size)
    return out


def dft_forward(a: AlgebraElement) -> np.ndarray:
    """Evaluations of `a` at all character points, canonical mixed-radix order.

    Entry k is the multivariate evaluation at (zeta_1^{k_1}, ..., zeta_n^{k_n})
    with zeta_i the canonical order-d_i root derived from the smallest
    generator of F_q^*.
    """
    return _dft(a, inverse=False)


def dft_inverse(values: np.ndarray, group: GroupSpec) -> AlgebraElement:
    """Exact inverse of :func:`dft_forward`."""
    values = np.asarray(values, dtype=np.int64) % group.field.q
    tmp = AlgebraElement(group, values)
    return AlgebraElement(group, _dft(tmp, inverse=True))


def mul_fft(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Transform-based product; identical output to :func:`mul_naive`."""
    a._check(b)
    va = dft_forward(a)
    vb = dft_forward(b)
    prod = (va * vb) % a.group.field.q
    FIELD_OPS.add(a.group.size)
    return dft_inverse(prod, a.group)


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Dispatch: transform when supported and |G| >= FFT_CROSSOVER, else naive."""
    if a.group.size >= FFT_CROSSOVER and a.group.dft_supported():
        return mul_fft(a, b)
    return mul_naive(a, b)


# ---------------------------------------------------------------------------
# duality helpers


def involution_bar(a: AlgebraElement) -> AlgebraElement:
    """The order-2 automorphism sending each group element to its inverse."""
    out = np.zeros_like(a.coeffs)
    out[a.group.inverse_permutation] = a.coeffs
    return AlgebraElement(a.group, out)


def inner_product(a: AlgebraElement, b: AlgebraElement) -> int:
    """Coordinatewise inner product; equals the 1_G-coefficient of a * bar(b)."""
    a._check(b)
    return int((a.coeffs * b.coeffs % a.group.field.q).sum() % a.group.field.q)


# ---------------------------------------------------------------------------
# quotient folding


def _smith_normal_form(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (diag, colops) with P*mat*colops diagonal for unimodular P.

    `diag` holds the nonnegative diagonal entries (divisibility chain not
    enforced; we only need the cyclic orders and the column transform).
    Row operations are applied in place and discarded; column operations are
    accumulated because the quotient map needs the right transform only.
    """
    a = mat.astype(object).copy()
    rows, cols = a.shape
    right = np.eye(cols, dtype=object)

    def swap_rows(i, j):
        a[[i, j], :] = a[[j, i], :]

    def swap_cols(i, j):
        a[:, [i, j]] = a[:, [j, i]]
        right[:, [i, j]] = right[:, [j, i]]

    def addmul_row(dst, src, k):
        a[dst, :] += k * a[src, :]

    def addmul_col(dst, src, k):
        a[:, dst] += k * a[:, src]
        right[:, dst] += k * right[:, src]

    r = 0
    while r < min(rows, cols):
        sub = a[r:, r:]
        nz = np.argwhere(sub != 0)
        if nz.size == 0:
            break
        pi, pj = min(((i, j) for i, j in nz), key=lambda t: abs(sub[t[0], t[1]]))
        swap_rows(r, r + pi)
        swap_cols(r, r + pj)
        while True:
            pivot = a[r, r]
            done = True
            for i in range(r + 1, rows):
                if a[i, r] != 0:
                    addmul_row(i, r, -(a[i, r] // pivot))
                    done = False
            for j in range(r + 1, cols):
                if a[r, j] != 0:
                    addmul_col(j, r, -(a[r, j] // pivot))
                    done = False
            if done:
                break
            # a remainder smaller than the pivot may now sit in row/col r
            sub = a[r:, r:]
            nz = np.argwhere(sub != 0)
            pi, pj = min(((i, j) for i, j in nz), key=lambda t: abs(sub[t[0], t[1]]))
            swap_rows(r, r + pi)
            swap_cols(r, r + pj)
        if a[r, r] < 0:
            a[:, r] = -a[:, r]
            right[:, r] = -right[:, r]
        r += 1
    diag = np.array([int(a[i, i]) for i in range(min(rows, cols))], dtype=np.int64)
    return diag, right.astype(object)


def validate_subgroup(group: GroupSpec, indices) -> np.ndarray:
    """Check closure and identity membership; returns the sorted index array."""
    idx = np.unique(np.asarray(indices, dtype=np.int64))
    if idx.size == 0 or idx[0] != 0:
        raise NotASubgroup("subgroup must contain the identity (index 0)")
    if idx[0] < 0 or idx[-1] >= group.size:
        raise NotASubgroup("subgroup index out of range")
    members = set(int(i) for i in idx)
    prods = group.mul_indices(np.repeat(idx, idx.size), np.tile(idx, idx.size))
    if not set(int(p) for p in np.unique(prods)) <= members:
        raise NotASubgroup("index set is not closed under the group operation")
    return idx


@dataclass(frozen=True)
class QuotientMap:
    """Canonical presentation of G/H with the index projection G -> G/H."""

    source: GroupSpec
    quotient: GroupSpec
    projection: np.ndarray  # length |G|, entries in [0, |G/H|)

    @property
    def subgroup_order(self) -> int:
        return self.source.size // self.quotient.size


def quotient_map(group: GroupSpec, subgroup_indices) -> QuotientMap:
    """Quotient presentation via Smith reduction of the relation lattice.

    G/H = Z^n / L where L is spanned by the rows (d_1 e_1, ..., d_n e_n) and
    the digit vectors of the subgroup members.  With column transform Q making
    the lattice diagonal (s_1, ..., s_n), the class of a digit vector x is
    (x @ Q) reduced mod s componentwise; factors with s_i = 1 drop out.
    """
    idx = validate_subgroup(group, subgroup_indices)
    n = group.n_factors
    rel = np.vstack([np.diag(np.asarray(group.orders, dtype=np.int64)), group.decode(idx)])
    diag, colq = _smith_normal_form(rel)
    orders_full = [int(diag[i]) for i in range(n)]
    if any(s == 0 for s in orders_full):
        raise AssertionError("relation lattice must have full rank")
    keep = [i for i, s in enumerate(orders_full) if s > 1]
    all_digits = group.decode(np.arange(group.size)).astype(object)  # (|G|, n)
    transformed = all_digits @ colq
    if keep:
        q_orders = tuple(orders_full[i] for i in keep)
        proj_digits = np.empty((group.size, len(keep)), dtype=np.int64)
        for col, i in enumerate(keep):
            proj_digits[:, col] = np.asarray(
                [int(v) % orders_full[i] for v in transformed[:, i]], dtype=np.int64
            )
        qspec = GroupSpec(q_orders, group.field)
        proj = qspec.encode(proj_digits)
    else:
        qspec = GroupSpec((1,), group.field)
        proj = np.zeros(group.size, dtype=np.int64)
    counts = np.bincount(proj, minlength=qspec.size)
    if np.unique(proj).size != qspec.size or np.any(counts != group.size // qspec.size):
        raise AssertionError("projection is not a surjective homomorphism with even fibers")
    return QuotientMap(group, qspec, proj)


def fold(a: AlgebraElement, subgroup_indices, qmap: QuotientMap | None = None) -> AlgebraElement:
    """Sum coefficients over H-cosets: the algebra morphism F_q[G] -> F_q[G/H]."""
    if qmap is None:
        qmap = quotient_map(a.group, subgroup_indices)
    out = np.zeros(qmap.quotient.size, dtype=np.int64)
    np.add.at(out, qmap.projection, a.coeffs)
    return AlgebraElement(qmap.quotient, out % a.group.field.q)


# ---------------------------------------------------------------------------
# serialization


def pack_bits_le(values: np.ndarray, width: int) -> bytes:
    """Pack fixed-width little-endian bit fields, first value in the low bits."""
    acc = 0
    for i, v in enumerate(np.asarray(values, dtype=np.int64).tolist()):
        acc |= int(v) << (i * width)
    nbytes = (len(values) * width + 7) // 8
    return acc.to_bytes(nbytes, "little") if nbytes else b""


def unpack_bits_le(data: bytes, width: int, count: int) -> np.ndarray:
    acc = int.from_bytes(data, "little")
    mask = (1 << width) - 1
    return np.array([(acc >> (i * width)) & mask for i in range(count)], dtype=np.int64)


def serialize_element(a: AlgebraElement) -> bytes:
    """Header (q: u16, n: u8, d_i: u16 each, little-endian) + packed coefficients."""
    g = a.group
    head = g.field.q.to_bytes(2, "little") + bytes([g.n_factors])
    for d in g.orders:
        head += d.to_bytes(2, "little")
    return head + pack_bits_le(a.coeffs, g.field.bit_width)


def deserialize_element(data: bytes) -> AlgebraElement:
    q = int.from_bytes(data[0:2], "little")
    n = data[2]
    orders = tuple(int.from_bytes(data[3 + 2 * i : 5 + 2 * i], "little") for i in range(n))
    g = GroupSpec(orders, FieldSpec(q))
    off = 3 + 2 * n
    coeffs = unpack_bits_le(data[off:], g.field.bit_width, g.size)
    return AlgebraElement(g, coeffs % q)

"""Programmable correlation generator for OLE over R = F_q[G].

Gen hands each party a short seed: c lists of t noisy positions/values (its
secret sparse vectors e_sigma^i) plus c^2 point-function-sharing keys covering
every pairwise product e_0^i * e_1^j (t^2 points each, values multiplying).
Expand stretches a seed locally into (x_sigma, z_sigma) with

    x_sigma = sum_i a_i * e_sigma^i          (a_0 = 1, a_i public)
    z_0 + z_1 = x_0 * x_1                    (exactly, in R)

With G = (Z/(q-1))^n the transform splits one ring OLE into |G| scalar OLE
instances over F_q.  The construction is programmable: x_sigma is a public
deterministic function phi of the party's auxiliary input rho_sigma, which is
what makes reuse across pairwise instances (and hence N-party triples) sound.

Noise flavors:

* ``monomial`` -- positions are t unrestricted group elements per list (the
  construction's plain distribution); sharing keys cover the full domain.
* ``exact``    -- like monomial but with the t positions distinct, so every
  e_sigma^i has weight exactly t.
* ``regular`` -- position k lies in the k-th contiguous block; blocks are
  cosets of the subgroup spanned by the low mixed-radix coordinates, so each
  pairwise product lands in one public block and its key only needs domain
  |G|/t.  Requires t = (q-1)^s.  This is what makes seeds small and expansion
  cheap, and it is the default.

A trusted dealer (``pcg_gen`` run locally) stands in for the distributed
seed-generation protocol, which is out of scope.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import dpf as dpf_mod
from . import prg
from .errors import (
    BatchMismatch,
    InconsistentProgramming,
    NoRootOfUnity,
    ParamError,
    SeedMismatch,
)
from .field import FieldSpec
from .group_algebra import (
    AlgebraElement,
    GroupSpec,
    dft_forward,
    mul,
    sparse_from_pairs,
    sparse_to_dense,
)

SEED_MAGIC = b"QAPC"
OUTPUT_MAGIC = b"QAOL"
FORMAT_VERSION = 1

NOISE_FLAVORS = ("regular", "monomial", "exact")


def _exact_power(t: int, base: int) -> int | None:
    """s with base**s == t, else None."""
    s = 0
    v = 1
    while v < t:
        v *= base
        s += 1
    return s if v == t else None


class PcgParams:
    """Public parameters: group, compression factor c, noise weight t.

    The c-1 nontrivial public ring elements are derived deterministically
    from a 32-byte context seed, so parameter sets serialize to a few bytes.
    """

    def __init__(
        self,
        group: GroupSpec,
        c: int = 2,
        t: int = 8,
        lam: int = prg.LAMBDA,
        context: bytes = bytes(32),
        noise: str = "regular",
    ):
        q = group.field.q
        if any(d != q - 1 for d in group.orders):
            raise ParamError("every cyclic factor must have order q-1")
        if c < 2:
            raise ParamError("compression factor c must be >= 2")
        if not (1 <= t <= group.size):
            raise ParamError("noise weight t must lie in [1, |G|]")
        if lam != prg.LAMBDA:
            raise ParamError(f"lambda is fixed at {prg.LAMBDA}")
        if len(context) != 32:
            raise ParamError("context seed must be 32 bytes")
        if noise not in NOISE_FLAVORS:
            raise ParamError(f"noise flavor must be one of {NOISE_FLAVORS}")
        self.group = group
        self.c = c
        self.t = t
        self.lam = lam
        self.context = bytes(context)
        self.noise = noise
        if noise == "regular":
            s = _exact_power(t, q - 1)
            if s is None or s > group.n_factors:
                raise ParamError(
                    "regular noise needs t = (q-1)**s with s <= n so that the "
                    "t blocks are subgroup cosets; use noise='monomial' otherwise"
                )
            self.block_exponent = s
        else:
            self.block_exponent = 0

    # -- derived structure -------------------------------------------------

    @property
    def q(self) -> int:
        return self.group.field.q

    @property
    def block_size(self) -> int:
        """Positions per block in regular mode (|G| when t has one block)."""
        return self.group.size // self.t if self.noise == "regular" else self.group.size

    @cached_property
    def block_spec(self) -> GroupSpec | None:
        if self.noise != "regular" or self.block_exponent == 0:
            return None
        return GroupSpec((self.q - 1,) * self.block_exponent, self.group.field)

    @cached_property
    def offset_spec(self) -> GroupSpec | None:
        if self.noise != "regular":
            return None
        s = self.block_exponent
        if s == self.group.n_factors:
            return GroupSpec((1,), self.group.field)
        return GroupSpec((self.q - 1,) * (self.group.n_factors - s), self.group.field)

    @cached_property
    def a_elements(self) -> list[AlgebraElement]:
        """(1, a_1, ..., a_{c-1}) with the nontrivial entries context-derived."""
        stream = prg.PrgStream(self.context)
        out = [self.group.one()]
        for _ in range(self.c - 1):
            out.append(self.group.from_coeffs(stream.field_elements(self.group.size, self.q)))
        return out

    @cached_property
    def a_tensor(self) -> list[AlgebraElement]:
        """Flat c^2 list with entry i + c*j equal to a_i * a_j."""
        a = self.a_elements
        return [mul(a[i], a[j]) for j in range(self.c) for i in range(self.c)][:]

    def params_block(self) -> bytes:
        blk = struct.pack("<H B", self.q, self.group.n_factors)
        for d in self.group.orders:
            blk += struct.pack("<H", d)
        blk += struct.pack("<BHH", self.c, self.t, self.lam)
        blk += bytes([NOISE_FLAVORS.index(self.noise)])
        blk += self.context
        return blk

    @cached_property
    def fingerprint(self) -> bytes:
        return hashlib.sha256(self.params_block()).digest()

    @staticmethod
    def from_params_block(data: bytes) -> tuple["PcgParams", int]:
        q, n = struct.unpack("<HB", data[:3])
        off = 3
        orders = []
        for _ in range(n):
            (d,) = struct.unpack("<H", data[off : off + 2])
            orders.append(d)
            off += 2
        c, t, lam = struct.unpack("<BHH", data[off : off + 5])
        off += 5
        noise = NOISE_FLAVORS[data[off]]
        off += 1
        context = data[off : off + 32]
        off += 32
        group = GroupSpec(tuple(orders), FieldSpec(q))
        return PcgParams(group, c=c, t=t, lam=lam, context=context, noise=noise), off


@dataclass(frozen=True)
class ProgramInput:
    """Auxiliary input rho: explicit position/value lists or a 32-byte seed."""

    seed: bytes | None = None
    positions: np.ndarray | None = None  # (c, t) group indices
    values: np.ndarray | None = None  # (c, t) residues in [1, q)

    @staticmethod
    def fresh(rng: np.random.Generator) -> "ProgramInput":
        return ProgramInput(seed=rng.bytes(32))

    def expand(self, params: PcgParams) -> tuple[np.ndarray, np.ndarray]:
        """Deterministic (positions, values), both (c, t)."""
        c, t, size, q = params.c, params.t, params.group.size, params.q
        if self.seed is not None:
            stream = prg.PrgStream(self.seed)
            pos = np.empty((c, t), dtype=np.int64)
            val = np.empty((c, t), dtype=np.int64)
            s = params.block_size
            for i in range(c):
                taken: set[int] = set()
                for k in range(t):
                    if params.noise == "regular":
                        pos[i, k] = k * s + stream.next_below(s)
                    elif params.noise == "exact":
                        p = stream.next_below(size)
                        while p in taken:
                            p = stream.next_below(size)
                        taken.add(p)
                        pos[i, k] = p
                    else:
                        pos[i, k] = stream.next_below(size)
                    val[i, k] = 1 + stream.next_below(q - 1)
            return pos, val
        pos = np.asarray(self.positions, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.int64)
        if pos.shape != (c, t) or val.shape != (c, t):
            raise ParamError(f"explicit program input must have shape ({c}, {t})")
        if np.any(pos < 0) or np.any(pos >= size):
            raise ParamError("position out of range")
        if np.any(val % q == 0):
            raise ParamError("values must be nonzero")
        if params.noise == "regular":
            s = params.block_size
            blocks = pos // s
            if np.any(blocks != np.arange(t)[None, :]):
                raise ParamError("regular noise requires position k inside block k")
        elif params.noise == "exact":
            for i in range(c):
                if np.unique(pos[i]).size != t:
                    raise ParamError("exact noise requires distinct positions per list")
        return pos, val % q


@dataclass
class PcgSeed:
    """One party's correlated seed."""

    party: int
    params_hash: bytes
    spfss_keys: list[dpf_mod.SpfssKey]  # flat index i + c*j
    positions: np.ndarray  # (c, t)
    values: np.ndarray  # (c, t)

    def bit_length(self, params: PcgParams) -> int:
        """Information content in bits: key payloads plus packed (A, b) lists."""
        bits = sum(k.bit_length() for k in self.spfss_keys)
        pos_w = max((params.group.size - 1).bit_length(), 1)
        val_w = (params.q - 1).bit_length()
        return bits + params.c * params.t * (pos_w + val_w)

    def pack(self, params: PcgParams) -> bytes:
        """Tight packing: per-key payload bits plus bit-packed (A, b) lists."""
        from .group_algebra import pack_bits_le

        c, t = params.c, params.t
        pos_w = max((params.group.size - 1).bit_length(), 1)
        val_w = (params.q - 1).bit_length()
        head = struct.pack("<BBH", self.party, c, t)
        parts = [head]
        for key in self.spfss_keys:
            for i in range(key.t_points):
                blob = key.component(i).pack()
                parts.append(blob)
        parts.append(pack_bits_le(self.positions.reshape(-1), pos_w))
        parts.append(pack_bits_le(self.values.reshape(-1), val_w))
        return b"".join(parts)

    def to_bytes(self, params: PcgParams) -> bytes:
        head = SEED_MAGIC + struct.pack("<H", FORMAT_VERSION)
        head += params.params_block()
        head += bytes([self.party])
        parts = [head]
        for key in self.spfss_keys:
            blob = key.to_bytes()
            parts.append(struct.pack("<I", len(blob)))
            parts.append(blob)
        c, t = params.c, params.t
        parts.append(self.positions.astype("<u4").tobytes())
        parts.append(self.values.astype("<u2").tobytes())
        return b"".join(parts)

    @staticmethod
    def from_bytes(data: bytes) -> tuple["PcgSeed", "PcgParams"]:
        if data[:4] != SEED_MAGIC:
            raise SeedMismatch("bad seed magic")
        (ver,) = struct.unpack("<H", data[4:6])
        if ver != FORMAT_VERSION:
            raise SeedMismatch("unsupported seed version")
        params, consumed = PcgParams.from_params_block(data[6:])
        off = 6 + consumed
        party = data[off]
        off += 1
        keys = []
        for _ in range(params.c * params.c):
            (ln,) = struct.unpack("<I", data[off : off + 4])
            off += 4
            keys.append(dpf_mod.SpfssKey.from_bytes(data[off : off + ln]))
            off += ln
        c, t = params.c, params.t
        pos = np.frombuffer(data[off : off + 4 * c * t], dtype="<u4").astype(np.int64).reshape(c, t)
        off += 4 * c * t
        val = np.frombuffer(data[off : off + 2 * c * t], dtype="<u2").astype(np.int64).reshape(c, t)
        seed = PcgSeed(party, params.fingerprint, keys, pos, val)
        return seed, params


@dataclass(frozen=True)
class OleOutput:
    """One party's expanded correlation half."""

    x: AlgebraElement
    z: AlgebraElement

    def to_bytes(self, params: PcgParams, party: int) -> bytes:
        xb = self.x.to_bytes()
        zb = self.z.to_bytes()
        return (
            OUTPUT_MAGIC
            + struct.pack("<HB", FORMAT_VERSION, party)
            + params.fingerprint
            + struct.pack("<I", len(xb))
            + xb
            + struct.pack("<I", len(zb))
            + zb
        )

    @staticmethod
    def from_bytes(data: bytes) -> tuple["OleOutput", int, bytes]:
        from .group_algebra import deserialize_element

        if data[:4] != OUTPUT_MAGIC:
            raise SeedMismatch("bad output magic")
        ver, party = struct.unpack("<HB", data[4:7])
        if ver != FORMAT_VERSION:
            raise SeedMismatch("unsupported output version")
        fp = data[7:39]
        (ln,) = struct.unpack("<I", data[39:43])
        x = deserialize_element(data[43 : 43 + ln])
        off = 43 + ln
        (ln2,) = struct.unpack("<I", data[off : off + 4])
        z = deserialize_element(data[off + 4 : off + 4 + ln2])
        return OleOutput(x, z), party, fp


@dataclass(frozen=True)
class ExpandStats:
    prg_calls: int
    ring_mults: int


@dataclass(frozen=True)
class ScalarOleBatch:
    """T scalar OLE instances: z0[k] + z1[k] = x0[k] * x1[k] in F_q."""

    q: int
    x0: np.ndarray
    x1: np.ndarray
    z0: np.ndarray
    z1: np.ndarray

    def __len__(self) -> int:
        return self.x0.size

    def check(self) -> bool:
        return bool(np.all((self.z0 + self.z1) % self.q == self.x0 * self.x1 % self.q))


@dataclass(frozen=True)
class TripleShares:
    """One party's additive shares of (a, b, a*b) batches."""

    q: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


# ---------------------------------------------------------------------------
# Gen / Expand


def _error_vectors(params: PcgParams, positions: np.ndarray, values: np.ndarray) -> list[AlgebraElement]:
    return [
        sparse_to_dense(sparse_from_pairs(params.group, positions[i], values[i]))
        for i in range(params.c)
    ]


def phi(params: PcgParams, rho: ProgramInput) -> AlgebraElement:
    """The public programmability map: rho -> x = sum_i a_i * e^i(rho)."""
    pos, val = rho.expand(params)
    e = _error_vectors(params, pos, val)
    acc = params.group.zero()
    for i in range(params.c):
        acc = acc + mul(params.a_elements[i], e[i])
    return acc


def _product_points(params: PcgParams, pos0: np.ndarray, val0: np.ndarray, pos1: np.ndarray, val1: np.ndarray, i: int, j: int):
    """Positions/values of e_0^i * e_1^j as t^2 point functions.

    Returns (domain_size, points, values): in regular mode the points are
    within-block offsets over the reduced domain (the target block for pair
    (k, l) is public and recomputed at expansion time).
    """
    g = params.group
    q = params.q
    vals = (val0[i][:, None] * val1[j][None, :]).reshape(-1) % q
    if params.noise != "regular":
        pts = g.mul_indices(
            np.repeat(pos0[i], params.t), np.tile(pos1[j], params.t)
        ).reshape(-1)
        return g.size, pts, vals
    s = params.block_size
    off0 = pos0[i] % s
    off1 = pos1[j] % s
    osp = params.offset_spec
    pts = osp.mul_indices(np.repeat(off0, params.t), np.tile(off1, params.t)).reshape(-1)
    return s, pts, vals


def _block_targets(params: PcgParams) -> np.ndarray:
    """Public (t, t) table: block of the product of block-k and block-l spikes."""
    t = params.t
    if params.block_spec is None:
        return np.zeros((t, t), dtype=np.int64)
    bsp = params.block_spec
    return bsp.mul_indices(
        np.repeat(np.arange(t, dtype=np.int64), t), np.tile(np.arange(t, dtype=np.int64), t)
    ).reshape(t, t)


def _fresh_with_fold_rejection(params: PcgParams, rng: np.random.Generator, qmap) -> ProgramInput:
    """Resample a fresh input until every folded noise block reaches its
    expected weight (removes the unusually-easy tail of folded instances)."""
    from .analysis import expected_fold_weight
    from .group_algebra import fold

    target = expected_fold_weight(qmap.quotient.size, params.t, params.q)
    for _ in range(10_000):
        rho = ProgramInput.fresh(rng)
        pos, val = rho.expand(params)
        folded = [fold(e, None, qmap=qmap).weight() for e in _error_vectors(params, pos, val)]
        if all(w >= target for w in folded):
            return rho
    raise ParamError("fold-rejection sampling did not converge")


def pcg_gen(
    params: PcgParams,
    rng: np.random.Generator,
    rho0: ProgramInput | None = None,
    rho1: ProgramInput | None = None,
    reject_subgroup=None,
) -> tuple[PcgSeed, PcgSeed]:
    """Trusted-dealer seed generation (the distributed protocol is out of scope).

    ``reject_subgroup`` (a list of subgroup indices) activates rejection
    sampling of the fresh noise against the corresponding quotient; it cannot
    be combined with explicitly programmed inputs.
    """
    if reject_subgroup is not None:
        if rho0 is not None or rho1 is not None:
            raise ParamError("fold-rejection applies to freshly sampled inputs only")
        from .group_algebra import quotient_map

        qmap = quotient_map(params.group, reject_subgroup)
        rho0 = _fresh_with_fold_rejection(params, rng, qmap)
        rho1 = _fresh_with_fold_rejection(params, rng, qmap)
    rho0 = rho0 if rho0 is not None else ProgramInput.fresh(rng)
    rho1 = rho1 if rho1 is not None else ProgramInput.fresh(rng)
    pos0, val0 = rho0.expand(params)
    pos1, val1 = rho1.expand(params)
    keys0: list[dpf_mod.SpfssKey] = [None] * (params.c * params.c)
    keys1: list[dpf_mod.SpfssKey] = [None] * (params.c * params.c)
    for j in range(params.c):
        for i in range(params.c):
            domain, pts, vals = _product_points(params, pos0, val0, pos1, val1, i, j)
            k0, k1 = dpf_mod.spfss_gen(pts, vals, domain, params.q, rng)
            keys0[i + params.c * j] = k0
            keys1[i + params.c * j] = k1
    s0 = PcgSeed(0, params.fingerprint, keys0, pos0, val0)
    s1 = PcgSeed(1, params.fingerprint, keys1, pos1, val1)
    return s0, s1


def pcg_expand_with_stats(sigma: int, seed: PcgSeed, params: PcgParams) -> tuple[OleOutput, ExpandStats]:
    """Stretch a seed into (x_sigma, z_sigma); counts PRG calls and ring products."""
    if seed.party != sigma:
        raise SeedMismatch("party index does not match seed")
    if seed.params_hash != params.fingerprint:
        raise SeedMismatch("seed was generated under different parameters")
    g = params.group
    q = params.q
    prg.CALLS.reset()
    ring_mults = 0

    e = _error_vectors(params, seed.positions, seed.values)
    x = g.zero()
    for i in range(params.c):
        x = x + mul(params.a_elements[i], e[i])
        ring_mults += 1

    targets = _block_targets(params) if params.noise == "regular" else None
    z = g.zero()
    for j in range(params.c):
        for i in range(params.c):
            key = seed.spfss_keys[i + params.c * j]
            if params.noise != "regular":
                u = dpf_mod.spfss_full_eval(sigma, key)
            else:
                u = np.zeros(g.size, dtype=np.int64)
                if key.batch is not None:
                    evals = dpf_mod.batch_full_eval(key.batch)  # (t^2, S)
                    view = u.reshape(params.t, params.block_size)
                    np.add.at(view, targets.reshape(-1), evals)
                    u %= q
            z = z + mul(params.a_tensor[i + params.c * j], g.from_coeffs(u))
            ring_mults += 1

    stats = ExpandStats(prg_calls=prg.CALLS.count, ring_mults=ring_mults)
    return OleOutput(x=x, z=z), stats


def pcg_expand(sigma: int, seed: PcgSeed, params: PcgParams) -> OleOutput:
    out, _ = pcg_expand_with_stats(sigma, seed, params)
    return out


def verify_ole(out0: OleOutput, out1: OleOutput, params: PcgParams) -> bool:
    """z0 + z1 == x0 * x1, exactly."""
    lhs = out0.z + out1.z
    rhs = mul(out0.x, out1.x)
    return lhs == rhs


def crt_split_party(out: OleOutput) -> tuple[np.ndarray, np.ndarray]:
    """A party's local conversion of its ring share into |G| scalar shares."""
    return dft_forward(out.x), dft_forward(out.z)


def crt_split(out0: OleOutput, out1: OleOutput, params: PcgParams) -> ScalarOleBatch:
    if not params.group.dft_supported():
        raise NoRootOfUnity("CRT split needs every factor order to divide q-1")
    x0, z0 = crt_split_party(out0)
    x1, z1 = crt_split_party(out1)
    return ScalarOleBatch(params.q, x0, x1, z0, z1)


def rsample(sigma: int, out_sigma: OleOutput, params: PcgParams, rng: np.random.Generator) -> OleOutput:
    """Sample the other party's half consistent with ``out_sigma``."""
    g = params.group
    x_other = g.random(rng)
    z_other = mul(out_sigma.x, x_other) - out_sigma.z
    return OleOutput(x=x_other, z=z_other)


# ---------------------------------------------------------------------------
# triples


def ole_to_triples(batch_ab: ScalarOleBatch, batch_ba: ScalarOleBatch) -> tuple[TripleShares, TripleShares]:
    """Two aligned scalar OLE batches -> one batch of 2-party triples.

    Batch 1 multiplies party 0's a-share by party 1's b-share; batch 2 swaps
    the roles.  Each party adds its local diagonal product.
    """
    if len(batch_ab) != len(batch_ba) or batch_ab.q != batch_ba.q:
        raise BatchMismatch("OLE batches are not aligned")
    q = batch_ab.q
    a0, b1 = batch_ab.x0, batch_ab.x1
    b0, a1 = batch_ba.x0, batch_ba.x1
    c0 = (a0 * b0 + batch_ab.z0 + batch_ba.z0) % q
    c1 = (a1 * b1 + batch_ab.z1 + batch_ba.z1) % q
    return TripleShares(q, a0, b0, c0), TripleShares(q, a1, b1, c1)


def nparty_triples(
    params: PcgParams,
    n_parties: int,
    rng: np.random.Generator,
    rhos: list[tuple[ProgramInput, ProgramInput]] | None = None,
) -> list[TripleShares]:
    """N-party triples from programmed pairwise instances.

    Party i reuses one auxiliary input pair (rho_i^x, rho_i^y) across every
    pairwise instance; programmability guarantees its a/b values agree across
    instances (checked, InconsistentProgramming otherwise).
    """
    if n_parties < 2:
        raise ParamError("need at least 2 parties")
    if rhos is None:
        rhos = [(ProgramInput.fresh(rng), ProgramInput.fresh(rng)) for _ in range(n_parties)]
    if len(rhos) != n_parties:
        raise ParamError("need one programmed input pair per party")
    q = params.q
    x_ring = [phi(params, rx) for rx, _ in rhos]
    y_ring = [phi(params, ry) for _, ry in rhos]
    x_hat = [dft_forward(v) for v in x_ring]
    y_hat = [dft_forward(v) for v in y_ring]
    k_shares = [(x_hat[i] * y_hat[i]) % q for i in range(n_parties)]
    for i in range(n_parties):
        for j in range(n_parties):
            if i == j:
                continue
            s0, s1 = pcg_gen(params, rng, rho0=rhos[i][0], rho1=rhos[j][1])
            out_i = pcg_expand(0, s0, params)
            out_j = pcg_expand(1, s1, params)
            if out_i.x != x_ring[i]:
                raise InconsistentProgramming(f"party {i} x-value diverged across instances")
            if out_j.x != y_ring[j]:
                raise InconsistentProgramming(f"party {j} y-value diverged across instances")
            k_shares[i] = (k_shares[i] + dft_forward(out_i.z)) % q
            k_shares[j] = (k_shares[j] + dft_forward(out_j.z)) % q
    return [
        TripleShares(q, x_hat[i], y_hat[i], k_shares[i] % q) for i in range(n_parties)
    ]

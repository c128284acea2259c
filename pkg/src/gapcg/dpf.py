"""GGM-tree distributed point functions and sums of point functions.

A point function takes the value beta at one position alpha of [0, N) and 0
elsewhere.  Two parties hold keys; their evaluations add to the function
value in F_q.  Keys consist of a root seed plus one correction word per tree
level, so they are logarithmic in the domain size.  A sum-of-point-functions
key is simply an ordered list of independent point-function keys over one
domain (collisions add).

Everything is implemented over batches: a batch of keys sharing (party,
domain, q) is a struct of numpy arrays, and tree levels are expanded with
single vectorised PRG passes.  Single-key objects are thin wrappers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import prg
from .errors import IndexOutOfRange, InvalidPoint, LengthMismatch
from .group_algebra import pack_bits_le, unpack_bits_le

DPF_MAGIC = b"DPF1"
SPFSS_MAGIC = b"SPF1"
FORMAT_VERSION = 1


def tree_depth(n_domain: int) -> int:
    if n_domain < 1:
        raise InvalidPoint("domain size must be >= 1")
    return max(int(n_domain - 1).bit_length(), 0)


def key_size_bound_bits(n_domain: int, q: int, lam: int = prg.LAMBDA) -> int:
    """Per-key serialized-size bound: ceil(log2 N)*(lambda+2) + lambda + ceil(log2 q)."""
    return tree_depth(n_domain) * (lam + 2) + lam + (q - 1).bit_length()


@dataclass
class DpfKeyBatch:
    """B keys sharing (party, domain, q); arrays indexed by key first."""

    party: int
    n_domain: int
    q: int
    seeds: np.ndarray  # (B, 16) uint8
    cw_seeds: np.ndarray  # (depth, B, 16) uint8
    cw_tbits: np.ndarray  # (depth, B, 2) uint8
    cw_out: np.ndarray  # (B,) int64

    @property
    def batch_size(self) -> int:
        return self.seeds.shape[0]

    @property
    def depth(self) -> int:
        return self.cw_seeds.shape[0]

    def key(self, i: int) -> "DpfKey":
        return DpfKey(
            party=self.party,
            n_domain=self.n_domain,
            q=self.q,
            root_seed=self.seeds[i].tobytes(),
            cw_seeds=self.cw_seeds[:, i].copy(),
            cw_tbits=self.cw_tbits[:, i].copy(),
            cw_out=int(self.cw_out[i]),
        )


@dataclass(frozen=True)
class DpfKey:
    """One party's key for a single point function over [0, n_domain)."""

    party: int
    n_domain: int
    q: int
    root_seed: bytes
    cw_seeds: np.ndarray  # (depth, 16) uint8
    cw_tbits: np.ndarray  # (depth, 2) uint8
    cw_out: int

    @property
    def depth(self) -> int:
        return self.cw_seeds.shape[0]

    def as_batch(self) -> DpfKeyBatch:
        return DpfKeyBatch(
            party=self.party,
            n_domain=self.n_domain,
            q=self.q,
            seeds=np.frombuffer(self.root_seed, dtype=np.uint8).reshape(1, 16).copy(),
            cw_seeds=self.cw_seeds.reshape(self.depth, 1, 16).copy(),
            cw_tbits=self.cw_tbits.reshape(self.depth, 1, 2).copy(),
            cw_out=np.array([self.cw_out], dtype=np.int64),
        )

    # -- serialization ---------------------------------------------------

    def bit_length(self) -> int:
        """Exact payload size in bits: lambda + depth*(lambda+2) + ceil(log2 q)."""
        return prg.LAMBDA + self.depth * (prg.LAMBDA + 2) + (self.q - 1).bit_length()

    def pack(self) -> bytes:
        """Tight bit-packed payload (context (party, N, q) carried externally)."""
        acc = int.from_bytes(self.root_seed, "little")
        pos = prg.LAMBDA
        for lvl in range(self.depth):
            acc |= int.from_bytes(self.cw_seeds[lvl].tobytes(), "little") << pos
            pos += prg.LAMBDA
            acc |= (int(self.cw_tbits[lvl, 0]) | (int(self.cw_tbits[lvl, 1]) << 1)) << pos
            pos += 2
        acc |= int(self.cw_out) << pos
        pos += (self.q - 1).bit_length()
        return acc.to_bytes((pos + 7) // 8, "little")

    @staticmethod
    def unpack(data: bytes, party: int, n_domain: int, q: int) -> "DpfKey":
        depth = tree_depth(n_domain)
        acc = int.from_bytes(data, "little")
        seed_mask = (1 << prg.LAMBDA) - 1
        root = (acc & seed_mask).to_bytes(16, "little")
        pos = prg.LAMBDA
        cw_seeds = np.empty((depth, 16), dtype=np.uint8)
        cw_tbits = np.empty((depth, 2), dtype=np.uint8)
        for lvl in range(depth):
            cw_seeds[lvl] = np.frombuffer(((acc >> pos) & seed_mask).to_bytes(16, "little"), dtype=np.uint8)
            pos += prg.LAMBDA
            tb = (acc >> pos) & 3
            cw_tbits[lvl, 0] = tb & 1
            cw_tbits[lvl, 1] = (tb >> 1) & 1
            pos += 2
        w = (q - 1).bit_length()
        cw_out = (acc >> pos) & ((1 << w) - 1)
        return DpfKey(party, n_domain, q, root, cw_seeds, cw_tbits, int(cw_out))

    def to_bytes(self) -> bytes:
        """Framed container: magic, version, party, N, q, depth, then the
        byte-aligned levels (16-byte seed word + 1 tag byte per level)."""
        head = DPF_MAGIC + struct.pack("<HBIHB", FORMAT_VERSION, self.party, self.n_domain, self.q, self.depth)
        body = self.root_seed
        for lvl in range(self.depth):
            body += self.cw_seeds[lvl].tobytes()
            body += bytes([int(self.cw_tbits[lvl, 0]) | (int(self.cw_tbits[lvl, 1]) << 1)])
        body += struct.pack("<H", self.cw_out)
        return head + body

    @staticmethod
    def from_bytes(data: bytes) -> "DpfKey":
        if data[:4] != DPF_MAGIC:
            raise ValueError("bad magic")
        ver, party, n_domain, q, depth = struct.unpack("<HBIHB", data[4:14])
        if ver != FORMAT_VERSION:
            raise ValueError("unsupported version")
        off = 14
        root = data[off : off + 16]
        off += 16
        cw_seeds = np.empty((depth, 16), dtype=np.uint8)
        cw_tbits = np.empty((depth, 2), dtype=np.uint8)
        for lvl in range(depth):
            cw_seeds[lvl] = np.frombuffer(data[off : off + 16], dtype=np.uint8)
            tag = data[off + 16]
            cw_tbits[lvl, 0] = tag & 1
            cw_tbits[lvl, 1] = (tag >> 1) & 1
            off += 17
        (cw_out,) = struct.unpack("<H", data[off : off + 2])
        return DpfKey(party, n_domain, q, root, cw_seeds, cw_tbits, cw_out)


def _nodes_at(n_domain: int, depth: int, level: int) -> int:
    """Nodes needed at `level` to cover leaves [0, N): ceil(N / 2^(depth-level))."""
    return -(-n_domain // (1 << (depth - level)))


def batch_gen(
    alphas: np.ndarray,
    betas: np.ndarray,
    n_domain: int,
    q: int,
    rng: np.random.Generator,
) -> tuple[DpfKeyBatch, DpfKeyBatch]:
    """Generate B key pairs at once (shared domain and output field)."""
    alphas = np.asarray(alphas, dtype=np.int64)
    betas = np.asarray(betas, dtype=np.int64) % q
    if alphas.shape != betas.shape or alphas.ndim != 1:
        raise LengthMismatch("alphas/betas must be equal-length vectors")
    if np.any(alphas < 0) or np.any(alphas >= n_domain):
        raise InvalidPoint("alpha out of domain")
    if np.any(betas == 0):
        raise InvalidPoint("beta must be nonzero")
    b = alphas.size
    depth = tree_depth(n_domain)

    s0 = np.frombuffer(rng.bytes(16 * b), dtype=np.uint8).reshape(b, 16).copy()
    s1 = np.frombuffer(rng.bytes(16 * b), dtype=np.uint8).reshape(b, 16).copy()
    roots = (s0.copy(), s1.copy())
    t0 = np.zeros(b, dtype=np.uint8)
    t1 = np.ones(b, dtype=np.uint8)

    cw_seeds = np.empty((depth, b, 16), dtype=np.uint8)
    cw_tbits = np.empty((depth, b, 2), dtype=np.uint8)

    for lvl in range(depth):
        bit = ((alphas >> (depth - 1 - lvl)) & 1).astype(np.uint8)
        l0, r0, tl0, tr0 = prg.expand_batch(s0)
        l1, r1, tl1, tr1 = prg.expand_batch(s1)
        keep_is_right = bit[:, None].astype(bool)
        s_cw = np.where(keep_is_right, l0 ^ l1, r0 ^ r1)
        tcw_l = tl0 ^ tl1 ^ bit ^ 1
        tcw_r = tr0 ^ tr1 ^ bit
        cw_seeds[lvl] = s_cw
        cw_tbits[lvl, :, 0] = tcw_l
        cw_tbits[lvl, :, 1] = tcw_r
        keep_s0 = np.where(keep_is_right, r0, l0)
        keep_s1 = np.where(keep_is_right, r1, l1)
        keep_t0 = np.where(bit == 1, tr0, tl0)
        keep_t1 = np.where(bit == 1, tr1, tl1)
        tcw_keep = np.where(bit == 1, tcw_r, tcw_l)
        s0 = keep_s0 ^ (t0[:, None] * s_cw)
        s1 = keep_s1 ^ (t1[:, None] * s_cw)
        t0 = keep_t0 ^ (t0 & 1) * tcw_keep
        t1 = keep_t1 ^ (t1 & 1) * tcw_keep

    v0 = prg.convert_batch(s0, q)
    v1 = prg.convert_batch(s1, q)
    cw_out = (betas - v0 + v1) % q
    cw_out = np.where(t1 == 1, (-cw_out) % q, cw_out).astype(np.int64)

    def mk(party, root):
        return DpfKeyBatch(
            party=party,
            n_domain=n_domain,
            q=q,
            seeds=root,
            cw_seeds=cw_seeds.copy(),
            cw_tbits=cw_tbits.copy(),
            cw_out=cw_out.copy(),
        )

    return mk(0, roots[0]), mk(1, roots[1])


def dpf_gen(alpha: int, beta: int, n_domain: int, q: int, rng: np.random.Generator) -> tuple[DpfKey, DpfKey]:
    b0, b1 = batch_gen(np.array([alpha]), np.array([beta]), n_domain, q, rng)
    return b0.key(0), b1.key(0)


def batch_full_eval(batch: DpfKeyBatch) -> np.ndarray:
    """Evaluate every key over the whole domain: (B, N) int64 shares.

    Expands the tree level by level, pruning subtrees with no leaf below N,
    so a power-of-two domain costs at most 2N PRG calls per key (N-1 node
    expansions plus N output conversions).
    """
    b = batch.batch_size
    n, depth, q = batch.n_domain, batch.depth, batch.q
    seeds = batch.seeds.reshape(b, 1, 16)
    tbits = np.full((b, 1), batch.party, dtype=np.uint8)
    for lvl in range(depth):
        p = seeds.shape[1]
        need = _nodes_at(n, depth, lvl + 1)
        l, r, tl, tr = prg.expand_batch(seeds.reshape(b * p, 16))
        children = np.empty((b, 2 * p, 16), dtype=np.uint8)
        children[:, 0::2] = l.reshape(b, p, 16)
        children[:, 1::2] = r.reshape(b, p, 16)
        ct = np.empty((b, 2 * p), dtype=np.uint8)
        ct[:, 0::2] = tl.reshape(b, p)
        ct[:, 1::2] = tr.reshape(b, p)
        parent_t = np.repeat(tbits, 2, axis=1)  # (b, 2p)
        sigma = batch.cw_seeds[lvl][:, None, :]  # (b, 1, 16)
        children ^= parent_t[:, :, None] * sigma
        tau = np.empty((b, 2 * p), dtype=np.uint8)
        tau[:, 0::2] = batch.cw_tbits[lvl][:, 0:1]
        tau[:, 1::2] = batch.cw_tbits[lvl][:, 1:2]
        ct ^= parent_t * tau
        seeds = children[:, :need]
        tbits = ct[:, :need]
    vals = prg.convert_batch(seeds.reshape(b * n, 16), q).reshape(b, n)
    out = (vals + tbits.astype(np.int64) * batch.cw_out[:, None]) % q
    if batch.party == 1:
        out = (-out) % q
    return out


def dpf_full_eval(sigma: int, key: DpfKey) -> np.ndarray:
    if sigma != key.party:
        raise ValueError("party index does not match key")
    return batch_full_eval(key.as_batch())[0]


def dpf_eval(sigma: int, key: DpfKey, x: int) -> int:
    """Single-point evaluation along one tree path (depth + 1 PRG calls)."""
    if sigma != key.party:
        raise ValueError("party index does not match key")
    if not (0 <= x < key.n_domain):
        raise IndexOutOfRange(f"x = {x} outside [0, {key.n_domain})")
    s = np.frombuffer(key.root_seed, dtype=np.uint8).reshape(1, 16).copy()
    t = key.party
    for lvl in range(key.depth):
        l, r, tl, tr = prg.expand_batch(s)
        bit = (x >> (key.depth - 1 - lvl)) & 1
        if t:
            l = l ^ key.cw_seeds[lvl]
            r = r ^ key.cw_seeds[lvl]
            tl = tl ^ key.cw_tbits[lvl, 0]
            tr = tr ^ key.cw_tbits[lvl, 1]
        s = r if bit else l
        t = int(tr[0]) if bit else int(tl[0])
    v = int(prg.convert_batch(s, key.q)[0])
    out = (v + t * key.cw_out) % key.q
    return (-out) % key.q if key.party == 1 else out


# ---------------------------------------------------------------------------
# sums of point functions


@dataclass
class SpfssKey:
    """One party's key for a sum of t point functions over one domain."""

    party: int
    n_domain: int
    q: int
    batch: DpfKeyBatch | None  # None encodes t = 0

    @property
    def t_points(self) -> int:
        return 0 if self.batch is None else self.batch.batch_size

    def component(self, i: int) -> DpfKey:
        return self.batch.key(i)

    def bit_length(self) -> int:
        if self.batch is None:
            return 0
        return sum(self.component(i).bit_length() for i in range(self.t_points))

    def to_bytes(self) -> bytes:
        head = SPFSS_MAGIC + struct.pack(
            "<HBIHH", FORMAT_VERSION, self.party, self.n_domain, self.q, self.t_points
        )
        parts = [head]
        for i in range(self.t_points):
            blob = self.component(i).to_bytes()
            parts.append(struct.pack("<I", len(blob)))
            parts.append(blob)
        return b"".join(parts)

    @staticmethod
    def from_bytes(data: bytes) -> "SpfssKey":
        if data[:4] != SPFSS_MAGIC:
            raise ValueError("bad magic")
        ver, party, n_domain, q, t = struct.unpack("<HBIHH", data[4:15])
        if ver != FORMAT_VERSION:
            raise ValueError("unsupported version")
        off = 15
        keys = []
        for _ in range(t):
            (ln,) = struct.unpack("<I", data[off : off + 4])
            off += 4
            keys.append(DpfKey.from_bytes(data[off : off + ln]))
            off += ln
        return SpfssKey(party, n_domain, q, _merge_batch(keys) if keys else None)


def _merge_batch(keys: list[DpfKey]) -> DpfKeyBatch:
    k0 = keys[0]
    return DpfKeyBatch(
        party=k0.party,
        n_domain=k0.n_domain,
        q=k0.q,
        seeds=np.stack([np.frombuffer(k.root_seed, dtype=np.uint8) for k in keys]),
        cw_seeds=np.stack([k.cw_seeds for k in keys], axis=1),
        cw_tbits=np.stack([k.cw_tbits for k in keys], axis=1),
        cw_out=np.array([k.cw_out for k in keys], dtype=np.int64),
    )


def spfss_gen(
    points, values, n_domain: int, q: int, rng: np.random.Generator
) -> tuple[SpfssKey, SpfssKey]:
    """Share sum_i f_{points[i], values[i]}; repeated points are allowed."""
    points = np.asarray(points, dtype=np.int64)
    values = np.asarray(values, dtype=np.int64)
    if points.shape != values.shape:
        raise LengthMismatch("points/values must have equal length")
    if points.size == 0:
        return (SpfssKey(0, n_domain, q, None), SpfssKey(1, n_domain, q, None))
    b0, b1 = batch_gen(points, values, n_domain, q, rng)
    return SpfssKey(0, n_domain, q, b0), SpfssKey(1, n_domain, q, b1)


def spfss_full_eval(sigma: int, key: SpfssKey) -> np.ndarray:
    if sigma != key.party:
        raise ValueError("party index does not match key")
    if key.batch is None:
        return np.zeros(key.n_domain, dtype=np.int64)
    return batch_full_eval(key.batch).sum(axis=0) % key.q

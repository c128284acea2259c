"""Length-doubling PRG G : {0,1}^128 -> {0,1}^258 and helpers built on it.

Concrete instantiation (pinned; test vectors in tests/test_fss.py):
AES-128 with the fixed public key ``PRG_KEY``, used Davies-Meyer style in a
counter-tweaked mode over the seed.  One logical G call produces

    left  = E(s ^ T_L) ^ (s ^ T_L)          (128 bits)
    right = E(s ^ T_R) ^ (s ^ T_R)          (128 bits)
    bits  = E(s ^ T_T) ^ (s ^ T_T)          (t_left = bit 0, t_right = bit 1)

where the tweaks T_* are fixed 16-byte constants.  Conversion of a seed to
one F_q element draws two further blocks (tweaks C0, C1) and rejection-samples
a residue from their bytes, so shares are exactly uniform; the astronomically
unlikely case that every chunk is rejected falls through to fresh blocks.

``CALLS`` counts logical G invocations (tree expansion, output conversion,
and 2-block chunks of stream output each count as one call).  The counter is
a plain module-level tally: instrument single-threaded runs only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

LAMBDA = 128
SEED_BYTES = LAMBDA // 8

PRG_KEY = bytes.fromhex("3c6ef372a54ff53a510e527f9b05688c")

_TWEAK_LEFT = b"L" + bytes(15)
_TWEAK_RIGHT = b"R" + bytes(15)
_TWEAK_TBITS = b"T" + bytes(15)

_encryptor = Cipher(algorithms.AES(PRG_KEY), modes.ECB()).encryptor()


class CallCounter:
    """Tally of logical PRG invocations."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def reset(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        self.count += n


CALLS = CallCounter()


def _aes_blocks(data: np.ndarray) -> np.ndarray:
    """ECB-encrypt a (..., 16) uint8 array of blocks in one shot."""
    flat = np.ascontiguousarray(data, dtype=np.uint8)
    out = _encryptor.update(flat.tobytes())
    return np.frombuffer(out, dtype=np.uint8).reshape(flat.shape)


def _dm(data: np.ndarray) -> np.ndarray:
    """Davies-Meyer: E(x) ^ x, batched."""
    return _aes_blocks(data) ^ data


def _tweak(seeds: np.ndarray, tweak: bytes) -> np.ndarray:
    return seeds ^ np.frombuffer(tweak, dtype=np.uint8)


@dataclass(frozen=True)
class PrgSeed:
    """A 16-byte PRG seed."""

    data: bytes

    def __post_init__(self):
        if len(self.data) != SEED_BYTES:
            raise ValueError(f"seed must be {SEED_BYTES} bytes")


def expand_batch(seeds: np.ndarray, count: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """G on a (B, 16) uint8 array of seeds.

    Returns (left, right, t_left, t_right) with seeds (B, 16) and bits (B,).
    """
    seeds = np.atleast_2d(seeds)
    if count:
        CALLS.add(seeds.shape[0])
    left = _dm(_tweak(seeds, _TWEAK_LEFT))
    right = _dm(_tweak(seeds, _TWEAK_RIGHT))
    tb = _dm(_tweak(seeds, _TWEAK_TBITS))
    return left, right, (tb[:, 0] & 1).astype(np.uint8), ((tb[:, 0] >> 1) & 1).astype(np.uint8)


def prg_expand(seed: PrgSeed) -> tuple[PrgSeed, PrgSeed, int, int]:
    """Single-seed expansion (the 2*lambda+2-bit contract)."""
    arr = np.frombuffer(seed.data, dtype=np.uint8).reshape(1, 16)
    left, right, tl, tr = expand_batch(arr)
    return PrgSeed(left[0].tobytes()), PrgSeed(right[0].tobytes()), int(tl[0]), int(tr[0])


def expand_bits(seed: PrgSeed) -> bytes:
    """The raw 2*lambda+2 = 258 output bits of one G call, packed little-endian."""
    left, right, tl, tr = prg_expand(seed)
    return left.data + right.data + bytes([tl | (tr << 1)])


def convert_batch(seeds: np.ndarray, q: int, count: bool = True) -> np.ndarray:
    """Map each 16-byte seed to one uniform residue mod q by rejection sampling.

    One logical PRG call per seed (two AES blocks); rejected seeds (probability
    <= (q/256)**32 for byte-sized q) continue with further block pairs.
    """
    seeds = np.atleast_2d(seeds)
    nseeds = seeds.shape[0]
    if count:
        CALLS.add(nseeds)
    out = np.full(nseeds, -1, dtype=np.int64)
    pending = np.arange(nseeds)
    round_no = 0
    while pending.size:
        if round_no > 0 and count:
            CALLS.add(pending.size)
        c0 = np.zeros(16, dtype=np.uint8)
        c0[0] = ord("C")
        c0[1] = 2 * round_no
        c1 = c0.copy()
        c1[1] = 2 * round_no + 1
        chunk = np.concatenate(
            [_dm(seeds[pending] ^ c0), _dm(seeds[pending] ^ c1)], axis=1
        )
        if q <= 256:
            cand = chunk.astype(np.uint16)  # (P, 32) byte candidates
            thresh = 256 - (256 % q)
        else:
            cand = chunk.view(np.uint16).astype(np.uint32)  # (P, 16) LE words
            thresh = 65536 - (65536 % q)
        ok = cand < thresh
        has = ok.any(axis=1)
        first = ok.argmax(axis=1)
        vals = cand[np.arange(cand.shape[0]), first] % q
        out[pending[has]] = vals[has]
        pending = pending[~has]
        round_no += 1
    return out


class PrgStream:
    """Deterministic byte/element stream from a 16- or 32-byte seed.

    Used to derive public ring elements from a context seed and to expand
    32-byte programmed inputs into position/value lists.  Counts one PRG
    call per two keystream blocks (= 2*lambda output bits).
    """

    def __init__(self, seed: bytes, count: bool = False):
        if len(seed) == 32:
            lo = np.frombuffer(seed[:16], dtype=np.uint8)
            hi = np.frombuffer(seed[16:], dtype=np.uint8)
            t0 = np.zeros(16, dtype=np.uint8)
            t0[0] = ord("x")
            t1 = t0.copy()
            t1[0] = ord("y")
            mixed = _dm((lo ^ t0).reshape(1, 16))[0] ^ _dm((hi ^ t1).reshape(1, 16))[0]
            self._seed = (mixed ^ lo ^ hi).copy()
        elif len(seed) == 16:
            self._seed = np.frombuffer(seed, dtype=np.uint8).copy()
        else:
            raise ValueError("stream seed must be 16 or 32 bytes")
        self._block = 0
        self._buf = b""
        self._count = count

    def next_bytes(self, n: int) -> bytes:
        while len(self._buf) < n:
            take = max((n - len(self._buf) + 15) // 16, 2)
            ctrs = np.zeros((take, 16), dtype=np.uint8)
            ctrs[:, 0] = ord("S")
            for j in range(take):
                v = self._block + j
                ctrs[j, 1:9] = np.frombuffer(int(v).to_bytes(8, "little"), dtype=np.uint8)
            self._block += take
            if self._count:
                CALLS.add((take + 1) // 2)
            self._buf += _dm(ctrs ^ self._seed).tobytes()
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by 64-bit rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        thresh = (1 << 64) - ((1 << 64) % bound)
        while True:
            v = int.from_bytes(self.next_bytes(8), "little")
            if v < thresh:
                return v % bound

    def field_elements(self, n: int, q: int) -> np.ndarray:
        """n uniform residues mod q, rejection-sampled from the byte stream."""
        out = np.empty(n, dtype=np.int64)
        filled = 0
        if q <= 256:
            width, space = 1, 256
        else:
            width, space = 2, 65536
        thresh = space - (space % q)
        while filled < n:
            need = n - filled
            raw = self.next_bytes(width * (need + 8 + need // 8))
            cand = np.frombuffer(raw, dtype=np.uint8 if width == 1 else np.uint16).astype(np.int64)
            good = cand[cand < thresh] % q
            take = min(good.size, need)
            out[filled : filled + take] = good[:take]
            filled += take
        return out

    def nonzero_field_elements(self, n: int, q: int) -> np.ndarray:
        """n uniform residues in [1, q)."""
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            out[i] = 1 + self.next_below(q - 1)
        return out

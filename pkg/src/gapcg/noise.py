"""Samplers for the sparse noise distributions over F_q[G].

Three flavors, all with values uniform in F_q^*:

* ``regular``  -- one nonzero per contiguous index block (t blocks; block
  sizes differ by at most one when t does not divide |G|);
* ``exact``    -- t distinct uniform positions;
* ``monomial`` -- t independent uniform monomials summed, so collisions can
  merge or cancel and the weight may fall below t.

Sampling is deterministic given the numpy Generator.  An optional
rejection-fold mode resamples until the image under a quotient projection has
at least its expected weight, which removes unusually easy folded instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .group_algebra import GroupSpec, QuotientMap, SparseElement, fold, quotient_map, sparse_from_pairs, sparse_to_dense

FLAVORS = ("regular", "exact", "monomial")


@dataclass(frozen=True)
class NoiseSpec:
    """Weight-t noise of a given flavor over F_q[G]."""

    weight: int
    flavor: str
    group: GroupSpec

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise InvalidSpec(f"flavor must be one of {FLAVORS}")
        if not (0 <= self.weight <= self.group.size):
            raise InvalidSpec("weight must lie in [0, |G|]")

    def block_bounds(self) -> np.ndarray:
        """Regular-flavor block boundaries: t+1 cut points over [0, |G|]."""
        return np.linspace(0, self.group.size, self.weight + 1).astype(np.int64)


def sample_positions(spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Positions only (length t; regular/monomial may repeat across flavors' rules)."""
    t, size = spec.weight, spec.group.size
    if t == 0:
        return np.empty(0, dtype=np.int64)
    if spec.flavor == "regular":
        bounds = spec.block_bounds()
        widths = np.diff(bounds)
        return bounds[:-1] + rng.integers(0, widths, dtype=np.int64)
    if spec.flavor == "exact":
        return np.sort(rng.choice(size, size=t, replace=False)).astype(np.int64)
    return rng.integers(0, size, size=t, dtype=np.int64)


def sample_noise(
    spec: NoiseSpec,
    rng: np.random.Generator,
    reject_fold: QuotientMap | None = None,
    expected_folded_weight: float | None = None,
    max_resample: int = 10_000,
) -> SparseElement:
    """Draw one sparse element.

    With ``reject_fold`` set, resample until the folded image's weight reaches
    ``expected_folded_weight`` (pass the analysis module's closed form; on
    average this costs about two draws).
    """
    if reject_fold is not None and expected_folded_weight is None:
        raise InvalidSpec("rejection mode needs the expected folded weight")
    for _ in range(max_resample):
        pos = sample_positions(spec, rng)
        vals = spec.group.field.random_nonzero_arr(rng, pos.size)
        elem = sparse_from_pairs(spec.group, pos, vals)
        if reject_fold is None:
            return elem
        folded = fold(sparse_to_dense(elem), None, qmap=reject_fold)
        if folded.weight() >= expected_folded_weight:
            return elem
    raise InvalidSpec("rejection sampling failed to hit the weight target")


def sample_noise_dense(spec: NoiseSpec, rng: np.random.Generator):
    return sparse_to_dense(sample_noise(spec, rng))

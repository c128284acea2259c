"""Concrete-security estimator and linear-test bias machinery.

Closed forms implemented here:

* linear-test bias bound exp(-2 t d / n) for weight-d test vectors against
  weight-t noise over length n, plus a Monte-Carlo estimator of the actual
  bias of the compressed-syndrome distribution;
* expected weight of a sum of ell random monomials in m positions (both the
  closed form and the underlying recurrence), which governs how folding a
  noisy instance down to a quotient of size m concentrates the noise;
* per-attack decoding cost formulas (Prange, low-weight parity checks, and a
  grid-searched lower bound across modern information-set decoders), a
  decode-one-out-of-many adjustment of sqrt(|G/H|), and seed-size / PRG-call
  formulas for the correlation generator;
* a folding-aware estimator that minimises attack cost over all quotient
  orders and reports whether the target security level survives.

Cost-formula readings are pinned as follows (regression-locked in tests, not
claimed as attack ground truth): asymptotic constants are 1; the ISD
iteration count is capped below by 1 and above by brute force 2^k; the
per-iteration cost is at least one operation; the low-weight parity-check
cost is read as (k-1)^t * k.  Folding candidates whose expected total folded
weight reaches (1 - DENSE_MARGIN) of the folded dimension are discarded as
carrying no exploitable structure (the folded noise is then statistically
indistinguishable from a dense vector).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import RangeError
from .group_algebra import AlgebraElement, involution_bar, mul
from .noise import NoiseSpec, sample_noise

LOG2E = math.log2(math.e)

DENSE_MARGIN = 0.05
ISD_P2_CAP = 256
ISD_P1_CAP = 512


def log2_binom(n: float, k: float) -> float:
    """log2 of the binomial coefficient via log-gamma; -inf outside the range."""
    if k < 0 or k > n:
        return float("-inf")
    return float((gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) * LOG2E)


# ---------------------------------------------------------------------------
# linear-test bias


def bias_bound(d: float, t: float, n: float) -> float:
    """exp(-2 t d / n): bias bound for weight-d tests against weight-t noise."""
    if not (0 < d <= n):
        raise RangeError("need 0 < d <= n")
    if t < 0:
        raise RangeError("need t >= 0")
    return math.exp(-2.0 * t * d / n)


@dataclass(frozen=True)
class BiasEstimate:
    bias: float
    std_error: float
    zero_fraction: float
    trials: int


def syndrome_test_vector(v: AlgebraElement, a_elements: list[AlgebraElement]) -> tuple[AlgebraElement, ...]:
    """The dual functional on the noise induced by testing v on the syndrome.

    The syndrome is sum_i a_i * e_i, so <v, syndrome> = sum_i <v * bar(a_i), e_i>.
    """
    return tuple(mul(v, involution_bar(a)) for a in a_elements)


def empirical_bias(
    dual: tuple[AlgebraElement, ...] | list[AlgebraElement],
    noise: NoiseSpec,
    trials: int,
    rng: np.random.Generator,
    mode: str = "noise",
) -> BiasEstimate:
    """Monte-Carlo bias of <dual, e> over the noise distribution.

    ``mode`` selects the distribution of e: "noise" draws each block from the
    noise spec, "uniform" draws dense uniform blocks (control: bias must
    vanish), "zero" fixes e = 0 (control: bias must be 1 - 1/q).
    """
    if trials < 1000:
        raise RangeError("use at least 10^3 trials")
    q = noise.group.field.q
    c = len(dual)
    w = np.stack([d.coeffs for d in dual])  # (c, |G|)
    zero_count = 0
    if mode == "zero":
        zero_count = trials
    elif mode == "uniform":
        vals = np.zeros(trials, dtype=np.int64)
        for i in range(c):
            e = rng.integers(0, q, size=(trials, noise.group.size), dtype=np.int64)
            vals = (vals + (e * w[i][None, :]).sum(axis=1)) % q
        zero_count = int((vals == 0).sum())
    else:
        t = noise.weight
        vals = np.zeros(trials, dtype=np.int64)
        for i in range(c):
            if noise.flavor == "exact":
                pos = np.argsort(rng.random((trials, noise.group.size)), axis=1)[:, :t]
            elif noise.flavor == "regular":
                bounds = noise.block_bounds()
                widths = np.diff(bounds)
                pos = bounds[:-1][None, :] + rng.integers(0, widths, size=(trials, t), dtype=np.int64)
            else:
                pos = rng.integers(0, noise.group.size, size=(trials, t), dtype=np.int64)
            val = rng.integers(1, q, size=(trials, t), dtype=np.int64)
            vals = (vals + (w[i][pos] * val).sum(axis=1)) % q
        zero_count = int((vals == 0).sum())
    p0 = zero_count / trials
    se = math.sqrt(max(p0 * (1 - p0), 1.0 / trials) / trials)
    return BiasEstimate(bias=abs(p0 - 1.0 / q), std_error=se, zero_fraction=p0, trials=trials)


# ---------------------------------------------------------------------------
# folded noise weight


def expected_fold_weight(m: int, ell: int, q: int) -> float:
    """Expected nonzero count of a sum of ell uniform monomials in m positions.

    Closed form of the recurrence in :func:`fold_weight_recurrence`:
        (m (q-1) / q) * (1 - (1 - q / (m (q-1)))**ell)
    """
    if m < 1 or ell < 0:
        raise RangeError("need m >= 1 and ell >= 0")
    sat = m * (q - 1) / q
    return sat * (1.0 - (1.0 - q / (m * (q - 1))) ** ell)


def fold_weight_recurrence(m: int, ell: int, q: int) -> float:
    """Iterate E_{l+1} = (1 - E/m)(E + 1) + (E/m)(E - 1/(q-1)) from E_0 = 0."""
    if m < 1 or ell < 0:
        raise RangeError("need m >= 1 and ell >= 0")
    e = 0.0
    for _ in range(ell):
        e = (1.0 - e / m) * (e + 1.0) + (e / m) * (e - 1.0 / (q - 1))
    return e


# ---------------------------------------------------------------------------
# attack cost formulas (log2 operations)


def prange_cost(n: float, k: float, t: float) -> float:
    """k * log2(1/(1 - t/n)) + log2(k^2 log2 k): guess k noise-free positions."""
    if not (0 <= t < n) or k <= 1:
        raise RangeError("need 0 <= t < n and k > 1")
    return k * math.log2(1.0 / (1.0 - t / n)) + math.log2(k * k * math.log2(k))


def stat_decoding_cost(n: float, k: float, t: float) -> float:
    """Low-weight parity-check attack, pinned reading: log2((k-1)^t * k).

    The source expression O(n/(k-1)^t * k) is ambiguous about the placement
    of n; this reading (n cancelling, cost growing with t) is the one frozen
    by the regression fixtures.
    """
    if k < 2:
        raise RangeError("need k >= 2")
    if t < 0 or t > n:
        raise RangeError("need 0 <= t <= n")
    return t * math.log2(k - 1) + math.log2(k)


def isd_lower_bound(n: float, k: float, t: float) -> float:
    cost, _ = isd_lower_bound_argmin(n, k, t)
    return cost


def isd_lower_bound_argmin(n: float, k: float, t: float) -> tuple[float, tuple[int, int]]:
    """Grid-searched lower bound across modern information-set decoders.

    cost(p1, p2) = iters * max(1, (K1 + K2)/C(k+p2, p1) + t (k - p2) / 2^p2)
    with iters = clamp(min(2^k, C(n, t) / C(k-p2, t-p1)), >= 1),
    K1 = (k-p2)^2 log2(k-p2) (structured Gaussian elimination) and
    K2 = C((k+p2)/2, p1/8) (deep-list subalgorithm floor).

    Grid: p2 in [0, min(k/2, 256)], p1 in multiples of 8 up to min(k+p2, 512).
    """
    if t < 0 or t > n or k < 2:
        raise RangeError("need 0 <= t <= n and k >= 2")
    n_i, k_i, t_i = float(n), int(k), float(t)
    lc_nt = log2_binom(n_i, t_i)
    best = math.inf
    arg = (0, 0)
    for p2 in range(0, min(k_i // 2, ISD_P2_CAP) + 1):
        km = k_i - p2
        if km < 1:
            break
        lk1 = math.log2(km * km * max(math.log2(km), 1.0)) if km > 1 else 0.0
        check = math.log2(t_i * km) - p2 if t_i > 0 else float("-inf")
        for p1 in range(0, min(k_i + p2, ISD_P1_CAP) + 1, 8):
            tp = t_i - p1
            if tp < 0:
                break
            ld = log2_binom(km, tp)
            if ld == float("-inf"):
                continue
            liters = min(max(lc_nt - ld, 0.0), float(k_i))
            lk2 = log2_binom((k_i + p2) / 2.0, p1 / 8.0)
            lden = log2_binom(k_i + p2, p1)
            a = lk1 - lden
            b = lk2 - lden
            mx = max(a, b, check)
            lbr = mx + math.log2(
                2.0 ** (a - mx) + 2.0 ** (b - mx) + (2.0 ** (check - mx) if check > -math.inf else 0.0)
            )
            cost = liters + max(lbr, 0.0)
            if cost < best:
                best, arg = cost, (p1, p2)
    return best, arg


def doom_adjust(cost_bits: float, group_order: float) -> float:
    """Decode-one-out-of-many: divide the work factor by sqrt(group order)."""
    if group_order < 1:
        raise RangeError("group order must be >= 1")
    return cost_bits - 0.5 * math.log2(group_order)


# ---------------------------------------------------------------------------
# seed size / PRG count formulas


def seed_size_bits(c: int, t: int, group_order: int, q: int, lam: int = 128) -> float:
    """(ct)^2 ((log|G| - log t + 1)(lam+2) + lam + log q) + ct (log|G| + log q)."""
    if min(c, t, group_order, q, lam) < 1:
        raise RangeError("parameters must be positive")
    lg = math.log2(group_order)
    lq = math.log2(q)
    lt = math.log2(t)
    ct = c * t
    return ct * ct * ((lg - lt + 1.0) * (lam + 2) + lam + lq) + ct * (lg + lq)


def prg_call_count(c: int, t: int, group_order: int, q: int, lam: int = 128) -> int:
    """(2 + floor(log q / lam)) |G| c^2 t: expansion's PRG-call bound."""
    if min(c, t, group_order, q, lam) < 1:
        raise RangeError("parameters must be positive")
    return (2 + int(math.log2(q)) // lam) * group_order * c * c * t


def prg_call_count_table_reading(c: int, t: int, group_order: int) -> int:
    """The alternative published tally 4*T*c*t, reported for comparison only."""
    return 4 * group_order * c * t


# ---------------------------------------------------------------------------
# the folding-aware estimator

ATTACKS = ("prange", "stat_decoding", "isd_lower_bound")


@dataclass(frozen=True)
class FoldingRow:
    quotient_order: int
    folded_dim: int
    folded_len: int
    folded_weight_block: float
    folded_weight_total: float
    admissible: bool
    costs: dict = field(default_factory=dict)  # attack -> DOOM-adjusted log2 cost

    def best(self) -> float:
        return min(self.costs.values()) if self.costs else math.inf


@dataclass(frozen=True)
class AttackCostReport:
    q: int
    n_factors: int
    group_order: int
    c: int
    t: int
    lam: int
    rows: list
    security_bits: float
    best_quotient_order: int
    best_attack: str
    meets_lambda: bool
    seed_bits_formula: float
    prg_calls_formula: int
    prg_calls_table_reading: int

    def to_text(self) -> str:
        lines = [
            "report: attack-cost estimate",
            f"q: {self.q}",
            f"group: (Z/{self.q - 1})^{self.n_factors}",
            f"group_order: {self.group_order}",
            f"c: {self.c}",
            f"t: {self.t}",
            f"lambda: {self.lam}",
            f"seed_bits_formula: {self.seed_bits_formula:.1f}",
            f"prg_calls_formula: {self.prg_calls_formula}",
            f"prg_calls_table_reading: {self.prg_calls_table_reading}",
        ]
        for row in self.rows:
            if row.admissible:
                costs = " ".join(f"{k}={v:.1f}" for k, v in row.costs.items())
                lines.append(
                    f"fold |G/H|={row.quotient_order}: k'={row.folded_dim} n'={row.folded_len} "
                    f"t'_block={row.folded_weight_block:.2f} t'_total={row.folded_weight_total:.2f} {costs}"
                )
            else:
                lines.append(
                    f"fold |G/H|={row.quotient_order}: excluded (dense: t'_total="
                    f"{row.folded_weight_total:.2f} vs k'={row.folded_dim})"
                )
        lines.append(f"best_folding: {self.best_quotient_order}")
        lines.append(f"best_attack: {self.best_attack}")
        lines.append(f"security_bits: {self.security_bits:.2f}")
        lines.append(f"meets_lambda: {'yes' if self.meets_lambda else 'no'}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "q": self.q,
                "n_factors": self.n_factors,
                "group_order": self.group_order,
                "c": self.c,
                "t": self.t,
                "lambda": self.lam,
                "seed_bits_formula": self.seed_bits_formula,
                "prg_calls_formula": self.prg_calls_formula,
                "prg_calls_table_reading": self.prg_calls_table_reading,
                "foldings": [
                    {
                        "quotient_order": r.quotient_order,
                        "folded_dim": r.folded_dim,
                        "folded_len": r.folded_len,
                        "folded_weight_block": r.folded_weight_block,
                        "folded_weight_total": r.folded_weight_total,
                        "admissible": r.admissible,
                        "costs": r.costs,
                    }
                    for r in self.rows
                ],
                "best_folding": self.best_quotient_order,
                "best_attack": self.best_attack,
                "security_bits": self.security_bits,
                "meets_lambda": self.meets_lambda,
            },
            indent=2,
        )


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def security_estimate(
    q,
    n_factors: int | None = None,
    c: int | None = None,
    t: int | None = None,
    lam: int = 128,
    cost_offset: float = 0.0,
) -> AttackCostReport:
    """Minimum attack cost over all quotient foldings and implemented attacks.

    The first argument may be a correlation-generator parameter object (with
    ``group``, ``c``, ``t``, ``lam`` attributes) or the raw prime q together
    with n_factors, c, t.  Every quotient order m dividing |G| = (q-1)^n is a
    candidate (the folded parameters depend only on the order).  The folded
    instance has dimension c*m, length (c+1)*m, and c+1 noise blocks of
    expected weight expected_fold_weight(m, t, q) each.  Candidates whose
    total folded weight reaches (1 - DENSE_MARGIN) of the folded dimension
    are excluded as dense.  ``cost_offset`` shifts every cost uniformly
    (argmin-stability testing).
    """
    if hasattr(q, "group"):
        params = q
        q = params.q
        n_factors = params.group.n_factors
        c = params.c
        t = params.t
        lam = params.lam
    group_order = (q - 1) ** n_factors
    rows = []
    best_bits = math.inf
    best_m = 0
    best_attack = ""
    for m in divisors(group_order):
        tb = expected_fold_weight(m, t, q)
        ttot = (c + 1) * tb
        kp = c * m
        np_len = (c + 1) * m
        admissible = ttot < (1.0 - DENSE_MARGIN) * kp and ttot < np_len
        costs = {}
        if admissible:
            costs["prange"] = doom_adjust(prange_cost(np_len, kp, ttot), m) + cost_offset
            costs["stat_decoding"] = doom_adjust(stat_decoding_cost(np_len, kp, ttot), m) + cost_offset
            costs["isd_lower_bound"] = doom_adjust(isd_lower_bound(np_len, kp, ttot), m) + cost_offset
            row_best = min(costs.values())
            # ties break toward the smallest quotient
            if row_best < best_bits or (row_best == best_bits and m < best_m):
                best_bits = row_best
                best_m = m
                best_attack = min(costs, key=lambda a: (costs[a], a))
        rows.append(
            FoldingRow(
                quotient_order=m,
                folded_dim=kp,
                folded_len=np_len,
                folded_weight_block=tb,
                folded_weight_total=ttot,
                admissible=admissible,
                costs=costs,
            )
        )
    return AttackCostReport(
        q=q,
        n_factors=n_factors,
        group_order=group_order,
        c=c,
        t=t,
        lam=lam,
        rows=rows,
        security_bits=best_bits,
        best_quotient_order=best_m,
        best_attack=best_attack,
        meets_lambda=best_bits >= lam,
        seed_bits_formula=seed_size_bits(c, t, group_order, q, lam),
        prg_calls_formula=prg_call_count(c, t, group_order, q, lam),
        prg_calls_table_reading=prg_call_count_table_reading(c, t, group_order),
    )

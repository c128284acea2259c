import math

import numpy as np
import pytest

from gapcg import analysis as A
from gapcg.errors import RangeError
from gapcg.field import FieldSpec
from gapcg.group_algebra import GroupSpec
from gapcg.noise import NoiseSpec

# Frozen regression fixtures for the pinned cost readings (these lock the
# interpretation, they are not claims about real attack costs).
FIX_PRANGE_512_256_121 = 118.57765188931785
FIX_STATDEC_512_256_121 = 975.3167658599218
FIX_ISD_512_256_121 = 163.19997462511705
FIX_ESTIMATE_Q3_N25 = 136.4750402925022


def G(orders, q):
    return GroupSpec(orders, FieldSpec(q))


# ---------------------------------------------------------------------------
# bias bound and empirical bias


def test_bias_bound_examples():
    assert A.bias_bound(5, 0, 10) == 1.0
    n = 64
    assert A.bias_bound(n, n / 2, n) == pytest.approx(math.exp(-n), rel=1e-12)
    v = A.bias_bound(64, 152, 256)  # d = n/4, t = 152
    assert v == pytest.approx(math.exp(-76), rel=1e-12)
    assert math.log2(v) == pytest.approx(-109.65, abs=0.01)


def test_bias_bound_range_errors():
    with pytest.raises(RangeError):
        A.bias_bound(0, 1, 10)
    with pytest.raises(RangeError):
        A.bias_bound(11, 1, 10)
    with pytest.raises(RangeError):
        A.bias_bound(5, -1, 10)


def _dual_of_weight(g, d, rng):
    """A c=2 tuple of elements with total weight exactly d."""
    q = g.field.q
    total = 2 * g.size
    pos = rng.choice(total, size=d, replace=False)
    blocks = [np.zeros(g.size, dtype=np.int64), np.zeros(g.size, dtype=np.int64)]
    for p in pos:
        blocks[p // g.size][p % g.size] = rng.integers(1, q)
    from gapcg.group_algebra import AlgebraElement

    return tuple(AlgebraElement(g, b) for b in blocks)


def test_empirical_bias_uniform_control():
    g = G((2,) * 4, 3)
    rng = np.random.default_rng(0)
    dual = _dual_of_weight(g, 6, rng)
    est = A.empirical_bias(dual, NoiseSpec(4, "exact", g), 20_000, rng, mode="uniform")
    assert est.bias <= 3 * est.std_error


def test_empirical_bias_zero_noise():
    g = G((2,) * 4, 3)
    rng = np.random.default_rng(1)
    dual = _dual_of_weight(g, 5, rng)
    est = A.empirical_bias(dual, NoiseSpec(4, "exact", g), 2_000, rng, mode="zero")
    assert est.bias == pytest.approx(1 - 1 / 3)


def test_empirical_bias_below_bound():
    g = G((2,) * 5, 3)
    rng = np.random.default_rng(2)
    t = 4
    n = 2 * g.size
    for d in (2, 8, 16):
        dual = _dual_of_weight(g, d, rng)
        est = A.empirical_bias(dual, NoiseSpec(t, "exact", g), 20_000, rng)
        assert est.bias <= A.bias_bound(d, t, n) + 3 * est.std_error


def test_empirical_bias_ordering_in_weight():
    g = G((2,) * 5, 3)
    rng = np.random.default_rng(3)
    spec = NoiseSpec(4, "exact", g)
    d1, d2 = 4, 24
    e1 = A.empirical_bias(_dual_of_weight(g, d1, rng), spec, 40_000, rng)
    e2 = A.empirical_bias(_dual_of_weight(g, d2, rng), spec, 40_000, rng)
    assert e1.bias >= e2.bias - 3 * (e1.std_error + e2.std_error)


def test_empirical_bias_requires_trials():
    g = G((2, 2), 3)
    rng = np.random.default_rng(4)
    with pytest.raises(RangeError):
        A.empirical_bias(_dual_of_weight(g, 2, rng), NoiseSpec(1, "exact", g), 10, rng)


def test_syndrome_test_vector_weight():
    # <v, sum a_i e_i> = sum <v bar(a_i), e_i>: check the reduction numerically
    from gapcg.group_algebra import inner_product, mul_naive

    g = G((2,) * 3, 5)
    rng = np.random.default_rng(5)
    a = [g.one(), g.random(rng)]
    v = g.random(rng)
    dual = A.syndrome_test_vector(v, a)
    for _ in range(20):
        e = [g.random(rng), g.random(rng)]
        syndrome = mul_naive(a[0], e[0]) + mul_naive(a[1], e[1])
        direct = inner_product(v, syndrome)
        via_dual = sum(inner_product(dual[i], e[i]) for i in range(2)) % 5
        assert direct == via_dual


# ---------------------------------------------------------------------------
# folded weight


def test_fold_weight_small_cases():
    assert A.expected_fold_weight(256, 1, 3) == pytest.approx(1.0, abs=1e-12)
    assert A.expected_fold_weight(256, 0, 3) == 0.0
    assert A.fold_weight_recurrence(7, 1, 5) == pytest.approx(1.0)


def test_fold_weight_closed_form_equals_recurrence():
    for m, q in [(16, 3), (256, 3), (100, 5), (37, 7)]:
        for ell in (1, 2, 10, 100, 1000):
            closed = A.expected_fold_weight(m, ell, q)
            iterated = A.fold_weight_recurrence(m, ell, q)
            assert abs(closed - iterated) <= 1e-9 * max(closed, 1.0)


def test_fold_weight_range_errors():
    with pytest.raises(RangeError):
        A.expected_fold_weight(0, 1, 3)
    with pytest.raises(RangeError):
        A.fold_weight_recurrence(5, -1, 3)


# ---------------------------------------------------------------------------
# attack cost formulas


def test_prange_examples():
    k = 256
    assert A.prange_cost(512, k, 0) == pytest.approx(math.log2(k * k * math.log2(k)))
    v = A.prange_cost(512, 256, 121)
    manual = 256 * math.log2(512 / 391) + math.log2(256**2 * 8)
    assert v == pytest.approx(manual, rel=1e-12)
    assert v == pytest.approx(118.6, abs=0.05)
    assert v == pytest.approx(FIX_PRANGE_512_256_121, rel=1e-12)
    costs = [A.prange_cost(512, 256, t) for t in (0, 20, 60, 121, 200)]
    assert costs == sorted(costs)


def test_stat_decoding_examples():
    # pinned reading (k-1)^t * k; at t = 0 only the log2 k term survives
    assert A.stat_decoding_cost(512, 256, 0) == pytest.approx(math.log2(256))
    assert A.stat_decoding_cost(512, 256, 121) == pytest.approx(FIX_STATDEC_512_256_121, rel=1e-12)
    costs = [A.stat_decoding_cost(512, 256, t) for t in (0, 5, 50, 121)]
    assert costs == sorted(costs)
    with pytest.raises(RangeError):
        A.stat_decoding_cost(512, 1, 3)


def test_isd_lower_bound_t0_collapses_to_gaussian_elimination():
    v, (p1, p2) = A.isd_lower_bound_argmin(512, 256, 0)
    assert p1 == 0
    km = 256 - p2
    assert v == pytest.approx(math.log2(km * km * math.log2(km) + 2), abs=0.01)


def test_isd_lower_bound_regression():
    assert A.isd_lower_bound(512, 256, 121) == pytest.approx(FIX_ISD_512_256_121, rel=1e-9)


def test_isd_lower_bound_monotone_in_t():
    costs = [A.isd_lower_bound(512, 256, t) for t in (10, 20, 40, 80)]
    assert costs == sorted(costs)


def test_doom_examples():
    assert A.doom_adjust(100.0, 1) == 100.0
    assert A.doom_adjust(100.0, 2**20) == 90.0
    with pytest.raises(RangeError):
        A.doom_adjust(10.0, 0)


# ---------------------------------------------------------------------------
# seed size / PRG formulas


def test_seed_size_hand_check():
    # c=1, t=1, |G|=2, q=3: 1 * ((1 - 0 + 1)*130 + 128 + log2 3) + (1 + log2 3)
    expected = (2 * 130 + 128 + math.log2(3)) + (1 + math.log2(3))
    assert A.seed_size_bits(1, 1, 2, 3, 128) == pytest.approx(expected, rel=1e-12)


def test_seed_size_large_point():
    v = A.seed_size_bits(2, 152, 2**25, 3, 128)
    assert v == pytest.approx(2.37e8, rel=0.005)


def test_seed_size_stretch_crossover():
    # the formula value dips below the 2 T log2 q output size from T = 2^27 on
    # (at T = 2^25 and 2^26 it is still above)
    out_bits = lambda T: 2 * T * math.log2(3)
    assert A.seed_size_bits(2, 152, 2**25, 3, 128) > out_bits(2**25)
    assert A.seed_size_bits(2, 152, 2**26, 3, 128) > out_bits(2**26)
    assert A.seed_size_bits(2, 152, 2**27, 3, 128) < out_bits(2**27)
    assert A.seed_size_bits(2, 152, 2**30, 3, 128) < out_bits(2**30)


def test_prg_call_count():
    assert A.prg_call_count(2, 32, 65536, 3, 128) == 2 * 65536 * 4 * 32
    assert A.prg_call_count_table_reading(2, 32, 65536) == 4 * 65536 * 2 * 32
    # the floor term kicks in only for absurdly large q relative to lambda
    assert A.prg_call_count(2, 2, 8, 3, 1) == (2 + 1) * 8 * 4 * 2


# ---------------------------------------------------------------------------
# the estimator


def test_estimator_regression_point():
    rep = A.security_estimate(3, 25, 2, 152, 128)
    assert rep.security_bits == pytest.approx(FIX_ESTIMATE_Q3_N25, rel=1e-9)
    assert rep.best_quotient_order == 128
    assert rep.best_attack == "isd_lower_bound"
    assert rep.meets_lambda


def test_estimator_minimum_le_every_candidate():
    rep = A.security_estimate(3, 12, 2, 16, 128)
    for row in rep.rows:
        if row.admissible:
            assert rep.security_bits <= min(row.costs.values()) + 1e-9


def test_estimator_excludes_trivial_folding():
    rep = A.security_estimate(3, 25, 2, 152, 128)
    row1 = next(r for r in rep.rows if r.quotient_order == 1)
    assert not row1.admissible
    assert row1.folded_weight_total >= (1 - A.DENSE_MARGIN) * row1.folded_dim


def test_estimator_argmin_stable_under_cost_scaling():
    base = A.security_estimate(3, 25, 2, 152, 128)
    shifted = A.security_estimate(3, 25, 2, 152, 128, cost_offset=17.5)
    assert shifted.best_quotient_order == base.best_quotient_order
    assert shifted.best_attack == base.best_attack
    assert shifted.security_bits == pytest.approx(base.security_bits + 17.5, rel=1e-9)


def test_estimator_report_formats():
    import json

    rep = A.security_estimate(3, 8, 2, 8, 128)
    text = rep.to_text()
    assert "security_bits:" in text and "best_folding:" in text
    data = json.loads(rep.to_json())
    assert data["q"] == 3 and "foldings" in data


def test_divisor_enumeration_nonpower_group():
    rep = A.security_estimate(7, 3, 2, 6, 16)
    orders = [r.quotient_order for r in rep.rows]
    assert orders == A.divisors(6**3)
    assert all(216 % m == 0 for m in orders)

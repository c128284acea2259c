"""Acceptance suite: one test per top-level criterion, pinned tolerances.

Each test prints a single [PASS]/[FAIL] line (run pytest -s to see them
live; they also appear in captured output).  The seed-size stretch claim at
the 2^25 parameter point is implemented exactly as stated and fails: the
formula evaluates to ~2.37e8 bits, which is above the 2*T*log2(q) ~ 1.06e8
bits it is required to undercut (the crossover sits at T = 2^27).  See the
repository README for the arithmetic.
"""

import math
import time

import numpy as np
import pytest

from gapcg import analysis as A
from gapcg import dpf as D
from gapcg import mpc, prg
from gapcg import pcg as P
from gapcg.field import FieldSpec
from gapcg.group_algebra import (
    FIELD_OPS,
    GroupSpec,
    dft_forward,
    dft_inverse,
    mul_fft,
    mul_naive,
)
from gapcg.noise import NoiseSpec


def G(orders, q):
    return GroupSpec(orders, FieldSpec(q))


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))


# ---------------------------------------------------------------------------
# 1. OLE correctness at desk scale


def test_ole_correctness_desk_scale():
    q, n, c, t = 3, 8, 2, 8
    group = G((2,) * n, q)
    params_by_mode = {
        "regular": P.PcgParams(group, c=c, t=t, noise="regular"),
        "monomial": P.PcgParams(group, c=c, t=t, noise="monomial"),
    }
    for p in params_by_mode.values():
        _ = p.a_tensor  # public input derivation excluded from the timed runs
    start = time.perf_counter()
    for run in range(50):
        rng = np.random.default_rng(20_000 + run)
        params = params_by_mode["regular" if run % 2 == 0 else "monomial"]
        s0, s1 = P.pcg_gen(params, rng)
        out0 = P.pcg_expand(0, s0, params)
        out1 = P.pcg_expand(1, s1, params)
        assert P.verify_ole(out0, out1, params)
        batch = P.crt_split(out0, out1, params)
        assert len(batch) == 256
        assert np.array_equal((batch.z0 + batch.z1) % q, batch.x0 * batch.x1 % q)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"50 runs took {elapsed:.2f}s"
    _report("ole-correctness-desk-scale", True, f"50 runs, T=256, {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# 2. scale run with instrumented budgets


def test_scale_run_budgets():
    q, n, c, t = 3, 16, 2, 32
    group = G((2,) * n, q)
    params = P.PcgParams(group, c=c, t=t, noise="regular")
    _ = params.a_tensor
    rng = np.random.default_rng(31_337)
    s0, s1 = P.pcg_gen(params, rng)
    out0, st0 = P.pcg_expand_with_stats(0, s0, params)
    out1, st1 = P.pcg_expand_with_stats(1, s1, params)
    budget = 2 * group.size * c * c * t
    assert st0.prg_calls <= budget and st1.prg_calls <= budget
    assert st0.ring_mults == c * c + c and st1.ring_mults == c * c + c
    assert P.verify_ole(out0, out1, params)
    _report(
        "scale-run-budgets",
        True,
        f"T=65536: prg {st0.prg_calls} <= {budget}, ring mults {st0.ring_mults} == {c * c + c}",
    )


# ---------------------------------------------------------------------------
# 3. transform/oracle equivalence


def _size_plan():
    plan = []
    # q = 3: elementary 2-groups up to 4096
    for n in range(1, 9):
        plan += [((2,) * n, 3)] * 23
    plan += [((2,) * 10, 3)] * 6 + [((2,) * 12, 3)] * 4
    # q = 5: factor orders in {2, 4}
    for orders in [(4,), (2, 4), (4, 4), (2, 2, 4), (4, 4, 4), (2, 4, 4)]:
        plan += [(orders, 5)] * 25
    plan += [((4,) * 5, 5)] * 6 + [((4,) * 6, 5)] * 3
    # q = 7: factor orders in {2, 3, 6}
    for orders in [(6,), (2, 3), (6, 6), (3, 6), (2, 6, 6), (6, 6, 6)]:
        plan += [(orders, 7)] * 25
    plan += [((6, 6, 6, 2), 7)] * 3
    return plan


def test_fft_oracle_equivalence():
    plan = _size_plan()
    assert len(plan) >= 500
    plan = plan[:500]
    rng = np.random.default_rng(55)
    checked = 0
    for orders, q in plan:
        g = G(orders, q)
        a, b = g.random(rng), g.random(rng)
        assert mul_fft(a, b) == mul_naive(a, b)
        assert dft_inverse(dft_forward(a), g) == a
        checked += 1
    _report("fft-oracle-equivalence", True, f"{checked} random pairs, q in {{3,5,7}}, |G| <= 4096")


# ---------------------------------------------------------------------------
# 4. transform complexity


def test_fft_complexity_counter():
    rng = np.random.default_rng(4)
    fitted = {}
    FIELD_OPS.enabled = True
    try:
        for n in range(8, 17):
            g = G((2,) * n, 3)
            a = g.random(rng)
            FIELD_OPS.reset()
            dft_forward(a)
            fitted[n] = FIELD_OPS.count / (2**n * n)
    finally:
        FIELD_OPS.enabled = False
    values = list(fitted.values())
    assert max(values) / min(values) <= 1.2, fitted
    assert all(v <= 2.4 for v in values)
    for n in range(8, 16):
        ratio = (fitted[n + 1] * 2 ** (n + 1) * (n + 1)) / (fitted[n] * 2**n * n)
        ideal = 2 * (n + 1) / n
        assert abs(ratio - ideal) / ideal <= 0.2
    _report("fft-complexity", True, f"fitted c in [{min(values):.3f}, {max(values):.3f}] over n=8..16")


# ---------------------------------------------------------------------------
# 5. point-function sharing correctness and key size


def test_dpf_spfss_correctness_and_key_size():
    rng = np.random.default_rng(5)
    domains = [2, 3, 7, 16, 37, 64, 100, 256, 511, 1000, 2048, 4096]
    per = 84
    total = 0
    for n_domain in domains:
        for q in (3, 5):
            count = per // 2
            alphas = rng.integers(0, n_domain, size=count)
            betas = rng.integers(1, q, size=count)
            b0, b1 = D.batch_gen(alphas, betas, n_domain, q, rng)
            v0 = D.batch_full_eval(b0)
            v1 = D.batch_full_eval(b1)
            total_eval = (v0 + v1) % q
            expected = np.zeros((count, n_domain), dtype=np.int64)
            expected[np.arange(count), alphas] = betas
            assert np.array_equal(total_eval, expected)
            bound = D.key_size_bound_bits(n_domain, q)
            for i in range(count):
                assert b0.key(i).bit_length() <= bound
            total += count
    assert total >= 1000
    for exp in range(1, 17):  # key-size bound across N = 2..2^16
        n_domain = 1 << exp
        k0, _ = D.dpf_gen(n_domain - 1, 1, n_domain, 3, rng)
        assert k0.bit_length() <= D.key_size_bound_bits(n_domain, 3)
    _report("dpf-spfss-correctness", True, f"{total} random point functions, N <= 4096")


# ---------------------------------------------------------------------------
# 6. seed-size theorem


SEED_GRID = [
    (3, 4, 2, 2), (3, 4, 2, 4), (3, 5, 2, 2), (3, 5, 2, 8), (3, 6, 2, 4),
    (3, 6, 2, 16), (3, 6, 3, 4), (3, 7, 2, 8), (3, 8, 2, 8), (3, 8, 3, 8),
    (3, 8, 2, 16), (3, 9, 2, 8), (5, 2, 2, 4), (5, 3, 2, 4), (5, 3, 3, 4),
    (5, 3, 2, 16), (5, 4, 2, 16), (7, 2, 2, 6), (7, 2, 3, 6), (7, 3, 2, 36),
]


def test_seed_size_formula_on_grid():
    rng = np.random.default_rng(6)
    assert len(SEED_GRID) == 20
    for q, n, c, t in SEED_GRID:
        group = G((q - 1,) * n, q)
        params = P.PcgParams(group, c=c, t=t, noise="regular")
        s0, s1 = P.pcg_gen(params, rng)
        bound = A.seed_size_bits(c, t, group.size, q, 128)
        for s in (s0, s1):
            measured = len(s.pack(params)) * 8
            assert measured <= bound, (q, n, c, t, measured, bound)
    _report("seed-size-grid", True, "measured packed seeds under the formula at 20 points")


def test_seed_size_stretch_at_pinned_point():
    # Criterion as stated: at (c=2, t=152, |G|=2^25, q=3) the seed-size formula
    # must fall below the 2*T*log2(q) output size.  It does not: the formula
    # gives ~2.372e8 bits vs ~1.064e8; the crossover is at T = 2^27.  The
    # assertion is kept faithful to the criterion and fails.
    start = time.perf_counter()
    formula = A.seed_size_bits(2, 152, 2**25, 3, 128)
    output_bits = 2 * 2**25 * math.log2(3)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    ok = formula < output_bits
    _report(
        "seed-size-stretch-2^25",
        ok,
        f"formula {formula:.3e} vs 2T*log2(q) {output_bits:.3e} "
        f"(crossover at T=2^27; see README)",
    )
    assert formula < output_bits, (
        f"seed formula {formula:.4e} bits is not below 2*T*log2(q) = {output_bits:.4e} bits "
        f"at T = 2^25; the claim first holds at T = 2^27"
    )


# ---------------------------------------------------------------------------
# 7. programmability


def test_programmability_100_regens():
    group = G((2,) * 6, 3)
    params = P.PcgParams(group, c=2, t=4, noise="regular")
    rng = np.random.default_rng(7)
    rho0 = P.ProgramInput.fresh(rng)
    rho1 = P.ProgramInput.fresh(rng)
    x_ref = P.phi(params, rho0)
    y_ref = P.phi(params, rho1)
    first_lists = None
    for _ in range(100):
        s0, s1 = P.pcg_gen(params, rng, rho0=rho0, rho1=rho1)
        if first_lists is None:
            first_lists = (s0.positions.copy(), s0.values.copy())
        assert np.array_equal(s0.positions, first_lists[0])
        assert np.array_equal(s0.values, first_lists[1])
        assert P.pcg_expand(0, s0, params).x == x_ref
        assert P.pcg_expand(1, s1, params).x == y_ref
    _report("programmability", True, "100 re-generations, x == phi(rho) exactly")


# ---------------------------------------------------------------------------
# 8. folded-weight formula


def test_fold_weight_formula():
    assert A.expected_fold_weight(256, 1, 3) == pytest.approx(1.0, abs=1e-15)
    for m, q in [(256, 3), (64, 5), (1000, 7)]:
        for ell in (1, 10, 100, 1000, 10_000):
            closed = A.expected_fold_weight(m, ell, q)
            iterated = A.fold_weight_recurrence(m, ell, q)
            assert abs(closed - iterated) <= 1e-9 * max(closed, 1.0), (m, q, ell)
    # Monte-Carlo oracle: 10^5 draws of 152 monomials into 256 slots over F_3
    rng = np.random.default_rng(8)
    trials, m, ell, q = 100_000, 256, 152, 3
    pos = rng.integers(0, m, size=(trials, ell))
    val = rng.integers(1, q, size=(trials, ell))
    flat = np.zeros(trials * m, dtype=np.int64)
    np.add.at(flat, pos + m * np.arange(trials)[:, None], val)
    weights = (flat.reshape(trials, m) % q != 0).sum(axis=1)
    mc = weights.mean()
    closed = A.expected_fold_weight(m, ell, q)
    rel = abs(mc - closed) / closed
    assert rel < 0.02, (mc, closed)
    _report("fold-weight-formula", True, f"closed={closed:.3f} MC={mc:.3f} rel={rel:.4f}")


# ---------------------------------------------------------------------------
# 9. estimator regression


def test_estimator_regression():
    start = time.perf_counter()
    rep = A.security_estimate(3, 25, 2, 152, 128)
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    assert rep.security_bits >= 128.0
    assert 100 <= rep.best_quotient_order < 1000  # "low hundreds"
    assert rep.meets_lambda
    # frozen fixture under the pinned readings
    assert rep.security_bits == pytest.approx(136.4750402925022, rel=1e-9)
    assert rep.best_quotient_order == 128
    _report(
        "estimator-regression",
        True,
        f"{rep.security_bits:.2f} bits at |G/H|={rep.best_quotient_order} in {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 10. linear-test bound ordering


def test_linear_test_bound_ordering():
    g = G((2,) * 6, 3)  # |G| = 64
    rng = np.random.default_rng(10)
    t = 8
    c = 2
    n = c * g.size
    spec = NoiseSpec(t, "exact", g)
    from gapcg.group_algebra import AlgebraElement

    for d in (2, 4, 8, 16, 32, 64, 128):
        pos = rng.choice(n, size=d, replace=False)
        blocks = [np.zeros(g.size, dtype=np.int64) for _ in range(c)]
        for p_ in pos:
            blocks[p_ // g.size][p_ % g.size] = rng.integers(1, 3)
        dual = tuple(AlgebraElement(g, b) for b in blocks)
        est = A.empirical_bias(dual, spec, 100_000, rng)
        bound = A.bias_bound(d, t, n)
        assert est.bias <= bound + 3 * est.std_error, (d, est.bias, bound, est.std_error)
    _report("linear-test-bound", True, "weights d in {2..128}, 10^5 trials, q=3, |G|=64")


# ---------------------------------------------------------------------------
# 11. MPC end to end


def test_mpc_end_to_end_three_parties():
    q, n, c, t = 3, 8, 2, 8
    group = G((2,) * n, q)
    params = P.PcgParams(group, c=c, t=t, noise="regular")
    rng = np.random.default_rng(11)
    n_parties = 3
    shares = P.nparty_triples(params, n_parties, rng)
    a = sum(s.a for s in shares) % q
    b = sum(s.b for s in shares) % q
    cc = sum(s.c for s in shares) % q
    assert a.size == 256
    assert np.array_equal(cc, a * b % q)  # all 256 triples valid

    n_mul = 32
    circ = mpc.random_circuit(q, 6, n_mul, n_parties, rng)
    assert circ.n_mul == n_mul
    inputs = {g_.wire: int(rng.integers(0, q)) for g_ in circ.input_gates}
    expected = mpc.plaintext_eval(circ, inputs)

    res = mpc.gmw_eval_triples(circ, inputs, shares, n_parties, rng)
    assert res.outputs == expected
    assert res.online_elements == 2 * n_parties * n_mul

    masks = mpc.deal_circuit_masks(circ, n_parties, shares, rng)
    res2 = mpc.gmw_eval_circuitdep(circ, inputs, masks, n_parties, check_invariant=True)
    assert res2.outputs == expected
    assert res2.openings == n_parties * n_mul
    _report(
        "mpc-end-to-end",
        True,
        f"N=3, 256 triples, 32-mul circuit: {res.online_elements} triple-mode elements, "
        f"{res2.openings} circuit-dep openings",
    )

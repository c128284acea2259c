"""Command-line surface: gen, expand, verify, triples, gmw, estimate, bench.

Every randomized command accepts --rng-seed <hex> for deterministic replay.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from .analysis import security_estimate
from .field import FieldSpec
from .group_algebra import GroupSpec, dft_forward, mul_fft, mul_naive
from .mpc import (
    Tape,
    dealer_setup,
    deal_triples,
    gmw_eval_circuitdep,
    gmw_eval_triples,
    parse_circuit,
    plaintext_eval,
)
from .pcg import (
    OleOutput,
    PcgParams,
    PcgSeed,
    ProgramInput,
    crt_split,
    pcg_expand_with_stats,
    pcg_gen,
    verify_ole,
)


def _rng(args) -> np.random.Generator:
    if args.rng_seed is not None:
        return np.random.default_rng(int(args.rng_seed, 16))
    return np.random.default_rng()


def _params(args) -> PcgParams:
    group = GroupSpec((args.q - 1,) * args.n, FieldSpec(args.q))
    context = bytes.fromhex(args.context) if args.context else bytes(32)
    return PcgParams(group, c=args.c, t=args.t, context=context, noise=args.noise)


def _add_param_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=int, default=3, help="prime field size")
    p.add_argument("--n", type=int, default=8, help="number of cyclic factors (|G| = (q-1)^n)")
    p.add_argument("--c", type=int, default=2, help="compression factor")
    p.add_argument("--t", type=int, default=8, help="noise weight per block")
    p.add_argument("--noise", choices=("regular", "exact", "monomial"), default="regular")
    p.add_argument("--context", type=str, default=None, help="32-byte public context seed (hex)")


def cmd_gen(args) -> int:
    params = _params(args)
    rng = _rng(args)
    rho0 = ProgramInput(seed=bytes.fromhex(args.rho0)) if args.rho0 else None
    rho1 = ProgramInput(seed=bytes.fromhex(args.rho1)) if args.rho1 else None
    reject = [int(x) for x in args.reject_fold.split(",")] if args.reject_fold else None
    s0, s1 = pcg_gen(params, rng, rho0=rho0, rho1=rho1, reject_subgroup=reject)
    with open(args.out0, "wb") as f:
        f.write(s0.to_bytes(params))
    with open(args.out1, "wb") as f:
        f.write(s1.to_bytes(params))
    print(f"wrote party-0 seed to {args.out0} and party-1 seed to {args.out1}")
    print(f"seed payload: {s0.bit_length(params)} bits each (packed)")
    return 0


def cmd_expand(args) -> int:
    with open(args.seed, "rb") as f:
        seed, params = PcgSeed.from_bytes(f.read())
    t0 = time.perf_counter()
    out, stats = pcg_expand_with_stats(seed.party, seed, params)
    dt = time.perf_counter() - t0
    with open(args.out, "wb") as f:
        f.write(out.to_bytes(params, seed.party))
    print(f"expanded party-{seed.party} seed in {dt:.3f}s")
    print(f"prg_calls: {stats.prg_calls}")
    print(f"ring_mults: {stats.ring_mults}")
    if args.dump:
        print("x:", out.x.to_bytes().hex())
        print("z:", out.z.to_bytes().hex())
    return 0


def cmd_verify(args) -> int:
    with open(args.in0, "rb") as f:
        out0, party0, fp0 = OleOutput.from_bytes(f.read())
    with open(args.in1, "rb") as f:
        out1, party1, fp1 = OleOutput.from_bytes(f.read())
    if fp0 != fp1 or {party0, party1} != {0, 1}:
        print("FAIL: outputs do not form a matched pair")
        return 1
    q = out0.x.group.field.q
    group = out0.x.group
    params = PcgParams(group, c=2, t=1, noise="monomial")  # only the group matters here
    ok = verify_ole(out0, out1, params)
    if ok and args.crt:
        batch = crt_split(out0, out1, params)
        ok = batch.check()
        print(f"scalar instances checked: {len(batch)} over F_{q}")
    print("OK" if ok else "FAIL")
    return 0 if ok else 1


def cmd_triples(args) -> int:
    params = _params(args)
    rng = _rng(args)
    shares = deal_triples(params, args.parties, rng)
    q = params.q
    a = sum(s.a for s in shares) % q
    b = sum(s.b for s in shares) % q
    c = sum(s.c for s in shares) % q
    good = int(np.count_nonzero((a * b) % q == c))
    print(f"generated {a.size} {args.parties}-party triples over F_{q}; valid: {good}/{a.size}")
    if args.out:
        for i, s in enumerate(shares):
            np.savez(f"{args.out}.party{i}.npz", a=s.a, b=s.b, c=s.c, q=q)
        print(f"wrote shares to {args.out}.party*.npz")
    return 0 if good == a.size else 1


def cmd_gmw(args) -> int:
    with open(args.circuit) as f:
        circuit = parse_circuit(f.read(), args.q)
    rng = _rng(args)
    n_inputs = len(circuit.input_gates)
    if args.inputs:
        vals = [int(v) % args.q for v in args.inputs.split(",")]
        if len(vals) != n_inputs:
            print(f"need {n_inputs} inputs, got {len(vals)}", file=sys.stderr)
            return 2
    else:
        vals = [int(v) for v in rng.integers(0, args.q, size=n_inputs)]
    inputs = {g.wire: vals[i] for i, g in enumerate(circuit.input_gates)}
    params = _params(args)
    if params.group.size < circuit.n_mul:
        print(
            f"group too small: {params.group.size} instances < {circuit.n_mul} MUL gates",
            file=sys.stderr,
        )
        return 2
    expected = plaintext_eval(circuit, inputs)
    if args.mode == "triples":
        triples = dealer_setup(params, "triples", rng, n_parties=args.parties)
        res = gmw_eval_triples(circuit, inputs, triples, args.parties, rng)
    else:
        masks = dealer_setup(params, "circuit-dep", rng, n_parties=args.parties, circuit=circuit)
        res = gmw_eval_circuitdep(circuit, inputs, masks, args.parties, check_invariant=True)
    ok = res.outputs == expected
    print(f"inputs: {vals}")
    print(f"outputs: {res.outputs}")
    print(f"plaintext check: {'OK' if ok else 'FAIL'}")
    print(f"mul gates: {circuit.n_mul}")
    print(f"online field elements broadcast (mul phase): {res.online_elements}")
    return 0 if ok else 1


def cmd_estimate(args) -> int:
    report = security_estimate(args.q, args.n, args.c, args.t, lam=args.lam)
    print(report.to_json() if args.json else report.to_text())
    return 0 if report.meets_lambda else 1


def cmd_bench(args) -> int:
    rng = _rng(args)
    group = GroupSpec((args.q - 1,) * args.n, FieldSpec(args.q))
    a = group.random(rng)
    b = group.random(rng)
    t0 = time.perf_counter()
    dft_forward(a)
    t_dft = time.perf_counter() - t0
    t0 = time.perf_counter()
    mul_fft(a, b)
    t_fft = time.perf_counter() - t0
    print(f"|G| = {group.size} over F_{args.q}")
    print(f"dft_forward: {t_dft * 1e3:.2f} ms")
    print(f"mul_fft:     {t_fft * 1e3:.2f} ms")
    if group.size <= 4096:
        t0 = time.perf_counter()
        mul_naive(a, b)
        print(f"mul_naive:   {(time.perf_counter() - t0) * 1e3:.2f} ms")
    params = _params(args)
    t0 = time.perf_counter()
    s0, s1 = pcg_gen(params, rng)
    t_gen = time.perf_counter() - t0
    t0 = time.perf_counter()
    _, stats = pcg_expand_with_stats(0, s0, params)
    t_exp = time.perf_counter() - t0
    print(f"pcg gen:     {t_gen * 1e3:.2f} ms")
    print(f"pcg expand:  {t_exp * 1e3:.2f} ms ({stats.prg_calls} prg calls)")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gapcg",
        description="OLE correlation generation over group algebras: seeds, expansion, "
        "triples, GMW evaluation, and attack-cost estimation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a correlated seed pair (trusted dealer)")
    _add_param_args(p)
    p.add_argument("--rho0", type=str, default=None, help="party-0 programmed input (32-byte hex)")
    p.add_argument("--rho1", type=str, default=None, help="party-1 programmed input (32-byte hex)")
    p.add_argument(
        "--reject-fold",
        type=str,
        default=None,
        help="comma-separated subgroup indices: resample noise until its folded "
        "weight reaches the expected value",
    )
    p.add_argument("--out0", required=True)
    p.add_argument("--out1", required=True)
    p.add_argument("--rng-seed", type=str, default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("expand", help="expand a seed file into its correlation half")
    p.add_argument("--seed", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump", action="store_true", help="print serialized x/z as hex")
    p.add_argument("--rng-seed", type=str, default=None)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("verify", help="check two expanded halves multiply correctly")
    p.add_argument("--in0", required=True)
    p.add_argument("--in1", required=True)
    p.add_argument("--crt", action="store_true", help="also check every scalar instance")
    p.add_argument("--rng-seed", type=str, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("triples", help="generate and check multiplication triples")
    _add_param_args(p)
    p.add_argument("--parties", type=int, default=2)
    p.add_argument("--out", type=str, default=None, help="output file prefix (.npz per party)")
    p.add_argument("--rng-seed", type=str, default=None)
    p.set_defaults(func=cmd_triples)

    p = sub.add_parser("gmw", help="evaluate a circuit with preprocessed material")
    _add_param_args(p)
    p.add_argument("--circuit", required=True)
    p.add_argument("--mode", choices=("triples", "circuitdep"), default="triples")
    p.add_argument("--parties", type=int, default=2)
    p.add_argument("--inputs", type=str, default=None, help="comma-separated input values")
    p.add_argument("--rng-seed", type=str, default=None)
    p.set_defaults(func=cmd_gmw)

    p = sub.add_parser("estimate", help="attack-cost report for a parameter set")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--t", type=int, default=152)
    p.add_argument("--lam", type=int, default=128)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bench", help="time transforms and seed expansion")
    _add_param_args(p)
    p.add_argument("--rng-seed", type=str, default=None)
    p.set_defaults(func=cmd_bench)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())

"""Trusted-dealer orchestration and semi-honest online phases over F_q.

Parties are simulated in-process; every message goes through a Tape so tests
can count communication exactly.  Two online modes:

* triples mode: each multiplication consumes one Beaver triple and costs two
  openings (two field elements sent per party per gate);
* circuit-dependent mode: wires carry public masked values x + r_x, each
  multiplication costs a single opening (one element per party per gate).

Circuits are straight-line gate lists over single-assignment wires, text
format one gate per line:

    INPUT w p | CONST w v | ADD w u v | MUL w u v | OUTPUT w    (# comments)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientTriples, MalformedCircuit, MaskMismatch, ParamError
from .pcg import (
    OleOutput,
    PcgParams,
    ProgramInput,
    ScalarOleBatch,
    TripleShares,
    crt_split,
    nparty_triples,
    ole_to_triples,
    pcg_expand,
    pcg_gen,
)

# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class Gate:
    op: str  # INPUT | CONST | ADD | MUL | OUTPUT
    wire: int
    a: int = 0  # input: party; const: value; add/mul: left operand wire
    b: int = 0  # add/mul: right operand wire


@dataclass(frozen=True)
class Circuit:
    q: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        defined: set[int] = set()
        for g in self.gates:
            if g.op in ("INPUT", "CONST", "ADD", "MUL"):
                if g.wire in defined:
                    raise MalformedCircuit(f"wire {g.wire} assigned twice")
                if g.op in ("ADD", "MUL"):
                    if g.a not in defined or g.b not in defined:
                        raise MalformedCircuit(f"wire {g.wire} uses undefined operand")
                defined.add(g.wire)
            elif g.op == "OUTPUT":
                if g.wire not in defined:
                    raise MalformedCircuit(f"output of undefined wire {g.wire}")
            else:
                raise MalformedCircuit(f"unknown gate {g.op}")

    @property
    def n_mul(self) -> int:
        return sum(1 for g in self.gates if g.op == "MUL")

    @property
    def input_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.op == "INPUT"]

    @property
    def output_wires(self) -> list[int]:
        return [g.wire for g in self.gates if g.op == "OUTPUT"]

    def to_text(self) -> str:
        lines = []
        for g in self.gates:
            if g.op == "INPUT":
                lines.append(f"INPUT {g.wire} {g.a}")
            elif g.op == "CONST":
                lines.append(f"CONST {g.wire} {g.a}")
            elif g.op in ("ADD", "MUL"):
                lines.append(f"{g.op} {g.wire} {g.a} {g.b}")
            else:
                lines.append(f"OUTPUT {g.wire}")
        return "\n".join(lines) + "\n"


def parse_circuit(text: str, q: int) -> Circuit:
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0].upper()
        try:
            if op == "INPUT":
                gates.append(Gate("INPUT", int(parts[1]), int(parts[2])))
            elif op == "CONST":
                gates.append(Gate("CONST", int(parts[1]), int(parts[2]) % q))
            elif op in ("ADD", "MUL"):
                gates.append(Gate(op, int(parts[1]), int(parts[2]), int(parts[3])))
            elif op == "OUTPUT":
                gates.append(Gate("OUTPUT", int(parts[1])))
            else:
                raise MalformedCircuit(f"line {lineno}: unknown gate {op}")
        except (IndexError, ValueError) as exc:
            raise MalformedCircuit(f"line {lineno}: {raw!r}") from exc
    return Circuit(q, tuple(gates))


def random_circuit(
    q: int, n_inputs: int, n_mul: int, n_parties: int, rng: np.random.Generator
) -> Circuit:
    """A random well-formed circuit with exactly n_mul multiplication gates."""
    gates = [Gate("INPUT", w, int(rng.integers(0, n_parties))) for w in range(n_inputs)]
    wires = list(range(n_inputs))
    next_wire = n_inputs
    muls = 0
    while muls < n_mul:
        op = "MUL" if rng.random() < 0.6 else "ADD"
        a, b = rng.choice(wires, 2)
        if op == "MUL":
            muls += 1
        gates.append(Gate(op, next_wire, int(a), int(b)))
        wires.append(next_wire)
        next_wire += 1
    gates.append(Gate("OUTPUT", wires[-1]))
    gates.append(Gate("OUTPUT", int(rng.choice(wires))))
    return Circuit(q, tuple(gates))


def plaintext_eval(circuit: Circuit, inputs: dict[int, int]) -> list[int]:
    """Reference evaluation on combined plaintext inputs (wire -> value)."""
    q = circuit.q
    vals: dict[int, int] = {}
    outs = []
    for g in circuit.gates:
        if g.op == "INPUT":
            if g.wire not in inputs:
                raise MalformedCircuit(f"missing input for wire {g.wire}")
            vals[g.wire] = inputs[g.wire] % q
        elif g.op == "CONST":
            vals[g.wire] = g.a % q
        elif g.op == "ADD":
            vals[g.wire] = (vals[g.a] + vals[g.b]) % q
        elif g.op == "MUL":
            vals[g.wire] = (vals[g.a] * vals[g.b]) % q
        else:
            outs.append(vals[g.wire])
    return outs


# ---------------------------------------------------------------------------
# message tape


@dataclass
class Tape:
    """Counts field elements broadcast per party, bucketed by phase."""

    n_parties: int
    sent: dict = field(default_factory=dict)  # (phase, party) -> count

    def send(self, phase: str, party: int, n_elements: int = 1) -> None:
        key = (phase, party)
        self.sent[key] = self.sent.get(key, 0) + n_elements

    def total(self, phase: str) -> int:
        return sum(v for (ph, _), v in self.sent.items() if ph == phase)


# ---------------------------------------------------------------------------
# dealer


def _additive_shares(value: int, n: int, q: int, rng: np.random.Generator) -> np.ndarray:
    sh = rng.integers(0, q, size=n, dtype=np.int64)
    sh[-1] = (value - sh[:-1].sum()) % q
    return sh


def _share_vector(vec: np.ndarray, n: int, q: int, rng: np.random.Generator) -> np.ndarray:
    sh = rng.integers(0, q, size=(n, vec.size), dtype=np.int64)
    sh[-1] = (vec - sh[:-1].sum(axis=0)) % q
    return sh


def deal_two_party_triples(
    params: PcgParams, rng: np.random.Generator
) -> tuple[TripleShares, TripleShares]:
    """Two programmed OLE instances -> |G| Beaver triples for two parties."""
    s0a, s1a = pcg_gen(params, rng)
    s0b, s1b = pcg_gen(params, rng)
    batch_ab = crt_split(pcg_expand(0, s0a, params), pcg_expand(1, s1a, params), params)
    batch_ba = crt_split(pcg_expand(0, s0b, params), pcg_expand(1, s1b, params), params)
    return ole_to_triples(batch_ab, batch_ba)


def deal_triples(
    params: PcgParams, n_parties: int, rng: np.random.Generator
) -> list[TripleShares]:
    if n_parties == 2:
        return list(deal_two_party_triples(params, rng))
    return nparty_triples(params, n_parties, rng)


@dataclass
class MaskAssignment:
    """Per-party circuit-dependent preprocessing material.

    ``wire_shares[w]`` are the parties' shares of the wire mask r_w (present
    for every wire; addition-gate masks satisfy r_w = r_u + r_v); per MUL gate
    ``prod_shares[w]`` shares r_u * r_v.  ``plain_masks`` retains the dealer's
    plaintext masks for invariant checking in tests.
    """

    circuit_fingerprint: int
    wire_shares: dict
    prod_shares: dict
    plain_masks: dict


def deal_circuit_masks(
    circuit: Circuit,
    n_parties: int,
    triples: list[TripleShares],
    rng: np.random.Generator,
) -> MaskAssignment:
    """Derive mask material from a batch of Beaver triples (one per MUL gate).

    The dealer knows everything, so the triple (a, b, ab) backing a gate is
    shifted onto the gate's actual input masks: shares of r_u r_v are
    c + (r_u - a) b + (r_v - b) a + (r_u - a)(r_v - b) evaluated share-wise.
    """
    q = circuit.q
    if len(triples) != n_parties:
        raise ParamError("one TripleShares object per party")
    avail = triples[0].a.size
    if circuit.n_mul > avail:
        raise InsufficientTriples(f"need {circuit.n_mul} triples, have {avail}")
    masks: dict[int, int] = {}
    wire_shares: dict[int, np.ndarray] = {}
    prod_shares: dict[int, np.ndarray] = {}
    tri_idx = 0
    for g in circuit.gates:
        if g.op in ("INPUT", "CONST", "MUL"):
            r = int(rng.integers(0, q)) if g.op != "CONST" else 0
            masks[g.wire] = r
            wire_shares[g.wire] = _additive_shares(r, n_parties, q, rng)
        elif g.op == "ADD":
            masks[g.wire] = (masks[g.a] + masks[g.b]) % q
            wire_shares[g.wire] = (wire_shares[g.a] + wire_shares[g.b]) % q
        if g.op == "MUL":
            a_sh = np.array([tr.a[tri_idx] for tr in triples], dtype=np.int64)
            b_sh = np.array([tr.b[tri_idx] for tr in triples], dtype=np.int64)
            c_sh = np.array([tr.c[tri_idx] for tr in triples], dtype=np.int64)
            tri_idx += 1
            a_pl = int(a_sh.sum() % q)
            b_pl = int(b_sh.sum() % q)
            du = (masks[g.a] - a_pl) % q
            dv = (masks[g.b] - b_pl) % q
            s = (c_sh + du * b_sh + dv * a_sh) % q
            s[0] = (s[0] + du * dv) % q
            prod_shares[g.wire] = s
    return MaskAssignment(
        circuit_fingerprint=hash((circuit.q, circuit.gates)),
        wire_shares=wire_shares,
        prod_shares=prod_shares,
        plain_masks=masks,
    )


def dealer_setup(
    params: PcgParams,
    mode: str,
    rng: np.random.Generator,
    n_parties: int = 2,
    circuit: Circuit | None = None,
):
    """Preprocessing material per mode: 'ole', 'triples', or 'circuit-dep'."""
    if mode == "ole":
        return pcg_gen(params, rng)
    if mode == "triples":
        return deal_triples(params, n_parties, rng)
    if mode == "circuit-dep":
        if circuit is None:
            raise ParamError("circuit-dep mode needs the circuit")
        triples = deal_triples(params, n_parties, rng)
        return deal_circuit_masks(circuit, n_parties, triples, rng)
    raise ParamError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# online phases


@dataclass
class GmwResult:
    outputs: list[int]
    tape: Tape
    online_elements: int  # field elements broadcast in MUL processing
    openings: int  # broadcast rounds' element count per definition of the mode
    triples_consumed: int = 0


def _share_inputs(
    circuit: Circuit, inputs: dict[int, int], n_parties: int, q: int, rng: np.random.Generator
) -> dict[int, np.ndarray]:
    shares = {}
    for g in circuit.input_gates:
        if g.wire not in inputs:
            raise MalformedCircuit(f"missing input value for wire {g.wire}")
        shares[g.wire] = _additive_shares(inputs[g.wire], n_parties, q, rng)
    return shares


def gmw_eval_triples(
    circuit: Circuit,
    inputs: dict[int, int],
    triples: list[TripleShares],
    n_parties: int,
    rng: np.random.Generator,
) -> GmwResult:
    """Beaver-triple online phase: two openings per multiplication gate."""
    q = circuit.q
    if len(triples) != n_parties:
        raise ParamError("one TripleShares object per party")
    if triples[0].a.size < circuit.n_mul:
        raise InsufficientTriples(f"need {circuit.n_mul} triples, have {triples[0].a.size}")
    tape = Tape(n_parties)
    shares = _share_inputs(circuit, inputs, n_parties, q, rng)
    tri = 0
    for g in circuit.gates:
        if g.op == "CONST":
            sh = np.zeros(n_parties, dtype=np.int64)
            sh[0] = g.a % q
            shares[g.wire] = sh
        elif g.op == "ADD":
            shares[g.wire] = (shares[g.a] + shares[g.b]) % q
        elif g.op == "MUL":
            a_sh = np.array([tr.a[tri] for tr in triples], dtype=np.int64)
            b_sh = np.array([tr.b[tri] for tr in triples], dtype=np.int64)
            c_sh = np.array([tr.c[tri] for tr in triples], dtype=np.int64)
            tri += 1
            d_sh = (shares[g.a] - a_sh) % q
            e_sh = (shares[g.b] - b_sh) % q
            for p in range(n_parties):
                tape.send("mul", p, 2)  # broadcast d-share and e-share
            d = int(d_sh.sum() % q)
            e = int(e_sh.sum() % q)
            z_sh = (c_sh + d * b_sh + e * a_sh) % q
            z_sh[0] = (z_sh[0] + d * e) % q
            shares[g.wire] = z_sh
    outputs = []
    for w in circuit.output_wires:
        for p in range(n_parties):
            tape.send("output", p, 1)
        outputs.append(int(shares[w].sum() % q))
    return GmwResult(
        outputs=outputs,
        tape=tape,
        online_elements=tape.total("mul"),
        openings=tape.total("mul"),
        triples_consumed=tri,
    )


def gmw_eval_circuitdep(
    circuit: Circuit,
    inputs: dict[int, int],
    masks: MaskAssignment,
    n_parties: int,
    check_invariant: bool = False,
) -> GmwResult:
    """Masked-wire online phase: one opening per multiplication gate.

    All parties learn the public masked value mu_w = x_w + r_w for every wire.
    With ``check_invariant`` the dealer's plaintext masks are used to assert
    mu_w - r_w equals the plaintext wire value at every step.
    """
    if masks.circuit_fingerprint != hash((circuit.q, circuit.gates)):
        raise MaskMismatch("mask material was generated for a different circuit")
    q = circuit.q
    tape = Tape(n_parties)
    mu: dict[int, int] = {}
    plain_vals: dict[int, int] = {}
    for g in circuit.gates:
        if g.op == "INPUT":
            # the input owner learns r_w from the others' shares, then
            # broadcasts the masked value (input phase, not MUL accounting)
            for p in range(n_parties):
                if p != g.a:
                    tape.send("input", p, 1)
            tape.send("input", g.a, 1)
            mu[g.wire] = (inputs[g.wire] + int(masks.wire_shares[g.wire].sum())) % q
        elif g.op == "CONST":
            mu[g.wire] = g.a % q  # mask fixed to 0 for constants
        elif g.op == "ADD":
            mu[g.wire] = (mu[g.a] + mu[g.b]) % q
        elif g.op == "MUL":
            r_u = masks.wire_shares[g.a]
            r_v = masks.wire_shares[g.b]
            s_uv = masks.prod_shares[g.wire]
            r_w = masks.wire_shares[g.wire]
            h = (-mu[g.a] * r_v - mu[g.b] * r_u + s_uv + r_w) % q
            h[0] = (h[0] + mu[g.a] * mu[g.b]) % q
            for p in range(n_parties):
                tape.send("mul", p, 1)  # the single opening
            mu[g.wire] = int(h.sum() % q)
        if check_invariant and g.op in ("INPUT", "CONST", "ADD", "MUL"):
            if g.op == "INPUT":
                plain_vals[g.wire] = inputs[g.wire] % q
            elif g.op == "CONST":
                plain_vals[g.wire] = g.a % q
            elif g.op == "ADD":
                plain_vals[g.wire] = (plain_vals[g.a] + plain_vals[g.b]) % q
            else:
                plain_vals[g.wire] = (plain_vals[g.a] * plain_vals[g.b]) % q
            mask = masks.plain_masks.get(g.wire, 0)
            if mu[g.wire] != (plain_vals[g.wire] + mask) % q:
                raise MaskMismatch(f"masked-wire invariant broken at wire {g.wire}")
    outputs = []
    for w in circuit.output_wires:
        for p in range(n_parties):
            tape.send("output", p, 1)
        outputs.append((mu[w] - int(masks.wire_shares[w].sum())) % q)
    return GmwResult(
        outputs=outputs,
        tape=tape,
        online_elements=tape.total("mul"),
        openings=tape.total("mul"),
        triples_consumed=circuit.n_mul,
    )

"""The (n,n) scheme end to end: deal, evaluate on shares, reconstruct.

A secret on s logical qubits is spread over an (s+t) x (n+1) qubit grid
(see ShareLayout): each logical qubit occupies one row, the dealer holds
column 1, participant y-1 holds column y. Dealing places the secret on the
dealer's column, fills every other data-grid qubit with I/2, puts one
3-qubit magic state per ancilla triple on the dealer's column, and runs the
encoding ladder across every row. Logical Cliffords act column-locally via
transversal_expand; each logical Toffoli burns one ancilla triple through
the measurement gadget, with every measured bit broadcast.

States are carried as sparse Pauli expansions with secret tags riding along
(the audit module counts them after partial traces). Measured-out qubits
are stored maximally mixed — their outcomes live in the classical
transcript, so the pair (state, transcript) loses nothing; this keeps term
counts flat instead of letting each consumed triple multiply them by
2^(3(n+1)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cache
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .circuits import (
    CLIFFORD_KINDS,
    Circuit,
    Gate,
    ShareLayout,
    evaluate_condition,
    gates_from_lines,
    ladder_circuit,
    magic_state_circuit,
    toffoli_gadget,
    transversal_expand,
)
from .dense import StateVector, build_unitary, run_circuit
from .errors import ProtocolError, ResourceError, UsageError
from .paulis import PauliOperator, PauliString

PROBABILITY_CUTOFF = 1e-14
DEFAULT_BRANCH_CAP = 4096


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SchemeParams:
    """n participants besides the dealer, s secret rows, t ancilla rows.

    Strict mode enforces s = 3k, t = 3k' with k'/k a positive integer;
    relaxed mode admits any s >= 1 and t = 3 * (Toffoli budget), budget 0
    included. Use the classmethod constructors.
    """

    n: int
    s: int
    t: int
    strict_mode: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise UsageError("need at least one participant besides the dealer")
        if self.s < 1:
            raise UsageError("need at least one secret row")
        if self.t < 0 or self.t % 3 != 0:
            raise UsageError("ancilla rows must come in triples")
        if self.strict_mode:
            if self.s % 3 != 0:
                raise UsageError("strict mode requires s = 3k")
            k, kprime = self.s // 3, self.t // 3
            if kprime < 1:
                raise UsageError("strict mode requires k' >= 1")
            if kprime % k != 0:
                raise UsageError("strict mode requires k'/k to be a positive integer")

    @classmethod
    def strict(cls, n: int, k: int, kprime: int) -> SchemeParams:
        if k < 1 or kprime < 1:
            raise UsageError("strict mode requires k, k' >= 1")
        return cls(n=n, s=3 * k, t=3 * kprime, strict_mode=True)

    @classmethod
    def relaxed(cls, n: int, s: int, budget: int = 0) -> SchemeParams:
        if budget < 0:
            raise UsageError("Toffoli budget cannot be negative")
        return cls(n=n, s=s, t=3 * budget, strict_mode=False)

    @property
    def k(self) -> int | None:
        return self.s // 3 if self.strict_mode else None

    @property
    def kprime(self) -> int | None:
        return self.t // 3 if self.strict_mode else None

    @property
    def budget(self) -> int:
        return self.t // 3

    def layout(self) -> ShareLayout:
        return ShareLayout(s=self.s, t=self.t, n=self.n)


# ---------------------------------------------------------------------------
# scripts
# ---------------------------------------------------------------------------

LOGICAL_KINDS = CLIFFORD_KINDS + ("I", "TOFFOLI")


def supported_logical_kinds(m: int) -> tuple[str, ...]:
    """Logical gate kinds with a column-local realization at column count m.

    Odd m supports the full generating set; even m only the Paulis and CNOT
    (H, S and CZ provably have no column-local form there).
    """
    if m % 2 == 1:
        return ("H", "S", "Sdg", "X", "Y", "Z", "CNOT", "CZ")
    return ("X", "Y", "Z", "CNOT")


@dataclass(frozen=True)
class EvaluationScript:
    """Ordered logical gates over rows 1..num_rows (Cliffords and TOFFOLIs)."""

    num_rows: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if g.kind not in LOGICAL_KINDS:
                raise UsageError(f"{g.kind} is not a logical script gate")
            if g.condition is not None or g.classical_bit is not None:
                raise UsageError("script gates carry no conditions or bits")
            for r in g.qubits:
                if not 1 <= r <= self.num_rows:
                    raise UsageError(f"logical row {r} out of range 1..{self.num_rows}")

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def toffoli_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == "TOFFOLI")

    @classmethod
    def from_lines(cls, text: str, num_rows: int) -> EvaluationScript:
        return cls(num_rows, tuple(gates_from_lines(text)))


def random_clifford_script(
    m: int, num_rows: int, length: int, rng: np.random.Generator
) -> EvaluationScript:
    """Random Clifford-only script drawn from the kinds supported at column
    count m (seeded by the caller's generator)."""
    kinds = supported_logical_kinds(m)
    gates = []
    for _ in range(length):
        kind = str(rng.choice(kinds))
        arity = 2 if kind in ("CNOT", "CZ") else 1
        if arity > num_rows:
            kind, arity = "H" if m % 2 else "X", 1
        rows = rng.choice(np.arange(1, num_rows + 1), size=arity, replace=False)
        gates.append(Gate(kind, tuple(int(r) for r in rows)))
    return EvaluationScript(num_rows, tuple(gates))


def logical_unitary(script: EvaluationScript) -> np.ndarray:
    """Dense matrix of the script on its logical rows (row r -> qubit r-1)."""
    gates = tuple(Gate(g.kind, tuple(r - 1 for r in g.qubits)) for g in script.gates)
    return build_unitary(Circuit(script.num_rows, 0, gates))


# ---------------------------------------------------------------------------
# transcripts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BitOrigin:
    """Where one broadcast bit came from."""

    slot: int
    gadget_id: int
    triple: int
    row: int
    column: int
    participant: str


@dataclass(frozen=True)
class MeasurementRecord:
    gadget_id: int
    participant: str
    slot: int
    value: int
    branch_probability: float


@dataclass(frozen=True)
class Transcript:
    """Broadcast record of one evaluate call.

    ``branches`` pairs each surviving branch's full bit history with its
    probability; in exact mode the probabilities sum to 1, in sampled mode
    a single drawn branch is recorded with its own probability.
    """

    bit_origins: tuple[BitOrigin, ...] = ()
    branches: tuple[tuple[tuple[int, ...], float], ...] = ()

    @property
    def slots(self) -> tuple[int, ...]:
        return tuple(o.slot for o in self.bit_origins)

    def total_probability(self) -> float:
        return float(sum(p for _, p in self.branches))

    def marginal(self, slot: int) -> float:
        return float(sum(p for bits, p in self.branches if bits[slot]))

    def joint_distribution(self) -> dict[tuple[int, ...], float]:
        slots = self.slots
        dist: dict[tuple[int, ...], float] = {}
        for bits, p in self.branches:
            key = tuple(bits[s] for s in slots)
            dist[key] = dist.get(key, 0.0) + p
        return dist

    def records(self) -> tuple[MeasurementRecord, ...]:
        out = []
        for bits, p in self.branches:
            for origin in self.bit_origins:
                out.append(
                    MeasurementRecord(
                        gadget_id=origin.gadget_id,
                        participant=origin.participant,
                        slot=origin.slot,
                        value=bits[origin.slot],
                        branch_probability=p,
                    )
                )
        return tuple(out)


# ---------------------------------------------------------------------------
# shared state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SharedState:
    """One branch of the dealt-and-evaluated global state.

    ``state`` spans the whole grid; qubits measured by a past gadget are
    stored maximally mixed with their outcomes in ``classical_transcript``.
    """

    layout: ShareLayout
    state: PauliOperator
    consumed_ancillas: frozenset[int] = frozenset()
    classical_transcript: tuple[int, ...] = ()
    branch_probability: float = 1.0

    def __post_init__(self) -> None:
        if self.state.num_qubits != self.layout.num_qubits:
            raise UsageError("state size does not match the layout")

    @property
    def available_triples(self) -> tuple[int, ...]:
        return tuple(
            i for i in range(self.layout.t // 3) if i not in self.consumed_ancillas
        )


def encoding_circuit(layout: ShareLayout) -> Circuit:
    """The ladder over each row's columns (empty for the 1-column layout)."""
    if layout.columns == 1:
        return Circuit(layout.num_qubits, 0, ())
    gates: list[Gate] = []
    for x in range(1, layout.rows + 1):
        row = layout.row_qubits(x)
        for g in ladder_circuit(layout.columns).gates:
            gates.append(Gate(g.kind, tuple(row[q] for q in g.qubits)))
    return Circuit(layout.num_qubits, 0, tuple(gates))


@cache
def magic_state_operator() -> PauliOperator:
    """Pauli expansion of the 3-qubit gadget resource state."""
    branches = run_circuit(magic_state_circuit(), StateVector.basis(3, 0))
    ((_, _, state),) = branches
    return PauliOperator.from_dense(state.to_density().entries)


def _as_secret_operator(secret: object, s: int) -> PauliOperator:
    if isinstance(secret, PauliOperator):
        op = secret
    elif isinstance(secret, StateVector):
        op = PauliOperator.from_dense(secret.to_density().entries)
    elif isinstance(secret, np.ndarray):
        arr = np.asarray(secret, dtype=complex)
        if arr.ndim == 1:
            op = PauliOperator.from_dense(StateVector(s, arr).to_density().entries)
        else:
            op = PauliOperator.from_dense(arr)
    elif hasattr(secret, "entries"):  # DensityMatrix duck type
        op = PauliOperator.from_dense(secret.entries)
    else:
        raise UsageError(f"cannot interpret {type(secret).__name__} as a secret")
    if op.num_qubits != s:
        raise UsageError(f"secret spans {op.num_qubits} qubits, expected {s}")
    if abs(op.trace() - 1.0) > 1e-9:
        raise UsageError("secret must have trace 1")
    if not op.is_hermitian:
        raise UsageError("secret must be Hermitian")
    return op


def deal(params: SchemeParams, secret: object) -> SharedState:
    """Encode and distribute: the dealt global state with every secret term
    tagged by its Pauli word for downstream audits."""
    op = _as_secret_operator(secret, params.s)
    layout = params.layout()
    m = layout.columns

    # secret block: each term's letter sits on the dealer's column of its
    # row, every other data qubit starts as I/2
    fresh = 2.0 ** -(params.s * (m - 1))
    entries = []
    for ps, c in op.items():
        word = ps.letters()
        spread = "".join(letter + "I" * (m - 1) for letter in word)
        existing = op.tag_of(ps)
        entries.append((PauliString.from_letters(spread), c * fresh, word))
        for tag in existing:
            entries.append((PauliString.from_letters(spread), 0.0, tag))
    block = PauliOperator.from_terms(params.s * m, entries)

    # ancilla triples: one magic state per triple on the dealer's column
    if params.t:
        magic = magic_state_operator()
        fresh3 = 2.0 ** -(3 * (m - 1))
        triple_entries = []
        for ps, c in magic.items():
            spread = "".join(letter + "I" * (m - 1) for letter in ps.letters())
            triple_entries.append((PauliString.from_letters(spread), c * fresh3, None))
        triple_block = PauliOperator.from_terms(3 * m, triple_entries)
        for _ in range(params.t // 3):
            block = block.tensor(triple_block)

    encoded = block.conjugate_circuit(encoding_circuit(layout).gates)
    return SharedState(layout=layout, state=encoded)


def reconstruct(
    shared: SharedState, columns: Sequence[int] | None = None
) -> PauliOperator:
    """Undo the ladder on every row, discard everything but the dealer's
    column of the secret rows, return the s-qubit operator. All columns are
    required — the scheme is n-of-n."""
    layout = shared.layout
    if columns is not None and set(columns) != set(range(1, layout.columns + 1)):
        raise ProtocolError("reconstruction requires all shares")
    op = shared.state.conjugate_circuit(encoding_circuit(layout).inverse().gates)
    keep = {layout.index_of(x, 1) for x in range(1, layout.s + 1)}
    traced = [q for q in range(layout.num_qubits) if q not in keep]
    return op.partial_trace(traced)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


@dataclass
class _Branch:
    op: PauliOperator
    bits: list[int]
    prob: float


def _run_gadget(
    gadget: Circuit,
    branches: list[_Branch],
    mode: str,
    rng: np.random.Generator | None,
    branch_cap: int,
) -> list[_Branch]:
    base = len(branches[0].bits)
    for br in branches:
        br.bits.extend([0] * gadget.num_classical_bits)
    for g in gadget.gates:
        if g.kind == "MEASURE_Z":
            (q,) = g.qubits
            slot = base + g.classical_bit
            nxt: list[_Branch] = []
            for br in branches:
                outcomes = []
                for b in (0, 1):
                    p, post = br.op.project_z(q, b)
                    if p > PROBABILITY_CUTOFF:
                        outcomes.append((b, p, post))
                if mode == "sampled":
                    probs = np.array([p for _, p, _ in outcomes])
                    pick = int(rng.choice(len(outcomes), p=probs / probs.sum()))
                    outcomes = [outcomes[pick]]
                for b, p, post in outcomes:
                    bits = br.bits if len(outcomes) == 1 else list(br.bits)
                    bits[slot] = b
                    nxt.append(
                        _Branch(post.scaled(1 / p).reset_to_mixed((q,)), bits, br.prob * p)
                    )
            branches = nxt
            if len(branches) > branch_cap:
                raise ResourceError(
                    f"exact branch enumeration exceeded {branch_cap} branches; "
                    "rerun in sampled mode or raise branch_cap"
                )
        else:
            for br in branches:
                if g.condition is not None and not evaluate_condition(
                    g.condition, br.bits[base:]
                ):
                    continue
                br.op = br.op.conjugate_clifford(g)
    return branches


def evaluate(
    shared: SharedState,
    script: EvaluationScript,
    mode: str = "exact",
    seed: int | None = None,
    branch_cap: int = DEFAULT_BRANCH_CAP,
) -> tuple[list[SharedState], Transcript]:
    """Run the logical script on the shares.

    Cliffords expand transversally and never branch. Each TOFFOLI consumes
    the next intact ancilla triple and measures 3(n+1) qubits; exact mode
    keeps every branch (probabilities sum to 1), sampled mode draws one path
    with the mandatory seed. Returns the branch states and the broadcast
    transcript.
    """
    if mode == "sampled":
        if seed is None:
            raise UsageError("sampled mode requires a seed")
        rng = np.random.default_rng(seed)
    elif mode == "exact":
        rng = None
    else:
        raise UsageError(f"unknown mode {mode!r}; use 'exact' or 'sampled'")
    if script.num_rows != shared.layout.s:
        raise UsageError("script row count does not match the layout")
    available = list(shared.available_triples)
    if script.toffoli_count > len(available):
        raise ProtocolError(
            f"Toffoli budget exhausted: script needs {script.toffoli_count} "
            f"ancilla triples, {len(available)} remain"
        )

    layout = shared.layout
    m = layout.columns
    consumed = set(shared.consumed_ancillas)
    branches = [_Branch(shared.state, list(shared.classical_transcript), 1.0)]
    origins: list[BitOrigin] = []
    for gi, gate in enumerate(script.gates):
        if gate.kind == "TOFFOLI":
            triple = available.pop(0)
            anc = layout.ancilla_triple_rows(triple)
            gadget = toffoli_gadget(tuple(gate.qubits), anc, layout)
            base = len(branches[0].bits)
            for local in range(gadget.num_classical_bits):
                row = gate.qubits[local // m]
                col = local % m + 1
                origins.append(
                    BitOrigin(
                        slot=base + local,
                        gadget_id=gi,
                        triple=triple,
                        row=row,
                        column=col,
                        participant=layout.owner(col),
                    )
                )
            branches = _run_gadget(gadget, branches, mode, rng, branch_cap)
            consumed.add(triple)
        else:
            circuit = transversal_expand(gate, layout)
            for br in branches:
                br.op = br.op.conjugate_circuit(circuit.gates)

    out = [
        SharedState(
            layout=layout,
            state=br.op,
            consumed_ancillas=frozenset(consumed),
            classical_transcript=tuple(br.bits),
            branch_probability=shared.branch_probability * br.prob,
        )
        for br in branches
    ]
    transcript = Transcript(
        bit_origins=tuple(origins),
        branches=tuple((tuple(br.bits), br.prob) for br in branches),
    )
    return out, transcript


# ---------------------------------------------------------------------------
# announcement statistics
# ---------------------------------------------------------------------------


def canonical_secret_family(s: int) -> list[tuple[str, PauliOperator]]:
    """All-zero, all-one and all-plus product secrets on s qubits."""
    dim = 2**s
    zero = np.zeros(dim)
    zero[0] = 1.0
    one = np.zeros(dim)
    one[-1] = 1.0
    plus = np.full(dim, dim**-0.5)
    return [
        ("|" + "0" * s + ">", PauliOperator.from_dense(np.outer(zero, zero))),
        ("|" + "1" * s + ">", PauliOperator.from_dense(np.outer(one, one))),
        ("|" + "+" * s + ">", PauliOperator.from_dense(np.outer(plus, plus))),
    ]


@dataclass(frozen=True)
class AnnouncementReport:
    bit_origins: tuple[BitOrigin, ...]
    marginals: tuple[float, ...]
    max_half_deviation: float
    max_marginal_variation: float
    max_joint_variation: float
    secrets_compared: tuple[str, ...]

    @property
    def empty(self) -> bool:
        return not self.bit_origins

    def as_dict(self) -> dict:
        return {
            "bits": [
                {
                    "slot": o.slot,
                    "gadget": o.gadget_id,
                    "row": o.row,
                    "column": o.column,
                    "participant": o.participant,
                    "marginal": self.marginals[i],
                }
                for i, o in enumerate(self.bit_origins)
            ],
            "max_half_deviation": self.max_half_deviation,
            "max_marginal_variation": self.max_marginal_variation,
            "max_joint_variation": self.max_joint_variation,
            "secrets_compared": list(self.secrets_compared),
        }


def announce_distribution(
    params: SchemeParams,
    script: EvaluationScript,
    secret: object,
    family: Sequence[tuple[str, object]] | None = None,
) -> AnnouncementReport:
    """Exact statistics of the broadcast bits.

    Reports each bit's marginal probability, the worst deviation from 1/2,
    and — across the given secret plus a comparison family (all-zero,
    all-one, all-plus products by default) — the worst variation of both the
    marginals and the full joint announcement distribution. A Clifford-only
    script announces nothing and yields an empty report.
    """
    if script.toffoli_count == 0:
        return AnnouncementReport((), (), 0.0, 0.0, 0.0, ())
    if family is None:
        family = canonical_secret_family(params.s)

    runs: list[tuple[str, Transcript]] = []
    primary = _as_secret_operator(secret, params.s)
    _, transcript = evaluate(deal(params, primary), script)
    runs.append(("secret", transcript))
    for label, other in family:
        other_op = _as_secret_operator(other, params.s)
        if other_op.terms == primary.terms:
            continue
        _, tr = evaluate(deal(params, other_op), script)
        runs.append((label, tr))

    origins = runs[0][1].bit_origins
    marginals = tuple(runs[0][1].marginal(o.slot) for o in origins)
    max_half = max(abs(p - 0.5) for p in marginals)

    max_marg = 0.0
    max_joint = 0.0
    joints = []
    for _, tr in runs:
        margs = tuple(tr.marginal(o.slot) for o in origins)
        max_marg = max(
            max_marg, max(abs(a - b) for a, b in zip(margs, marginals))
        )
        joints.append(tr.joint_distribution())
    for i in range(len(joints)):
        for j in range(i + 1, len(joints)):
            keys = set(joints[i]) | set(joints[j])
            for key in keys:
                diff = abs(joints[i].get(key, 0.0) - joints[j].get(key, 0.0))
                max_joint = max(max_joint, diff)
    return AnnouncementReport(
        bit_origins=origins,
        marginals=marginals,
        max_half_deviation=max_half,
        max_marginal_variation=max_marg,
        max_joint_variation=max_joint,
        secrets_compared=tuple(label for label, _ in runs),
    )


# ---------------------------------------------------------------------------
# secret files
# ---------------------------------------------------------------------------


def _as_complex(value: object) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise UsageError(f"cannot read {value!r} as a complex number")


def parse_secret(obj: dict, s: int | None = None) -> PauliOperator:
    """Secret from its JSON form: {"amplitudes": [...]} for a pure state
    (entries are numbers or [re, im] pairs) or {"pauli": {"XYZ": coeff}} for
    a direct expansion, letters keyed left-to-right by row."""
    if not isinstance(obj, dict):
        raise UsageError("secret file must hold a JSON object")
    if "amplitudes" in obj:
        amps = np.array([_as_complex(a) for a in obj["amplitudes"]])
        num = int(amps.size).bit_length() - 1
        if 2**num != amps.size:
            raise UsageError("amplitude count must be a power of two")
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise UsageError("amplitudes cannot all vanish")
        vec = StateVector(num, amps / norm)
        op = PauliOperator.from_dense(vec.to_density().entries)
    elif "pauli" in obj:
        words = obj["pauli"]
        if not isinstance(words, dict) or not words:
            raise UsageError("'pauli' must map letter words to coefficients")
        lengths = {len(w) for w in words}
        if len(lengths) != 1:
            raise UsageError("all Pauli words must have the same length")
        num = lengths.pop()
        op = PauliOperator.from_terms(
            num,
            [
                (PauliString.from_letters(w), _as_complex(c), None)
                for w, c in words.items()
            ],
        )
    else:
        raise UsageError("secret file needs an 'amplitudes' or 'pauli' key")
    if s is not None and op.num_qubits != s:
        raise UsageError(f"secret spans {op.num_qubits} qubits, expected {s}")
    return op


def load_secret(path: str | Path, s: int | None = None) -> PauliOperator:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"secret file {path}: {exc.msg}") from None
    return parse_secret(obj, s)

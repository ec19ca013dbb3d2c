"""Circuit and layout vocabulary.

Gates are immutable records; a circuit is an ordered gate list over flat
qubit indices plus classical bit slots. The share layout maps the protocol's
(row, column) grid onto flat indices row-major: ``index_of(x, y) =
(x-1)*(columns) + (y-1)`` with 1-based rows/columns, column 1 held by the
dealer (Alice) and column y by participant y-1.

The file format (one JSON object per line) is::

    {"g": "CNOT", "q": [0, 3]}
    {"g": "MEASURE_Z", "q": [2], "c": 0}
    {"g": "X", "q": [5], "cond": "b0^b2"}

Conditions are XOR combinations of previously written classical bits.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import UnsupportedGateError, UsageError
from .paulis import PauliString

GATE_ARITY = {
    "I": 1,
    "H": 1,
    "S": 1,
    "Sdg": 1,
    "X": 1,
    "Y": 1,
    "Z": 1,
    "CNOT": 2,
    "CZ": 2,
    "TOFFOLI": 3,
    "MEASURE_Z": 1,
}

CLIFFORD_KINDS = ("H", "S", "Sdg", "X", "Y", "Z", "CNOT", "CZ")

_COND_RE = re.compile(r"^b\d+(\^b\d+)*$")


def parse_condition(expr: str) -> tuple[int, ...]:
    """Bit slots of an XOR expression like ``"b0^b2"``."""
    if not _COND_RE.match(expr):
        raise UsageError(f"malformed condition {expr!r}; expected e.g. 'b0^b2'")
    return tuple(int(tok[1:]) for tok in expr.split("^"))


def evaluate_condition(expr: str, bits: Sequence[int]) -> bool:
    acc = 0
    for slot in parse_condition(expr):
        if slot >= len(bits):
            raise UsageError(f"condition {expr!r} reads unwritten bit b{slot}")
        acc ^= bits[slot]
    return bool(acc)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    classical_bit: int | None = None
    condition: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_ARITY:
            raise UsageError(f"unknown gate kind {self.kind!r}")
        qs = tuple(self.qubits)
        object.__setattr__(self, "qubits", qs)
        if len(qs) != GATE_ARITY[self.kind]:
            raise UsageError(f"{self.kind} takes {GATE_ARITY[self.kind]} qubits, got {len(qs)}")
        if len(set(qs)) != len(qs):
            raise UsageError(f"{self.kind} qubits must be distinct")
        if self.kind == "MEASURE_Z":
            if self.classical_bit is None:
                raise UsageError("MEASURE_Z needs a classical bit slot")
            if self.condition is not None:
                raise UsageError("measurements cannot be conditioned")
        elif self.classical_bit is not None:
            raise UsageError("only MEASURE_Z writes a classical bit")
        if self.condition is not None:
            parse_condition(self.condition)

    @property
    def is_clifford(self) -> bool:
        return self.kind in CLIFFORD_KINDS


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    num_classical_bits: int = 0
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        written: set[int] = set()
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise UsageError(f"gate {g.kind} touches qubit {q}, out of range")
            if g.condition is not None:
                for slot in parse_condition(g.condition):
                    if slot not in written:
                        raise UsageError(
                            f"condition {g.condition!r} reads bit b{slot} before it is written"
                        )
            if g.kind == "MEASURE_Z":
                if not 0 <= g.classical_bit < self.num_classical_bits:
                    raise UsageError(f"classical bit b{g.classical_bit} out of range")
                written.add(g.classical_bit)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, other: Circuit) -> Circuit:
        if other.num_qubits != self.num_qubits:
            raise UsageError("circuit widths differ")
        return Circuit(
            self.num_qubits,
            max(self.num_classical_bits, other.num_classical_bits),
            self.gates + other.gates,
        )

    def inverse(self) -> Circuit:
        """Inverse of a measurement-free Clifford+Toffoli circuit."""
        inv = {"S": "Sdg", "Sdg": "S"}
        gates = []
        for g in reversed(self.gates):
            if g.kind == "MEASURE_Z" or g.condition is not None:
                raise UsageError("cannot invert measurements or conditioned gates")
            gates.append(Gate(inv.get(g.kind, g.kind), g.qubits))
        return Circuit(self.num_qubits, 0, tuple(gates))

    def shifted_bits(self, offset: int) -> Circuit:
        """Same circuit with every classical slot moved up by ``offset``."""
        gates = []
        for g in self.gates:
            cond = g.condition
            if cond is not None:
                cond = "^".join(f"b{slot + offset}" for slot in parse_condition(cond))
            cbit = g.classical_bit if g.classical_bit is None else g.classical_bit + offset
            gates.append(Gate(g.kind, g.qubits, cbit, cond))
        return Circuit(self.num_qubits, self.num_classical_bits + offset, tuple(gates))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def gates_to_lines(gates: Iterable[Gate]) -> str:
    lines = []
    for g in gates:
        obj: dict = {"g": g.kind, "q": list(g.qubits)}
        if g.classical_bit is not None:
            obj["c"] = g.classical_bit
        if g.condition is not None:
            obj["cond"] = g.condition
        lines.append(json.dumps(obj))
    return "\n".join(lines) + ("\n" if lines else "")


def gates_from_lines(text: str) -> list[Gate]:
    gates = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise UsageError(f"line {ln}: not valid JSON ({exc.msg})") from None
        if not isinstance(obj, dict) or "g" not in obj or "q" not in obj:
            raise UsageError(f"line {ln}: expected keys 'g' and 'q'")
        gates.append(
            Gate(
                str(obj["g"]),
                tuple(int(q) for q in obj["q"]),
                obj.get("c"),
                obj.get("cond"),
            )
        )
    return gates


def circuit_to_lines(circuit: Circuit) -> str:
    return gates_to_lines(circuit.gates)


def circuit_from_lines(text: str, num_qubits: int, num_classical_bits: int | None = None) -> Circuit:
    gates = gates_from_lines(text)
    if num_classical_bits is None:
        num_classical_bits = 1 + max(
            (g.classical_bit for g in gates if g.classical_bit is not None), default=-1
        )
    return Circuit(num_qubits, num_classical_bits, tuple(gates))


# ---------------------------------------------------------------------------
# the encoding ladder and its closed-form conjugation
# ---------------------------------------------------------------------------


def ladder_circuit(m: int) -> Circuit:
    """Per-row encoding unitary on m qubits: CNOT fan-out from qubit 0 to
    each other qubit, then CNOT fan-in from each back onto qubit 0 —
    2(m-1) gates in total. The fan-out half equals the block map
    |0><0| (x) I^(m-1) + |1><1| (x) X^(m-1).
    """
    if m < 2:
        raise UsageError("the ladder needs at least 2 qubits")
    gates = [Gate("CNOT", (0, j)) for j in range(1, m)]
    gates += [Gate("CNOT", (j, 0)) for j in range(1, m)]
    return Circuit(m, 0, tuple(gates))


def ladder_fanout_circuit(m: int) -> Circuit:
    """The fan-out half alone (used by the lemma checks)."""
    if m < 2:
        raise UsageError("the ladder needs at least 2 qubits")
    return Circuit(m, 0, tuple(Gate("CNOT", (0, j)) for j in range(1, m)))


def expected_ladder_pauli(m: int, sigma: str) -> PauliString:
    """Closed form of conjugating sigma (x) I^(m-1) through the ladder.

    With the Hermitian Y convention the Y image carries a real sign,
    (-1)^floor((m-1)/2): phase 0 for m = 1, 2 (mod 4), phase 2 (a minus
    sign) for m = 3, 0 (mod 4). X and Z images are phase-free.

      odd m:   X -> X^m,  Y -> +-Y^m,        Z -> Z^m
      even m:  X -> I (x) X^(m-1),  Y -> +-Z (x) Y^(m-1),  Z -> Z^m
    """
    if m < 1:
        raise UsageError("m must be positive")
    if sigma not in ("I", "X", "Y", "Z"):
        raise UsageError(f"unknown Pauli letter {sigma!r}")
    if sigma == "I":
        return PauliString.identity(m)
    phase = 0
    if sigma == "Y":
        phase = 2 * (((m - 1) // 2) % 2)
    if m % 2 == 1:
        return PauliString.from_letters(sigma * m, phase)
    if sigma == "X":
        return PauliString.from_letters("I" + "X" * (m - 1))
    if sigma == "Y":
        return PauliString.from_letters("Z" + "Y" * (m - 1), phase)
    return PauliString.from_letters("Z" * m)


def magic_state_circuit() -> Circuit:
    """Prepares (|000> + |010> + |100> + |111>)/2 from |000>."""
    return Circuit(
        3,
        0,
        (Gate("H", (0,)), Gate("H", (1,)), Gate("TOFFOLI", (0, 1, 2))),
    )


# ---------------------------------------------------------------------------
# share layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShareLayout:
    """(s+t) x (n+1) qubit grid; rows are logical slots, columns are parties.

    n = 0 (a single column, no co-participants) is admitted as the degenerate
    plaintext layout used by gadget oracle checks; the protocol proper
    requires n >= 1.
    """

    s: int
    t: int
    n: int

    def __post_init__(self) -> None:
        if self.s < 1 or self.t < 0 or self.n < 0:
            raise UsageError("layout needs s >= 1, t >= 0, n >= 0")

    @property
    def rows(self) -> int:
        return self.s + self.t

    @property
    def columns(self) -> int:
        return self.n + 1

    @property
    def num_qubits(self) -> int:
        return self.rows * self.columns

    def index_of(self, x: int, y: int) -> int:
        if not 1 <= x <= self.rows:
            raise UsageError(f"row {x} out of range 1..{self.rows}")
        if not 1 <= y <= self.columns:
            raise UsageError(f"column {y} out of range 1..{self.columns}")
        return (x - 1) * self.columns + (y - 1)

    def row_qubits(self, x: int) -> tuple[int, ...]:
        return tuple(self.index_of(x, y) for y in range(1, self.columns + 1))

    def column_qubits(self, y: int) -> tuple[int, ...]:
        return tuple(self.index_of(x, y) for x in range(1, self.rows + 1))

    def owner(self, y: int) -> str:
        if not 1 <= y <= self.columns:
            raise UsageError(f"column {y} out of range")
        return "alice" if y == 1 else f"p{y - 1}"

    def ancilla_triple_rows(self, triple: int) -> tuple[int, int, int]:
        """Rows of the ``triple``-th (0-based) auxiliary block."""
        if self.t % 3 != 0:
            raise UsageError("ancilla rows do not form triples")
        if not 0 <= triple < self.t // 3:
            raise UsageError(f"no ancilla triple {triple}")
        base = self.s + 3 * triple
        return (base + 1, base + 2, base + 3)


# ---------------------------------------------------------------------------
# transversal expansion of logical gates
# ---------------------------------------------------------------------------

_EVEN_UNSUPPORTED = (
    "no column-local realization of logical {kind} exists when the column "
    "count m = n+1 is even: the encoded X carries identity on the dealer's "
    "column while the encoded Z carries Z there, and per-column operations "
    "preserve 'identity on a column', so the required exchange is impossible"
)


def _column_letters(kind: str, m: int) -> list[str]:
    """Per-column gate kinds realizing a 1-qubit logical Clifford on a row.

    Uniform copies are only correct where the encoded operators make them
    so; the parity-aware table below was fixed against the dense oracle:

      odd m:  H -> H^m; S -> S^m (m=1 mod 4) or Sdg^m (m=3 mod 4, where the
              encoded Y flips sign); Paulis -> uniform copies.
      even m: X -> I (x) X^(m-1), Y -> Z (x) Y^(m-1), Z -> Z^m (the encoded
              operators themselves); H and S have no column-local form.
    """
    if m % 2 == 1:
        if kind == "S" and m % 4 == 3:
            return ["Sdg"] * m
        if kind == "Sdg" and m % 4 == 3:
            return ["S"] * m
        return [kind] * m
    if kind == "X":
        return ["I"] + ["X"] * (m - 1)
    if kind == "Y":
        return ["Z"] + ["Y"] * (m - 1)
    if kind == "Z":
        return ["Z"] * m
    raise UnsupportedGateError(_EVEN_UNSUPPORTED.format(kind=kind))


def transversal_expand(logical_gate: Gate, layout: ShareLayout) -> Circuit:
    """Expand a logical Clifford on rows into column-local share gates.

    Never emits a gate touching two different columns. Logical qubit indices
    are 1-based rows in 1..s.
    """
    kind = logical_gate.kind
    if kind == "TOFFOLI":
        raise UsageError("TOFFOLI is not transversal here; use toffoli_gadget")
    if kind == "MEASURE_Z" or not (kind in CLIFFORD_KINDS or kind == "I"):
        raise UsageError(f"{kind} is not a logical Clifford gate")
    rows = logical_gate.qubits
    for r in rows:
        if not 1 <= r <= layout.s:
            raise UsageError(f"logical row {r} out of range 1..{layout.s}")
    m = layout.columns
    if kind == "I":
        return Circuit(layout.num_qubits, 0, ())
    gates: list[Gate] = []
    if kind in ("CNOT", "CZ"):
        if kind == "CZ" and m % 2 == 0:
            raise UnsupportedGateError(_EVEN_UNSUPPORTED.format(kind=kind))
        r1, r2 = rows
        for y in range(1, m + 1):
            gates.append(Gate(kind, (layout.index_of(r1, y), layout.index_of(r2, y))))
    else:
        (r,) = rows
        for y, col_kind in enumerate(_column_letters(kind, m), start=1):
            if col_kind != "I":
                gates.append(Gate(col_kind, (layout.index_of(r, y),)))
    return Circuit(layout.num_qubits, 0, tuple(gates))


# ---------------------------------------------------------------------------
# the Toffoli gadget
# ---------------------------------------------------------------------------


def _transversal_between_rows(kind: str, layout: ShareLayout, r1: int, r2: int) -> list[Gate]:
    return [
        Gate(kind, (layout.index_of(r1, y), layout.index_of(r2, y)))
        for y in range(1, layout.columns + 1)
    ]


def _row_pauli_gates(kind: str, layout: ShareLayout, row: int, condition: str) -> list[Gate]:
    m = layout.columns
    gates = []
    for y, col_kind in enumerate(_column_letters(kind, m), start=1):
        if col_kind != "I":
            gates.append(Gate(col_kind, (layout.index_of(row, y),), condition=condition))
    return gates


def toffoli_gadget(
    data_rows: tuple[int, int, int],
    ancilla_rows: tuple[int, int, int],
    layout: ShareLayout,
) -> Circuit:
    """Share-level doubly-controlled NOT on logical rows (c1, c2, t) by
    teleporting through an encoded (|000>+|010>+|100>+|111>)/2 triple.

    Only column-local Cliffords, per-qubit Z measurements and broadcast-bit
    conditioned Clifford corrections are emitted:

      1. transversal CNOT a1 -> c1 and a2 -> c2, transversal CNOT t -> a3;
      2. rows c1, c2 measured qubit-wise in Z; row t measured qubit-wise in
         X (per-qubit H then Z); one broadcast bit per qubit, laid out
         row-major (c1's columns, then c2's, then t's);
      3. each logical outcome is the XOR of the row's m broadcast bits;
         corrections: b(c1) -> X(a1), CNOT(a2->a3); b(c2) -> X(a2),
         CNOT(a1->a3); b(t) -> Z(a3), CZ(a1, a2);
      4. ancilla rows are swapped back onto the data rows (three transversal
         CNOTs per pair), leaving the consumed rows in broadcast basis
         states.

    The CZ correction step has no column-local form when m = n+1 is even
    (raises UnsupportedGateError); the plaintext m = 1 and all odd-m cases
    are exact on every measurement branch.
    """
    m = layout.columns
    if m % 2 == 0:
        raise UnsupportedGateError(
            _EVEN_UNSUPPORTED.format(kind="CZ (the gadget's correction step)")
        )
    c1, c2, t = data_rows
    a1, a2, a3 = ancilla_rows
    if len({c1, c2, t, a1, a2, a3}) != 6:
        raise UsageError("data and ancilla rows must be six distinct rows")
    for r in data_rows:
        if not 1 <= r <= layout.s:
            raise UsageError(f"data row {r} out of range 1..{layout.s}")
    for r in ancilla_rows:
        if not layout.s < r <= layout.rows:
            raise UsageError(f"ancilla row {r} out of range {layout.s + 1}..{layout.rows}")

    gates: list[Gate] = []
    gates += _transversal_between_rows("CNOT", layout, a1, c1)
    gates += _transversal_between_rows("CNOT", layout, a2, c2)
    gates += _transversal_between_rows("CNOT", layout, t, a3)
    # X-basis readout of row t: rotate each qubit, then measure everything
    for y in range(1, m + 1):
        gates.append(Gate("H", (layout.index_of(t, y),)))
    bit = 0
    xor_bits: dict[int, list[int]] = {c1: [], c2: [], t: []}
    for row in (c1, c2, t):
        for y in range(1, m + 1):
            gates.append(Gate("MEASURE_Z", (layout.index_of(row, y),), classical_bit=bit))
            xor_bits[row].append(bit)
            bit += 1
    cond = {row: "^".join(f"b{b}" for b in xor_bits[row]) for row in (c1, c2, t)}

    gates += _row_pauli_gates("X", layout, a1, cond[c1])
    for g in _transversal_between_rows("CNOT", layout, a2, a3):
        gates.append(Gate(g.kind, g.qubits, condition=cond[c1]))
    gates += _row_pauli_gates("X", layout, a2, cond[c2])
    for g in _transversal_between_rows("CNOT", layout, a1, a3):
        gates.append(Gate(g.kind, g.qubits, condition=cond[c2]))
    gates += _row_pauli_gates("Z", layout, a3, cond[t])
    for y in range(1, m + 1):
        gates.append(
            Gate("CZ", (layout.index_of(a1, y), layout.index_of(a2, y)), condition=cond[t])
        )
    # swap the teleported rows back onto the data rows
    for anc, dat in ((a1, c1), (a2, c2), (a3, t)):
        gates += _transversal_between_rows("CNOT", layout, anc, dat)
        gates += _transversal_between_rows("CNOT", layout, dat, anc)
        gates += _transversal_between_rows("CNOT", layout, anc, dat)
    return Circuit(layout.num_qubits, 3 * m, tuple(gates))


def column_of(layout: ShareLayout, qubit: int) -> int:
    """1-based column owning a flat qubit index."""
    if not 0 <= qubit < layout.num_qubits:
        raise UsageError(f"qubit {qubit} out of range")
    return qubit % layout.columns + 1


def is_column_local(circuit: Circuit, layout: ShareLayout) -> bool:
    """True iff no gate touches two different columns."""
    for g in circuit.gates:
        cols = {column_of(layout, q) for q in g.qubits}
        if len(cols) > 1:
            return False
    return True

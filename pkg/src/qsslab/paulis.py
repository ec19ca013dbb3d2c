"""Sparse Pauli-basis operator algebra with bit-packed strings.

A Pauli word on N qubits is stored as two N-bit integers (x, z): bit q of x
set means the letter on qubit q has an X component, bit q of z a Z component.
Letter table per qubit:

    (x, z) = (0, 0) -> I     (1, 0) -> X     (1, 1) -> Y     (0, 1) -> Z

Y is the standard Hermitian Pauli, Y = i|1><0| - i|0><1| = i X Z. A string
carries a global phase i^phase (phase mod 4); Hermitian strings have an even
phase. Qubit 0 is the leftmost tensor factor everywhere in this package.

Operators (class:`PauliOperator`) are sparse maps from *phase-free* words to
complex coefficients; the i^phase of a string is folded into its coefficient,
so a Hermitian operator has exactly one real entry per physical Pauli. Terms
may carry *secret tags* - bookkeeping labels tied to the logical expansion
term that spawned them - which every operation preserves and never invents.
Multiplication and gate conjugation run on the packed integers via symplectic
bit arithmetic, so sweeps over hundreds of qubits stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cache, reduce
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping

import numpy as np

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, annotation only
    from .circuits import Gate

from .errors import ResourceError, UsageError

LETTERS = ("I", "X", "Y", "Z")

# Letter <-> (x, z) bit pair. Index order I, X, Y, Z is fixed package-wide.
_BITS_OF = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_LETTER_OF = {v: k for k, v in _BITS_OF.items()}

#: relative pruning tolerance: after branching operations, terms with
#: |coeff| < PRUNE_TOL * max|coeff| are treated as exact-zero cancellations
#: and dropped. Relative, not absolute: a global state on N qubits has
#: coefficients scaled by 2^-N, and an absolute cutoff would silently delete
#: genuine terms once N grows past ~36.
PRUNE_TOL = 1e-12

#: dense materialization refuses above this many qubits unless overridden
DENSE_CAP = 12

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# stacked basis for tensor-network style to/from_dense: _BASIS[l, a, b]
_BASIS = np.stack([_MATS[l] for l in LETTERS])


def _bit(mask: int, q: int) -> int:
    return (mask >> q) & 1


@dataclass(frozen=True)
class PauliString:
    """i^phase times an N-qubit Pauli word, packed as (x, z) bit masks."""

    num_qubits: int
    x: int = 0
    z: int = 0
    phase: int = 0  # exponent of i, mod 4

    def __post_init__(self) -> None:
        if self.num_qubits < 0:
            raise UsageError("negative qubit count")
        mask = (1 << self.num_qubits) - 1
        object.__setattr__(self, "x", self.x & mask)
        object.__setattr__(self, "z", self.z & mask)
        object.__setattr__(self, "phase", self.phase % 4)

    @staticmethod
    def identity(num_qubits: int) -> PauliString:
        return PauliString(num_qubits)

    @staticmethod
    def from_letters(letters: str, phase: int = 0) -> PauliString:
        """Build from a word like ``"XIZY"`` (qubit 0 is the first character)."""
        x = z = 0
        for q, letter in enumerate(letters):
            try:
                xb, zb = _BITS_OF[letter]
            except KeyError:
                raise UsageError(f"unknown Pauli letter {letter!r}") from None
            x |= xb << q
            z |= zb << q
        return PauliString(len(letters), x, z, phase)

    @staticmethod
    def single(num_qubits: int, qubit: int, letter: str, phase: int = 0) -> PauliString:
        if not 0 <= qubit < num_qubits:
            raise UsageError(f"qubit {qubit} out of range for {num_qubits}")
        xb, zb = _BITS_OF[letter]
        return PauliString(num_qubits, xb << qubit, zb << qubit, phase)

    def letter(self, q: int) -> str:
        return _LETTER_OF[(_bit(self.x, q), _bit(self.z, q))]

    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.num_qubits))

    @property
    def key(self) -> tuple[int, int]:
        """Phase-free map key of this word."""
        return (self.x, self.z)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def commutes_with(self, other: PauliString) -> bool:
        self._check_len(other)
        # symplectic form: strings commute iff <a, b> = 0 over GF(2)
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def _check_len(self, other: PauliString) -> None:
        if self.num_qubits != other.num_qubits:
            raise UsageError(
                f"length mismatch: {self.num_qubits} vs {other.num_qubits}"
            )

    def __mul__(self, other: PauliString) -> PauliString:
        """Operator product, with the exact accumulated i^k phase.

        Per qubit, writing a letter as i^(x&z) X^x Z^z, the product picks up
        i^(x1z1 + x2z2 - x3z3) * (-1)^(z1x2) with (x3, z3) = (x1^x2, z1^z2);
        summed over qubits via popcounts.
        """
        self._check_len(other)
        x3 = self.x ^ other.x
        z3 = self.z ^ other.z
        k = (
            (self.x & self.z).bit_count()
            + (other.x & other.z).bit_count()
            - (x3 & z3).bit_count()
            + 2 * (self.z & other.x).bit_count()
        )
        return PauliString(self.num_qubits, x3, z3, (self.phase + other.phase + k) % 4)

    def tensor(self, other: PauliString) -> PauliString:
        return PauliString(
            self.num_qubits + other.num_qubits,
            self.x | (other.x << self.num_qubits),
            self.z | (other.z << self.num_qubits),
            self.phase + other.phase,
        )

    def phase_factor(self) -> complex:
        return 1j ** (self.phase % 4)

    def to_matrix(self) -> np.ndarray:
        if self.num_qubits > DENSE_CAP:
            raise ResourceError(f"dense cap {DENSE_CAP} exceeded")
        mats = [_MATS[self.letter(q)] for q in range(self.num_qubits)]
        out = reduce(np.kron, mats, np.eye(1, dtype=complex))
        return self.phase_factor() * out

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase % 4]
        return f"{sign}{self.letters()}"


Key = tuple[int, int]
TagSet = frozenset[str]


def _letters_of_key(key: Key, num_qubits: int) -> str:
    x, z = key
    return "".join(
        _LETTER_OF[(_bit(x, q), _bit(z, q))] for q in range(num_qubits)
    )


@dataclass(frozen=True)
class PauliOperator:
    """Sparse Hermitian-friendly operator: sum of coeff * phase-free word.

    ``tags`` maps a word key to the set of secret labels whose expansion terms
    contributed to it. Operations union tag sets when terms merge and drop
    them with pruned terms; nothing else touches them.
    """

    num_qubits: int
    terms: Mapping[Key, complex] = field(default_factory=dict)
    tags: Mapping[Key, TagSet] = field(default_factory=dict)

    # -- construction -----------------------------------------------------

    @staticmethod
    def zero(num_qubits: int) -> PauliOperator:
        return PauliOperator(num_qubits, {})

    @staticmethod
    def from_terms(
        num_qubits: int,
        entries: Iterable[tuple[PauliString, complex, str | None]],
    ) -> PauliOperator:
        terms: dict[Key, complex] = {}
        tags: dict[Key, TagSet] = {}
        for ps, coeff, tag in entries:
            if ps.num_qubits != num_qubits:
                raise UsageError("term length mismatch")
            c = coeff * ps.phase_factor()
            terms[ps.key] = terms.get(ps.key, 0j) + c
            if tag is not None:
                tags[ps.key] = tags.get(ps.key, frozenset()) | {tag}
        return PauliOperator(num_qubits, terms, tags)._pruned()

    @staticmethod
    def from_string(ps: PauliString, coeff: complex = 1.0, tag: str | None = None) -> PauliOperator:
        return PauliOperator.from_terms(ps.num_qubits, [(ps, coeff, tag)])

    @staticmethod
    def maximally_mixed(num_qubits: int) -> PauliOperator:
        return PauliOperator(num_qubits, {(0, 0): 2.0 ** -num_qubits})

    # -- inspection --------------------------------------------------------

    def coeff(self, word: str | PauliString) -> complex:
        if isinstance(word, str):
            word = PauliString.from_letters(word)
        return self.terms.get(word.key, 0j) * word.phase_factor().conjugate()

    def tag_of(self, word: str | PauliString) -> TagSet:
        if isinstance(word, str):
            word = PauliString.from_letters(word)
        return self.tags.get(word.key, frozenset())

    def items(self) -> Iterator[tuple[PauliString, complex]]:
        for (x, z), c in self.terms.items():
            yield PauliString(self.num_qubits, x, z), c

    def letters_map(self) -> dict[str, complex]:
        return {
            _letters_of_key(k, self.num_qubits): c for k, c in self.terms.items()
        }

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def trace(self) -> complex:
        return self.terms.get((0, 0), 0j) * 2**self.num_qubits

    @property
    def is_hermitian(self) -> bool:
        return all(abs(c.imag) <= PRUNE_TOL for c in self.terms.values())

    # -- arithmetic --------------------------------------------------------

    def _pruned(self) -> PauliOperator:
        if not self.terms:
            return self
        biggest = max(abs(c) for c in self.terms.values())
        if biggest == 0.0:
            return PauliOperator(self.num_qubits, {}, {})
        tol = PRUNE_TOL * biggest
        terms = {k: c for k, c in self.terms.items() if abs(c) >= tol}
        tags = {k: t for k, t in self.tags.items() if k in terms}
        return PauliOperator(self.num_qubits, terms, tags)

    def scaled(self, factor: complex) -> PauliOperator:
        return PauliOperator(
            self.num_qubits,
            {k: c * factor for k, c in self.terms.items()},
            dict(self.tags),
        )._pruned()

    def add(self, other: PauliOperator) -> PauliOperator:
        if self.num_qubits != other.num_qubits:
            raise UsageError("qubit count mismatch")
        terms = dict(self.terms)
        tags = dict(self.tags)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0j) + c
        for k, t in other.tags.items():
            tags[k] = tags.get(k, frozenset()) | t
        return PauliOperator(self.num_qubits, terms, tags)._pruned()

    def tensor(self, other: PauliOperator) -> PauliOperator:
        shift = self.num_qubits
        terms: dict[Key, complex] = {}
        tags: dict[Key, TagSet] = {}
        for (xa, za), ca in self.terms.items():
            ta = self.tags.get((xa, za))
            for (xb, zb), cb in other.terms.items():
                k = (xa | (xb << shift), za | (zb << shift))
                terms[k] = terms.get(k, 0j) + ca * cb
                tb = other.tags.get((xb, zb))
                merged = (ta or frozenset()) | (tb or frozenset())
                if merged:
                    tags[k] = tags.get(k, frozenset()) | merged
        return PauliOperator(self.num_qubits + other.num_qubits, terms, tags)._pruned()

    # -- Clifford conjugation ---------------------------------------------

    def conjugate_clifford(self, gate: "Gate") -> PauliOperator:
        """Apply U . U^dag for a Clifford gate: a bijective relabeling of
        words with +-1 signs, so the term count, trace and Hermiticity are
        untouched.

        Sign rules are stated on input bits; all were verified against the
        dense 4x4/8x8 conjugation oracle (see tests).
        """
        kind = gate.kind
        qs = gate.qubits
        if kind == "TOFFOLI":
            raise UsageError("TOFFOLI is not Clifford; use conjugate_toffoli")
        if kind not in _CLIFFORD_RULES:
            raise UsageError(f"unsupported Clifford kind {kind!r}")
        for q in qs:
            if not 0 <= q < self.num_qubits:
                raise UsageError(f"qubit {q} out of range")
        rule = _CLIFFORD_RULES[kind]
        terms: dict[Key, complex] = {}
        tags: dict[Key, TagSet] = {}
        for (x, z), c in self.terms.items():
            nx, nz, flip = rule(x, z, qs)
            terms[(nx, nz)] = c if not flip else -c
            if (x, z) in self.tags:
                tags[(nx, nz)] = self.tags[(x, z)]
        return PauliOperator(self.num_qubits, terms, tags)

    def conjugate_circuit(self, gates: Iterable["Gate"]) -> PauliOperator:
        op = self
        for g in gates:
            if g.kind == "TOFFOLI":
                op = op.conjugate_toffoli(g.qubits)
            else:
                op = op.conjugate_clifford(g)
        return op

    # -- Toffoli conjugation ------------------------------------------------

    def conjugate_toffoli(self, qubits: tuple[int, int, int]) -> PauliOperator:
        """Conjugate by the doubly-controlled NOT on (c1, c2, t).

        Non-Clifford: each word maps to a sum of at most 8 words (table
        precomputed once from the dense 8x8 oracle; coefficients are exact
        dyadic rationals). Trace and Hermiticity are preserved; near-zero
        cancellations are pruned.
        """
        c1, c2, t = qubits
        if len({c1, c2, t}) != 3:
            raise UsageError("Toffoli qubits must be distinct")
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise UsageError(f"qubit {q} out of range")
        table = _toffoli_table()
        terms: dict[Key, complex] = {}
        tags: dict[Key, TagSet] = {}
        for (x, z), c in self.terms.items():
            triple = (
                (_bit(x, c1), _bit(z, c1)),
                (_bit(x, c2), _bit(z, c2)),
                (_bit(x, t), _bit(z, t)),
            )
            base_x = x & ~((1 << c1) | (1 << c2) | (1 << t))
            base_z = z & ~((1 << c1) | (1 << c2) | (1 << t))
            tag = self.tags.get((x, z))
            for (b1, b2, b3), w in table[triple]:
                nx = base_x | (b1[0] << c1) | (b2[0] << c2) | (b3[0] << t)
                nz = base_z | (b1[1] << c1) | (b2[1] << c2) | (b3[1] << t)
                terms[(nx, nz)] = terms.get((nx, nz), 0j) + c * w
                if tag:
                    tags[(nx, nz)] = tags.get((nx, nz), frozenset()) | tag
        return PauliOperator(self.num_qubits, terms, tags)._pruned()

    # -- partial trace / measurement ----------------------------------------

    def partial_trace(self, traced: Iterable[int]) -> PauliOperator:
        """Trace out qubits: a term survives iff it is identity on every
        traced qubit (traceless letters kill it), keeping its tags and
        gaining a factor 2^len(traced); remaining qubits keep their order.
        """
        traced_set = set(traced)
        for q in traced_set:
            if not 0 <= q < self.num_qubits:
                raise UsageError(f"qubit {q} out of range")
        kept = [q for q in range(self.num_qubits) if q not in traced_set]
        kill = 0
        for q in traced_set:
            kill |= 1 << q
        factor = 2.0 ** len(traced_set)
        terms: dict[Key, complex] = {}
        tags: dict[Key, TagSet] = {}
        for (x, z), c in self.terms.items():
            if (x | z) & kill:
                continue
            nx = 0
            nz = 0
            for i, q in enumerate(kept):
                nx |= _bit(x, q) << i
                nz |= _bit(z, q) << i
            terms[(nx, nz)] = terms.get((nx, nz), 0j) + c * factor
            if (x, z) in self.tags:
                tags[(nx, nz)] = tags.get((nx, nz), frozenset()) | self.tags[(x, z)]
        return PauliOperator(len(kept), terms, tags)._pruned()

    def reset_to_mixed(self, qubits: Iterable[int]) -> PauliOperator:
        """Replace the marginal on the given qubits by I/2 each, i.e.
        Tr_qs(rho) (x) (I/2)^len(qs) reinserted in place: every term with a
        non-identity letter there is dropped, masks unchanged.

        Used to store measured-out qubits compactly; the measurement outcome
        itself lives in the caller's classical record, so no information is
        lost from the pair (state, record).
        """
        mask = 0
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise UsageError(f"qubit {q} out of range")
            mask |= 1 << q
        terms = {k: c for k, c in self.terms.items() if not ((k[0] | k[1]) & mask)}
        tags = {k: t for k, t in self.tags.items() if k in terms}
        return PauliOperator(self.num_qubits, terms, tags)

    def project_z(self, qubit: int, outcome: int) -> tuple[float, PauliOperator]:
        """Projective Z measurement: returns (tr(Pi_b rho), Pi_b rho Pi_b).

        The returned operator is unnormalized; the caller divides by the
        probability. Words with X/Y on the qubit are annihilated; I/Z words
        split into (word + (-1)^b word*Z_q)/2.
        """
        if not 0 <= qubit < self.num_qubits:
            raise UsageError(f"qubit {qubit} out of range")
        if outcome not in (0, 1):
            raise UsageError("outcome must be 0 or 1")
        sign = -1.0 if outcome else 1.0
        zbit = 1 << qubit
        terms: dict[Key, complex] = {}
        tags: dict[Key, TagSet] = {}

        def _acc(k: Key, c: complex, tag: TagSet | None) -> None:
            terms[k] = terms.get(k, 0j) + c
            if tag:
                tags[k] = tags.get(k, frozenset()) | tag

        for (x, z), c in self.terms.items():
            if x & zbit:  # X or Y on the measured qubit: Pi P Pi = 0
                continue
            tag = self.tags.get((x, z))
            _acc((x, z), c / 2, tag)
            _acc((x, z ^ zbit), sign * c / 2, tag)
        post = PauliOperator(self.num_qubits, terms, tags)._pruned()
        prob = post.trace()
        assert abs(prob.imag) < 1e-9
        return float(prob.real), post

    # -- dense bridge --------------------------------------------------------

    def to_dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        if self.num_qubits > cap:
            raise ResourceError(
                f"to_dense refused: {self.num_qubits} qubits exceeds cap {cap}"
            )
        n = self.num_qubits
        if n == 0:
            return np.array([[sum(self.terms.values(), 0j)]])
        coeffs = np.zeros((4,) * n, dtype=complex)
        for (x, z), c in self.terms.items():
            idx = tuple(
                {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1) : 3}[(_bit(x, q), _bit(z, q))]
                for q in range(n)
            )
            coeffs[idx] = c
        out = coeffs
        # contract letter axes front-to-back; each step appends (row, col)
        for _ in range(n):
            out = np.tensordot(out, _BASIS, axes=([0], [0]))
        # axes now (r0, c0, r1, c1, ...) -> (r..., c...)
        perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
        return out.transpose(perm).reshape(2**n, 2**n)

    @staticmethod
    def from_dense(rho: np.ndarray, cap: int = DENSE_CAP) -> PauliOperator:
        """Expansion with coefficient 2^-N tr(P rho) per word P."""
        dim = rho.shape[0]
        n = int(dim).bit_length() - 1
        if rho.shape != (dim, dim) or 2**n != dim:
            raise UsageError("density matrix shape must be (2^N, 2^N)")
        if n > cap:
            raise ResourceError(f"from_dense refused: {n} qubits exceeds cap {cap}")
        t = np.ascontiguousarray(rho.T).reshape((2,) * (2 * n))
        # interleave to (r0, c0, r1, c1, ...)
        perm: list[int] = []
        for q in range(n):
            perm += [q, n + q]
        t = t.transpose(perm)
        for _ in range(n):
            # contract leading (row, col) pair with the basis stack
            t = np.tensordot(t, _BASIS, axes=([0, 1], [1, 2]))
        t = t / 2**n
        terms: dict[Key, complex] = {}
        flat = t.reshape(-1)
        peak = float(np.max(np.abs(flat))) if flat.size else 0.0
        tol = PRUNE_TOL * peak
        for flat_idx, c in enumerate(flat):
            if abs(c) <= tol:
                continue
            x = z = 0
            rem = flat_idx
            # axis order after the loop is qubit 0 first
            for q in range(n):
                letter = (rem // 4 ** (n - 1 - q)) % 4
                xb, zb = _BITS_OF[LETTERS[letter]]
                x |= xb << q
                z |= zb << q
            terms[(x, z)] = complex(c)
        return PauliOperator(n, terms)


# ---------------------------------------------------------------------------
# Clifford conjugation rules on packed bits. Each returns (x', z', sign_flip).
# ---------------------------------------------------------------------------


def _rule_h(x: int, z: int, qs: tuple[int, ...]) -> tuple[int, int, bool]:
    (q,) = qs
    b = 1 << q
    xb, zb = x & b, z & b
    nx = (x & ~b) | (zb and b)
    nz = (z & ~b) | (xb and b)
    return nx, nz, bool(xb and zb)  # Y -> -Y


def _rule_s(x: int, z: int, qs: tuple[int, ...]) -> tuple[int, int, bool]:
    (q,) = qs
    b = 1 << q
    return x, z ^ (x & b), bool(x & z & b)  # Y -> -X


def _rule_sdg(x: int, z: int, qs: tuple[int, ...]) -> tuple[int, int, bool]:
    (q,) = qs
    b = 1 << q
    return x, z ^ (x & b), bool(x & ~z & b)  # X -> -Y


def _rule_x(x: int, z: int, qs: tuple[int, ...]) -> tuple[int, int, bool]:
    (q,) = qs
    return x, z, bool(z & (1 << q))


def _rule_y(x: int, z: int, qs: tuple[int, ...]) -> tuple[int, int, bool]:
    (q,) = qs
    return x, z, bool((x ^ z) & (1 << q))


def _rule_z(x: int, z: int, qs: tuple[int, ...]) -> tuple[int, int, bool]:
    (q,) = qs
    return x, z, bool(x & (1 << q))


def _rule_cnot(x: int, z: int, qs: tuple[int, ...]) -> tuple[int, int, bool]:
    c, t = qs
    cb, tb = 1 << c, 1 << t
    xc, zc = _bit(x, c), _bit(z, c)
    xt, zt = _bit(x, t), _bit(z, t)
    nx = x ^ (tb if xc else 0)
    nz = z ^ (cb if zt else 0)
    flip = bool(xc and zt and not (xt ^ zc))  # X(x)Z / Y(x)Y pick up -1
    return nx, nz, flip


def _rule_cz(x: int, z: int, qs: tuple[int, ...]) -> tuple[int, int, bool]:
    a, b = qs
    ab, bb = 1 << a, 1 << b
    xa, za = _bit(x, a), _bit(z, a)
    xb, zb = _bit(x, b), _bit(z, b)
    nz = z ^ (ab if xb else 0) ^ (bb if xa else 0)
    flip = bool(xa and xb and (za ^ zb))
    return x, nz, flip


_CLIFFORD_RULES = {
    "H": _rule_h,
    "S": _rule_s,
    "Sdg": _rule_sdg,
    "X": _rule_x,
    "Y": _rule_y,
    "Z": _rule_z,
    "CNOT": _rule_cnot,
    "CZ": _rule_cz,
}

SINGLE_QUBIT_CLIFFORDS = ("H", "S", "Sdg", "X", "Y", "Z")
TWO_QUBIT_CLIFFORDS = ("CNOT", "CZ")


@cache
def _toffoli_table() -> dict[tuple, tuple]:
    """Map each 3-qubit letter triple to its conjugated Pauli expansion.

    Built once from the dense 8x8 matrix; the doubly-controlled NOT is real
    orthogonal, so Hermitian words map to real combinations.
    """
    tof = np.eye(8, dtype=complex)
    tof[6, 6] = tof[7, 7] = 0.0
    tof[6, 7] = tof[7, 6] = 1.0
    pairs = [(0, 0), (1, 0), (1, 1), (0, 1)]  # I, X, Y, Z
    table: dict[tuple, tuple] = {}
    for i1, p1 in enumerate(pairs):
        for i2, p2 in enumerate(pairs):
            for i3, p3 in enumerate(pairs):
                mat = reduce(
                    np.kron,
                    (_MATS[LETTERS[i1]], _MATS[LETTERS[i2]], _MATS[LETTERS[i3]]),
                )
                conj = tof @ mat @ tof
                entries = []
                for j1, q1 in enumerate(pairs):
                    for j2, q2 in enumerate(pairs):
                        for j3, q3 in enumerate(pairs):
                            basis = reduce(
                                np.kron,
                                (
                                    _MATS[LETTERS[j1]],
                                    _MATS[LETTERS[j2]],
                                    _MATS[LETTERS[j3]],
                                ),
                            )
                            w = np.trace(basis @ conj) / 8
                            if abs(w) > 1e-13:
                                entries.append(((q1, q2, q3), complex(w)))
                assert 1 <= len(entries) <= 8
                table[(p1, p2, p3)] = tuple(entries)
    return table

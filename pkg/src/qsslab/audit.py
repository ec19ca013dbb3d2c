"""Adversary analysis on the dealt and evaluated states.

The central trick is symbolic: deal() tags every Pauli term of the secret's
expansion with its letter word, partial traces preserve tags, so counting
surviving tagged terms in a coalition's reduced state answers "does the view
depend on the secret?" for all secrets at once. One generic secret whose
expansion touches every word covers the whole argument; dense trace
distances between concrete secret pairs cross-check the conclusion at small
sizes.

Coalitions containing the dealer but missing at least one participant are
the ones the security argument covers; anything else is measured and
reported descriptively, never presumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import ShareLayout
from .errors import ResourceError, UsageError
from .paulis import DENSE_CAP, PauliOperator, PauliString
from .protocol import (
    AnnouncementReport,
    SchemeParams,
    SharedState,
    Transcript,
    canonical_secret_family,
    deal,
)

AUDIT_TOLERANCE = 1e-10

# per-qubit factor (I + 0.30 X + 0.24 Y + 0.18 Z)/2 of the generic audit
# secret: positive (Bloch norm < 1), trace 1, and every product word in the
# s-qubit expansion gets a nonzero coefficient
_GENERIC_WEIGHTS = {"I": 0.5, "X": 0.15, "Y": 0.12, "Z": 0.09}


def generic_tagged_secret(s: int) -> PauliOperator:
    """Full-support product secret; deal() stamps each word with its tag."""
    entries = []
    for word in itertools.product("IXYZ", repeat=s):
        coeff = 1.0
        for letter in word:
            coeff *= _GENERIC_WEIGHTS[letter]
        entries.append((PauliString.from_letters("".join(word)), coeff, None))
    return PauliOperator.from_terms(s, entries)


# ---------------------------------------------------------------------------
# coalitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Coalition:
    """A subset of {alice, p1..pn}; everyone else is honest."""

    n: int
    members: frozenset[str]

    def __post_init__(self) -> None:
        valid = {"alice"} | {f"p{i}" for i in range(1, self.n + 1)}
        bad = self.members - valid
        if bad:
            raise UsageError(f"unknown parties {sorted(bad)} for n={self.n}")
        if not self.members:
            raise UsageError("coalition cannot be empty")

    @classmethod
    def parse(cls, spec: str, n: int) -> Coalition:
        """From a comma list like "alice,1,2" or "alice,p1,p2"."""
        members = set()
        for token in spec.split(","):
            token = token.strip().lower()
            if not token:
                continue
            if token == "alice":
                members.add("alice")
            elif token.startswith("p") and token[1:].isdigit():
                members.add(token)
            elif token.isdigit():
                members.add(f"p{int(token)}")
            else:
                raise UsageError(f"cannot read coalition member {token!r}")
        return cls(n, frozenset(members))

    @classmethod
    def of_columns(cls, n: int, columns: Sequence[int]) -> Coalition:
        names = {"alice" if c == 1 else f"p{c - 1}" for c in columns}
        return cls(n, frozenset(names))

    @property
    def includes_alice(self) -> bool:
        return "alice" in self.members

    @property
    def honest(self) -> frozenset[str]:
        everyone = {"alice"} | {f"p{i}" for i in range(1, self.n + 1)}
        return frozenset(everyone - self.members)

    @property
    def is_full(self) -> bool:
        return not self.honest

    @property
    def covered_by_security_argument(self) -> bool:
        """True when the dealer is in and >= 1 participant is honest."""
        return self.includes_alice and any(h != "alice" for h in self.honest)

    def columns(self) -> tuple[int, ...]:
        cols = []
        for name in self.members:
            cols.append(1 if name == "alice" else int(name[1:]) + 1)
        return tuple(sorted(cols))

    def label(self) -> str:
        ordered = sorted(self.members, key=lambda p: -1 if p == "alice" else int(p[1:]))
        return ",".join(ordered)


def adversary_view(shared: SharedState, coalition: Coalition) -> PauliOperator:
    """The coalition's reduced state: everything the honest parties hold is
    traced out; secret tags survive on the remaining terms. Kept qubits stay
    in row-major order restricted to the coalition's columns."""
    layout = shared.layout
    if coalition.n != layout.n:
        raise UsageError("coalition does not match the layout")
    keep_cols = set(coalition.columns())
    traced = [
        q
        for y in range(1, layout.columns + 1)
        if y not in keep_cols
        for q in layout.column_qubits(y)
    ]
    return shared.state.partial_trace(traced)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _regime(n: int) -> str:
    return "odd" if (n + 1) % 2 == 1 else "even"


@dataclass(frozen=True)
class AuditReport:
    params: SchemeParams
    coalition: Coalition
    regime: str
    tagged_residuals: int
    max_trace_distance: float
    verdict: str
    notes: tuple[str, ...]
    tolerance: float = AUDIT_TOLERANCE

    def as_dict(self) -> dict:
        return {
            "params": {
                "n": self.params.n,
                "s": self.params.s,
                "t": self.params.t,
                "strict": self.params.strict_mode,
            },
            "coalition": self.coalition.label(),
            "regime": self.regime,
            "tagged_residuals": self.tagged_residuals,
            "max_trace_distance": self.max_trace_distance,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def _count_tagged(view: PauliOperator, s: int) -> int:
    """Terms whose tag set names any non-identity secret word."""
    identity = "I" * s
    count = 0
    for key, tags in view.tags.items():
        if key in view.terms and any(t != identity for t in tags):
            count += 1
    return count


def secret_independence_check(
    params: SchemeParams,
    coalition: Coalition,
    tolerance: float = AUDIT_TOLERANCE,
) -> AuditReport:
    """Deal a fully tagged generic secret and count the secret-tagged terms
    surviving in the coalition's view; zero means the view is one fixed
    operator whatever the secret was.

    A full coalition is rejected (it reconstructs by design). Coalitions the
    security argument does not cover (dealer absent, or no honest
    participant left) are still measured, with a note instead of an
    expectation. Small views get a dense cross-check: the trace distance
    between views of two concrete secrets.
    """
    if coalition.is_full:
        raise UsageError(
            "a full coalition holds every share and trivially reconstructs; "
            "independence is only meaningful with at least one honest party"
        )
    notes = []
    if not coalition.covered_by_security_argument:
        notes.append(
            "coalition leaves no honest participant besides the dealer side; "
            "residuals are reported descriptively, without a pass/fail claim "
            "from the security argument"
        )
    shared = deal(params, generic_tagged_secret(params.s))
    view = adversary_view(shared, coalition)
    residuals = _count_tagged(view, params.s)

    max_td = 0.0
    view_qubits = view.num_qubits
    if view_qubits <= 8:
        family = canonical_secret_family(params.s)
        views = [
            adversary_view(deal(params, op), coalition) for _, op in family
        ]
        for i in range(len(views)):
            for j in range(i + 1, len(views)):
                diff = views[i].add(views[j].scaled(-1.0))
                if diff.num_terms == 0:
                    continue
                eigs = np.linalg.eigvalsh(diff.to_dense())
                max_td = max(max_td, 0.5 * float(np.abs(eigs).sum()))
        notes.append(
            f"dense cross-check over {len(views)} concrete secrets "
            f"({view_qubits} view qubits)"
        )
    else:
        notes.append(
            f"dense cross-check skipped: {view_qubits} view qubits exceed the "
            "8-qubit audit threshold; the symbolic count is the authority"
        )
    verdict = "pass" if residuals == 0 and max_td <= tolerance else "fail"
    return AuditReport(
        params=params,
        coalition=coalition,
        regime=_regime(params.n),
        tagged_residuals=residuals,
        max_trace_distance=max_td,
        verdict=verdict,
        notes=tuple(notes),
        tolerance=tolerance,
    )


def distinguishability(
    params: SchemeParams,
    coalition: Coalition,
    secret_a: object,
    secret_b: object,
) -> float:
    """Trace distance between the coalition's views of the two secrets."""
    layout = params.layout()
    view_qubits = layout.rows * len(coalition.columns())
    if view_qubits > DENSE_CAP:
        raise ResourceError(
            f"coalition view spans {view_qubits} qubits, above the dense cap "
            f"{DENSE_CAP}; use secret_independence_check's symbolic count instead"
        )
    view_a = adversary_view(deal(params, secret_a), coalition)
    view_b = adversary_view(deal(params, secret_b), coalition)
    diff = view_a.add(view_b.scaled(-1.0))
    if diff.num_terms == 0:
        return 0.0
    eigs = np.linalg.eigvalsh(diff.to_dense())
    return 0.5 * float(np.abs(eigs).sum())


# ---------------------------------------------------------------------------
# parity regimes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParityRegimeReport:
    params: SchemeParams
    coalition: Coalition
    regime: str
    surviving_patterns: tuple[str, ...]
    expected_patterns: tuple[str, ...] | None
    verdict: str
    notes: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "params": {"n": self.params.n, "s": self.params.s, "t": self.params.t},
            "coalition": self.coalition.label(),
            "regime": self.regime,
            "surviving_patterns": list(self.surviving_patterns),
            "expected_patterns": (
                None if self.expected_patterns is None else list(self.expected_patterns)
            ),
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def _data_row_patterns(
    view: PauliOperator, layout: ShareLayout, columns: Sequence[int]
) -> tuple[str, ...]:
    """Distinct secret-row letter patterns among the view's terms.

    The view's qubits are row-major over the kept columns; the pattern of a
    term is its restriction to the first s rows, written row by row.
    """
    width = len(columns)
    patterns = set()
    for ps, _ in view.items():
        letters = ps.letters()
        patterns.add(letters[: layout.s * width])
    return tuple(sorted(patterns))


def parity_regime_check(
    params: SchemeParams, coalition: Coalition
) -> ParityRegimeReport:
    """Compare the view's surviving secret-row structure to the closed form.

    For covered coalitions the only surviving secret-row pattern is all-I —
    the odd case's (I^s)^(coalition columns) directly, and the even case's
    theta (x) (I^s)^(columns-1) with theta collapsed to I^s, since every
    non-identity row letter puts a non-identity letter on the honest
    participant's column. The even-case shape bound (identity off the
    dealer's column, {I, Z} on it) is asserted on every survivor. Uncovered
    coalitions get their patterns listed with no expectation.
    """
    if coalition.is_full:
        raise UsageError("parity regimes concern proper coalitions only")
    shared = deal(params, generic_tagged_secret(params.s))
    view = adversary_view(shared, coalition)
    layout = params.layout()
    columns = coalition.columns()
    patterns = _data_row_patterns(view, layout, columns)
    regime = _regime(params.n)
    notes = []

    if not coalition.covered_by_security_argument:
        notes.append(
            "uncovered coalition: surviving patterns listed descriptively"
        )
        return ParityRegimeReport(
            params, coalition, regime, patterns, None, "info", tuple(notes)
        )

    expected = ("I" * (layout.s * len(columns)),)
    ok = patterns == expected
    if regime == "even" and 1 in columns:
        alice_pos = columns.index(1)
        width = len(columns)
        for pat in patterns:
            for x in range(layout.s):
                row = pat[x * width : (x + 1) * width]
                for i, letter in enumerate(row):
                    if i == alice_pos:
                        if letter not in "IZ":
                            ok = False
                            notes.append(f"dealer-column letter {letter} outside {{I,Z}}")
                    elif letter != "I":
                        ok = False
                        notes.append("non-identity letter off the dealer's column")
    return ParityRegimeReport(
        params,
        coalition,
        regime,
        patterns,
        expected,
        "pass" if ok else "fail",
        tuple(notes),
    )


# ---------------------------------------------------------------------------
# post-evaluation structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HonestViewReport:
    honest: str
    branches_checked: int
    max_mixedness_deviation: float
    max_bit_half_deviation: float | None
    verdict: str
    notes: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "honest": self.honest,
            "branches_checked": self.branches_checked,
            "max_mixedness_deviation": self.max_mixedness_deviation,
            "max_bit_half_deviation": self.max_bit_half_deviation,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def eq16_form_check(
    branches: Sequence[SharedState],
    honest_participant: int | str,
    transcript: Transcript | None = None,
    announcement: AnnouncementReport | None = None,
    tolerance: float = AUDIT_TOLERANCE,
) -> HonestViewReport:
    """Testable consequences of the post-evaluation form: in every branch
    the honest participant's unmeasured qubits are maximally mixed, and the
    broadcast bits are uniform (checked from the transcript, or from a
    richer announcement report when provided).
    """
    if not branches:
        raise UsageError("no branches to check")
    layout = branches[0].layout
    if isinstance(honest_participant, str):
        name = honest_participant.lower()
        if not (name.startswith("p") and name[1:].isdigit()):
            raise UsageError("honest party must be a participant, e.g. 'p2'")
        y = int(name[1:]) + 1
    else:
        y = honest_participant + 1
    if not 2 <= y <= layout.columns:
        raise UsageError("honest participant out of range")

    worst = 0.0
    for br in branches:
        dead_rows = set()
        for triple in br.consumed_ancillas:
            dead_rows.update(br.layout.ancilla_triple_rows(triple))
        live = [
            br.layout.index_of(x, y)
            for x in range(1, br.layout.rows + 1)
            if x not in dead_rows
        ]
        reduced = br.state.partial_trace(
            [q for q in range(br.layout.num_qubits) if q not in live]
        )
        expected = 2.0 ** -len(live)
        for ps, c in reduced.items():
            if ps.weight == 0:
                worst = max(worst, abs(c - expected))
            else:
                worst = max(worst, abs(c))

    notes = []
    bit_dev: float | None = None
    if announcement is not None and not announcement.empty:
        bit_dev = announcement.max_half_deviation
    elif transcript is not None and transcript.bit_origins:
        bit_dev = max(
            abs(transcript.marginal(o.slot) - 0.5) for o in transcript.bit_origins
        )
    else:
        notes.append("no announcements: bit uniformity vacuously satisfied")

    ok = worst <= tolerance and (bit_dev is None or bit_dev <= tolerance)
    return HonestViewReport(
        honest=f"p{y - 1}",
        branches_checked=len(branches),
        max_mixedness_deviation=worst,
        max_bit_half_deviation=bit_dev,
        verdict="pass" if ok else "fail",
        notes=tuple(notes),
    )


def covered_coalitions(n: int) -> list[Coalition]:
    """All coalitions of the dealer plus n-1 participants."""
    out = []
    for missing in range(1, n + 1):
        members = {"alice"} | {f"p{i}" for i in range(1, n + 1) if i != missing}
        out.append(Coalition(n, frozenset(members)))
    return out

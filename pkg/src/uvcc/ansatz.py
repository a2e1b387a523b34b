"""UVCC excitation terms and assembly of the Trotterized state-preparation circuit."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .circuit import Circuit, X, compose
from .encoding import ModalState, ModeSpec, QubitLayout, qubit_count


class InvalidTerm(ValueError):
    pass


@dataclass(frozen=True)
class ExcitationTerm:
    """Product of single-mode transitions ``from_level -> to_level``, with angle ``theta``."""

    entries: tuple[tuple[int, int, int], ...]
    theta: float = 0.0

    def __post_init__(self):
        entries = tuple(sorted(tuple(int(v) for v in e) for e in self.entries))
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise InvalidTerm("a term needs at least one entry")
        modes = [e[0] for e in entries]
        if len(set(modes)) != len(modes):
            raise InvalidTerm(f"mode repeated in {entries}")
        for mode, lo, hi in entries:
            if lo == hi:
                raise InvalidTerm(f"mode {mode}: from_level equals to_level ({lo})")

    @property
    def order(self) -> int:
        return len(self.entries)

    def with_theta(self, theta: float) -> "ExcitationTerm":
        return ExcitationTerm(self.entries, float(theta))

    def validate(self, spec: ModeSpec) -> None:
        for mode, lo, hi in self.entries:
            if not 0 <= mode < len(spec):
                raise InvalidTerm(f"mode {mode} outside 0..{len(spec) - 1}")
            d = spec.levels[mode]
            if not (0 <= lo < d and 0 <= hi < d):
                raise InvalidTerm(f"mode {mode}: levels {lo}->{hi} outside 0..{d - 1}")

    @classmethod
    def from_target(cls, reference: Sequence[int], target: Sequence[int], theta: float = 0.0) -> "ExcitationTerm":
        entries = [(i, r, t) for i, (r, t) in enumerate(zip(reference, target)) if r != t]
        if not entries:
            raise InvalidTerm("target equals the reference")
        return cls(tuple(entries), theta)

    def target(self, reference: Sequence[int]) -> tuple[int, ...]:
        occ = list(reference)
        for mode, _, hi in self.entries:
            occ[mode] = hi
        return tuple(occ)


def term_qubits(term: ExcitationTerm, layout: QubitLayout) -> list[tuple[int, int]]:
    """``(g_qubit, e_qubit)`` per entry, in mode order; pair 0 carries the rotated qubit."""
    pairs = []
    for mode, lo, hi in term.entries:
        if mode >= len(layout.levels):
            raise InvalidTerm(f"mode {mode} not in layout")
        pairs.append((layout.qubit(mode, lo), layout.qubit(mode, hi)))
    flat = [q for p in pairs for q in p]
    if len(set(flat)) != len(flat):
        raise InvalidTerm(f"overlapping qubits {pairs}")
    return pairs


def enumerate_reference_excitations(spec: ModeSpec, max_order: int) -> list[ExcitationTerm]:
    """Every ground-state excitation touching 1..max_order modes.

    Ordered by descending order, then ascending target occupation.
    """
    if not 1 <= max_order <= len(spec):
        raise ValueError(f"max_order must be in 1..{len(spec)}")
    ground = (0,) * len(spec)
    targets = [occ for occ in itertools.product(*(range(d) for d in spec.levels))
               if 1 <= sum(n != 0 for n in occ) <= max_order]
    targets.sort(key=lambda occ: (-sum(n != 0 for n in occ), occ))
    return [ExcitationTerm.from_target(ground, occ) for occ in targets]


@dataclass(frozen=True)
class AnsatzSpec:
    spec: ModeSpec
    reference: ModalState
    terms: tuple[ExcitationTerm, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.reference, ModalState):
            object.__setattr__(self, "reference", ModalState(self.reference))
        object.__setattr__(self, "terms", tuple(self.terms))
        self.reference.validate(self.spec)
        for t in self.terms:
            t.validate(self.spec)
            for mode, lo, _ in t.entries:
                if self.reference.occupation[mode] != lo:
                    raise InvalidTerm(
                        f"term {t.entries} excites mode {mode} from level {lo}, "
                        f"reference has {self.reference.occupation[mode]}")

    @property
    def layout(self) -> QubitLayout:
        return QubitLayout.of(self.spec)

    def with_angles(self, angles: Iterable[float]) -> "AnsatzSpec":
        angles = list(angles)
        if len(angles) != len(self.terms):
            raise ValueError(f"{len(angles)} angles for {len(self.terms)} terms")
        return AnsatzSpec(self.spec, self.reference, tuple(t.with_theta(a) for t, a in zip(self.terms, angles)))


def reference_circuit(a: AnsatzSpec) -> Circuit:
    layout = a.layout
    gates = [X(layout.qubit(i, n)) for i, n in enumerate(a.reference.occupation)]
    return Circuit(qubit_count(a.spec), tuple(gates))


def build_ansatz(a: AnsatzSpec, method="redundant", mcr=None, *, lower: bool = False) -> Circuit:
    """Reference preparation followed by each term's lowering, first term first.

    With ``lower=False`` the result is composite tier; ``lower=True`` expands
    composite gates with the ``mcr`` scheme (ancillas appended after the data
    register).
    """
    from . import lowering

    method = lowering.LoweringMethod.parse(method)
    circ = reference_circuit(a)
    layout = a.layout
    for t in a.terms:
        pairs = term_qubits(t, layout)
        circ = compose(circ, lowering.lower_term(pairs, t.theta, circ.width, method))
    if lower:
        circ = lowering.lower_circuit(circ, mcr)
    return circ


def compile_ansatz(a: AnsatzSpec, method="redundant", mcr=None, *, prune: bool = True) -> Circuit:
    """Primitive circuit ready for export or simulation.

    Known-state pruning runs on the composite circuit and again after
    lowering; a peephole pass finishes.  Pruning assumes the all-zeros input.
    """
    from . import lowering
    from .circuit import peephole_cancel

    c = build_ansatz(a, method)
    if prune:
        c = lowering.prune_known_controls(c)
    # fusion is left to the peephole pass so cancellations get the first chance
    c = lowering.lower_circuit(c, mcr, fuse=False)
    if prune:
        c = lowering.prune_known_controls(c)
    return peephole_cancel(c)

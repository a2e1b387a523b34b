"""Direct (unary) encoding of vibrational modes into qubits.

Each mode with ``d`` harmonic-oscillator levels owns a contiguous block of
``d`` qubits; level ``n`` is represented by the ``n``-th qubit of the block in
state |1> and all others in |0>.  Blocks are laid out in mode order, so level
``l`` of mode ``i`` lives on global qubit ``offset_i + l``.

Bitstrings are rendered with qubit 0 as the leftmost character.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence


class InvalidState(ValueError):
    """Occupation outside the levels a mode provides."""


class LengthMismatch(ValueError):
    """Bitstring length differs from the register size."""


@dataclass(frozen=True)
class ModeSpec:
    """Ordered vibrational modes as ``(label, levels)`` pairs."""

    modes: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if len(self.modes) < 1:
            raise ValueError("at least one mode is required")
        for label, d in self.modes:
            if not isinstance(d, int) or d < 2:
                raise ValueError(f"mode {label!r}: levels must be an integer >= 2, got {d!r}")

    @classmethod
    def from_levels(cls, levels: Iterable[int], labels: Sequence[str] | None = None) -> "ModeSpec":
        levels = list(levels)
        if labels is None:
            labels = [f"M{i}" for i in range(len(levels))]
        if len(labels) != len(levels):
            raise ValueError("labels and levels differ in length")
        return cls(tuple((str(lab), int(d)) for lab, d in zip(labels, levels)))

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.modes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.modes)

    def __len__(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class ModalState:
    """Occupation number per mode, in mode order."""

    occupation: tuple[int, ...]

    def __init__(self, occupation: Iterable[int]):
        object.__setattr__(self, "occupation", tuple(int(n) for n in occupation))

    def validate(self, spec: ModeSpec) -> None:
        if len(self.occupation) != len(spec):
            raise InvalidState(f"expected {len(spec)} occupations, got {len(self.occupation)}")
        for i, (n, d) in enumerate(zip(self.occupation, spec.levels)):
            if not 0 <= n < d:
                raise InvalidState(f"mode {i}: level {n} outside 0..{d - 1}")

    def __iter__(self):
        return iter(self.occupation)

    def __len__(self) -> int:
        return len(self.occupation)


@dataclass(frozen=True)
class QubitLayout:
    """Starting global qubit of each mode block."""

    mode_offsets: tuple[int, ...]
    levels: tuple[int, ...]

    @classmethod
    def of(cls, spec: ModeSpec) -> "QubitLayout":
        offsets = tuple(itertools.accumulate(spec.levels, initial=0))[:-1]
        return cls(offsets, spec.levels)

    def qubit(self, mode: int, level: int) -> int:
        if not 0 <= level < self.levels[mode]:
            raise InvalidState(f"mode {mode}: level {level} outside 0..{self.levels[mode] - 1}")
        return self.mode_offsets[mode] + level

    @property
    def width(self) -> int:
        return sum(self.levels)


def qubit_count(spec: ModeSpec) -> int:
    return sum(spec.levels)


def encode_unary(state: ModalState | Sequence[int], spec: ModeSpec) -> str:
    if not isinstance(state, ModalState):
        state = ModalState(state)
    state.validate(spec)
    chunks = []
    for n, d in zip(state.occupation, spec.levels):
        chunks.append("".join("1" if level == n else "0" for level in range(d)))
    return "".join(chunks)


def decode_unary(bits: str, spec: ModeSpec) -> ModalState | None:
    """Inverse of :func:`encode_unary`; ``None`` when some block is not one-hot."""
    if len(bits) != qubit_count(spec):
        raise LengthMismatch(f"expected {qubit_count(spec)} bits, got {len(bits)}")
    layout = QubitLayout.of(spec)
    occupation = []
    for off, d in zip(layout.mode_offsets, spec.levels):
        block = bits[off:off + d]
        if block.count("1") != 1 or block.count("0") != d - 1:
            return None
        occupation.append(block.index("1"))
    return ModalState(occupation)


def enumerate_physical(spec: ModeSpec) -> list[str]:
    """All one-hot bitstrings, lexicographic in the occupation tuple."""
    return [encode_unary(occ, spec) for occ in itertools.product(*(range(d) for d in spec.levels))]


def physical_fraction(spec: ModeSpec) -> float:
    return math.prod(spec.levels) / 2 ** qubit_count(spec)


def format_ket(state: ModalState | Sequence[int], reverse: bool = True) -> str:
    """Render an occupation as a ket.

    The default writes the last mode first (``|n_{M-1},...,n_0>``), so for
    levels ``(2, 2, 4)`` the occupation ``(1, 1, 3)`` reads ``|3,1,1>``.
    """
    occ = list(state.occupation if isinstance(state, ModalState) else state)
    if reverse:
        occ = occ[::-1]
    return "|" + ",".join(str(n) for n in occ) + ">"


def parse_ket(text: str, reverse: bool = True) -> ModalState:
    """Inverse of :func:`format_ket`. Accepts ``|3,1,1>`` and ``|101>``."""
    body = text.strip().lstrip("|").rstrip(">").rstrip("⟩")
    parts = body.split(",") if "," in body else list(body)
    occ = [int(p) for p in parts]
    if reverse:
        occ = occ[::-1]
    return ModalState(occ)

"""Two-tier gate IR.

Primitive gates: ``x h s sdg t tdg ry rz cx``.
Composite gates: ``mcry`` (multi-controlled RY), ``tof``, ``rtof`` / ``rtofdg``
(relative-phase Toffoli and its inverse) and ``mcx``.

Gate lists are in application order: index 0 acts first.  Controls carry a
polarity so negated controls do not need explicit X conjugation until they
are lowered.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Iterable, NamedTuple, Sequence

PRIMITIVE = frozenset({"x", "h", "s", "sdg", "t", "tdg", "ry", "rz", "cx"})
COMPOSITE = frozenset({"mcry", "tof", "rtof", "rtofdg", "mcx"})
ROTATIONS = frozenset({"ry", "rz", "mcry"})
SINGLE_QUBIT = frozenset({"x", "h", "s", "sdg", "t", "tdg", "ry", "rz"})
DIAGONAL_1Q = frozenset({"s", "sdg", "t", "tdg", "rz"})

_INVERSE_NAME = {
    "x": "x", "h": "h", "cx": "cx", "tof": "tof", "mcx": "mcx",
    "s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t",
    "rtof": "rtofdg", "rtofdg": "rtof",
    "ry": "ry", "rz": "rz", "mcry": "mcry",
}

ANGLE_ATOL = 1e-12


class TierViolation(ValueError):
    """A composite gate reached an operation that needs primitive gates."""


class WidthMismatch(ValueError):
    pass


class Control(NamedTuple):
    qubit: int
    on_one: bool = True


@dataclass(frozen=True)
class Gate:
    name: str
    target: int
    controls: tuple[Control, ...] = ()
    theta: float | None = None

    def __post_init__(self):
        if self.name not in PRIMITIVE and self.name not in COMPOSITE:
            raise ValueError(f"unknown gate {self.name!r}")
        ctrls = tuple(c if isinstance(c, Control) else Control(*c) for c in self.controls)
        object.__setattr__(self, "controls", ctrls)
        qs = [c.qubit for c in ctrls] + [self.target]
        if len(set(qs)) != len(qs):
            raise ValueError(f"{self.name}: repeated qubit in {qs}")
        if self.name in ROTATIONS:
            if self.theta is None or not math.isfinite(self.theta):
                raise ValueError(f"{self.name}: finite angle required")
        if self.name in SINGLE_QUBIT and ctrls:
            raise ValueError(f"{self.name} takes no controls")
        if self.name == "cx" and (len(ctrls) != 1 or not ctrls[0].on_one):
            raise ValueError("cx needs exactly one fires-on-one control")
        if self.name in ("tof", "rtof", "rtofdg") and len(ctrls) != 2:
            raise ValueError(f"{self.name} needs two controls")

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(c.qubit for c in self.controls) + (self.target,)

    @property
    def is_primitive(self) -> bool:
        return self.name in PRIMITIVE

    def inverse(self) -> "Gate":
        theta = -self.theta if self.name in ROTATIONS else self.theta
        return Gate(_INVERSE_NAME[self.name], self.target, self.controls, theta)

    def __repr__(self) -> str:
        parts = [self.name]
        if self.theta is not None:
            parts.append(f"({self.theta:.6g})")
        ctrl = ",".join(f"{'' if c.on_one else '~'}{c.qubit}" for c in self.controls)
        return "".join(parts) + (f"[{ctrl}->{self.target}]" if ctrl else f"[{self.target}]")


# constructors -----------------------------------------------------------

def X(q): return Gate("x", q)
def H(q): return Gate("h", q)
def S(q): return Gate("s", q)
def Sdg(q): return Gate("sdg", q)
def T(q): return Gate("t", q)
def Tdg(q): return Gate("tdg", q)
def RY(theta, q): return Gate("ry", q, theta=float(theta))
def RZ(theta, q): return Gate("rz", q, theta=float(theta))
def CX(c, t): return Gate("cx", t, (Control(c),))
def TOF(c1, c2, t): return Gate("tof", t, (Control(c1), Control(c2)))
def RTOF(c1, c2, t): return Gate("rtof", t, (Control(c1), Control(c2)))


def MCRY(controls, t, theta):
    return Gate("mcry", t, tuple(_as_control(c) for c in controls), float(theta))


def MCX(controls, t):
    return Gate("mcx", t, tuple(_as_control(c) for c in controls))


def _as_control(c) -> Control:
    if isinstance(c, Control):
        return c
    if isinstance(c, int):
        return Control(c)
    return Control(*c)


@dataclass(frozen=True)
class Circuit:
    """``width`` data qubits followed by ``ancilla_count`` ancillas."""

    width: int
    gates: tuple[Gate, ...] = ()
    ancilla_count: int = 0

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        n = self.num_qubits
        for g in gates:
            for q in g.qubits:
                if not 0 <= q < n:
                    raise ValueError(f"{g!r} addresses qubit {q} outside 0..{n - 1}")

    @property
    def num_qubits(self) -> int:
        return self.width + self.ancilla_count

    @property
    def is_primitive(self) -> bool:
        return all(g.is_primitive for g in self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def with_gates(self, gates: Iterable[Gate], ancilla_count: int | None = None) -> "Circuit":
        anc = self.ancilla_count if ancilla_count is None else ancilla_count
        return Circuit(self.width, tuple(gates), anc)


def compose(a: Circuit, b: Circuit) -> Circuit:
    if a.width != b.width:
        raise WidthMismatch(f"cannot compose width {a.width} with width {b.width}")
    return Circuit(a.width, a.gates + b.gates, max(a.ancilla_count, b.ancilla_count))


def dagger(c: Circuit) -> Circuit:
    return c.with_gates(g.inverse() for g in reversed(c.gates))


@dataclass
class GateCounts:
    cx: int = 0
    single_qubit: int = 0
    t_like: int = 0
    mcry: int = 0
    tof: int = 0
    rtof: int = 0
    mcx: int = 0

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})

    def to_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def count_gates(c: Circuit, tier: str = "primitive") -> GateCounts:
    if tier not in ("primitive", "composite"):
        raise ValueError(f"unknown tier {tier!r}")
    counts = GateCounts()
    for g in c.gates:
        if g.name == "cx":
            counts.cx += 1
        elif g.name in SINGLE_QUBIT:
            counts.single_qubit += 1
            if g.name in ("t", "tdg"):
                counts.t_like += 1
        else:
            if tier == "primitive":
                raise TierViolation(f"composite gate {g!r} in a primitive-tier count")
            if g.name in ("rtof", "rtofdg"):
                counts.rtof += 1
            else:
                setattr(counts, g.name, getattr(counts, g.name) + 1)
    return counts


def _require_primitive(c: Circuit, what: str) -> None:
    for g in c.gates:
        if not g.is_primitive:
            raise TierViolation(f"{what}: composite gate {g!r} present")


# peephole ---------------------------------------------------------------

_CANCEL_PAIRS = {("cx", "cx"), ("x", "x"), ("h", "h"), ("s", "sdg"), ("sdg", "s"), ("t", "tdg"), ("tdg", "t")}


def _angle_is_zero(theta: float) -> bool:
    r = math.remainder(theta, 4 * math.pi)
    return abs(r) < ANGLE_ATOL


def _peephole_pass(gates: list[Gate]) -> tuple[list[Gate], bool]:
    out: list[Gate | None] = []
    changed = False
    for g in gates:
        qs = set(g.qubits)
        j = len(out) - 1
        while j >= 0 and (out[j] is None or not qs.intersection(out[j].qubits)):
            j -= 1
        if j >= 0:
            h = out[j]
            same_wires = h.qubits == g.qubits
            if same_wires and (h.name, g.name) in _CANCEL_PAIRS:
                out[j] = None
                changed = True
                continue
            if same_wires and h.name == g.name and h.name in ("ry", "rz"):
                total = h.theta + g.theta
                out[j] = None if _angle_is_zero(total) else Gate(h.name, h.target, theta=total)
                changed = True
                continue
        if g.name in ("ry", "rz") and _angle_is_zero(g.theta):
            changed = True
            continue
        out.append(g)
    return [g for g in out if g is not None], changed


def _next_touching(gates: list[Gate], start: int, wires: set[int]) -> int | None:
    for k in range(start, len(gates)):
        if wires.intersection(gates[k].qubits):
            return k
    return None


def _fuse_cx_cz(gates: list[Gate]) -> tuple[list[Gate], bool]:
    # CX(a->b) then CZ(a,b) written as H_b CX(a->b) H_b  ==  Sdg_b CX(a->b) S_b S_a
    for i, g in enumerate(gates):
        if g.name != "cx":
            continue
        a, b = g.controls[0].qubit, g.target
        wires = {a, b}
        j1 = _next_touching(gates, i + 1, wires)
        if j1 is None or gates[j1] != H(b):
            continue
        j2 = _next_touching(gates, j1 + 1, wires)
        if j2 is None or gates[j2] != g:
            continue
        j3 = _next_touching(gates, j2 + 1, wires)
        if j3 is None or gates[j3] != H(b):
            continue
        out = [x for k, x in enumerate(gates[:j3]) if k not in (i, j1, j2)]
        out += [Sdg(b), CX(a, b), S(b), S(a)] + gates[j3 + 1:]
        return out, True
    return gates, False


def fuse_cx_cz(c: Circuit) -> Circuit:
    """Apply only the CX-then-CZ fusion, repeatedly; an exact rewrite."""
    gates = list(c.gates)
    changed = True
    while changed:
        gates, changed = _fuse_cx_cz(gates)
    return c.with_gates(gates)


def peephole_cancel(c: Circuit) -> Circuit:
    """Cancel adjacent inverse pairs and merge adjacent rotations to a fixed point.

    Two gates are adjacent when no gate between them touches any of their
    qubits.  A CX followed by a CZ on the same pair is fused into one CX.
    """
    _require_primitive(c, "peephole_cancel")
    gates = list(c.gates)
    changed = True
    while changed:
        gates, changed = _peephole_pass(gates)
        if not changed:
            gates, changed = _fuse_cx_cz(gates)
    return c.with_gates(gates)


# OPENQASM 2.0 -----------------------------------------------------------

def _fmt_angle(theta: float) -> str:
    return repr(float(theta))


def export_qasm(c: Circuit) -> str:
    _require_primitive(c, "export_qasm")
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.num_qubits}];"]
    for g in c.gates:
        if g.name == "cx":
            lines.append(f"cx q[{g.controls[0].qubit}],q[{g.target}];")
        elif g.name in ("ry", "rz"):
            lines.append(f"{g.name}({_fmt_angle(g.theta)}) q[{g.target}];")
        else:
            lines.append(f"{g.name} q[{g.target}];")
    return "\n".join(lines) + "\n"


_QREG = re.compile(r"^qreg\s+(\w+)\[(\d+)\];$")
_OP = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+(.+);$")
_ARG = re.compile(r"^\w+\[(\d+)\]$")


def parse_qasm(text: str, width: int | None = None) -> Circuit:
    """Read back the subset written by :func:`export_qasm`.

    Angles may be plain floats or simple ``pi`` expressions such as ``-pi/4``.
    """
    nq = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//")[0].strip()
        if not line or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        m = _QREG.match(line)
        if m:
            if nq is not None:
                raise ValueError(f"line {lineno}: only one qreg supported")
            nq = int(m.group(2))
            continue
        if line.startswith(("creg", "measure", "barrier")):
            continue
        m = _OP.match(line)
        if not m:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
        name, param, args = m.group(1), m.group(2), m.group(3)
        qs = []
        for a in args.split(","):
            am = _ARG.match(a.strip())
            if not am:
                raise ValueError(f"line {lineno}: bad argument {a!r}")
            qs.append(int(am.group(1)))
        if name == "cx":
            gates.append(CX(qs[0], qs[1]))
        elif name in ("ry", "rz"):
            gates.append(Gate(name, qs[0], theta=_eval_angle(param, lineno)))
        elif name in SINGLE_QUBIT:
            gates.append(Gate(name, qs[0]))
        else:
            raise ValueError(f"line {lineno}: unsupported gate {name!r}")
    if nq is None:
        raise ValueError("no qreg declaration")
    w = nq if width is None else width
    return Circuit(w, tuple(gates), nq - w)


def _eval_angle(expr: str, lineno: int) -> float:
    if not re.fullmatch(r"[0-9eE+\-*/. ()pi]+", expr or ""):
        raise ValueError(f"line {lineno}: bad angle {expr!r}")
    return float(eval(expr, {"__builtins__": {}}, {"pi": math.pi}))

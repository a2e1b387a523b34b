"""Lowering of m-excitation unitaries to gates.

Every term acts on ``m`` qubit pairs ``(g, e)``.  Locally the qubits are
numbered ``q0 = g_0, q1 = e_0, q2 = g_1, q3 = e_1, ...`` so that the term rotates
``|g_m>`` (all ``g`` set) into ``|e_m>`` (all ``e`` set).

Angle convention: ``RY(phi) = exp(-i phi Y / 2)``.  Both controlled-rotation
methods drive ``q0`` with ``RY(-2 theta)`` so the term maps
``|g> -> cos(theta)|g> + sin(theta)|e>``.
"""

from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import (
    CX, COMPOSITE, DIAGONAL_1Q, MCRY, RTOF, RY, RZ, Circuit, Control, Gate, H, S, Sdg, T, Tdg, X,
    dagger, fuse_cx_cz,
)


class LoweringMethod(enum.Enum):
    EXPONENTIAL = "exponential"
    GIVENS = "givens"
    REDUNDANT = "redundant"

    @classmethod
    def parse(cls, value) -> "LoweringMethod":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown lowering method {value!r}; expected one of "
                             f"{', '.join(m.value for m in cls)}") from None


@dataclass(frozen=True)
class MultiplexExponential:
    """Gray-code multiplexor: ``2**n`` CX and ``2**n`` RY per n-controlled RY.

    With ``merge_boundary`` every multiplexor is emitted in CZ form, leading
    with the last control, so its first entangler can fuse with an adjacent
    ``CX(target -> last control)`` during :func:`~uvcc.circuit.peephole_cancel`.
    Single-control rotations always use that form.
    """

    merge_boundary: bool = False


@dataclass(frozen=True)
class AncillaLadder:
    """C^nRY via two C^(n-1)X and two CRY; C^kX via a clean-ancilla Toffoli ladder.

    The ladder uses ``2k - 3`` Toffoli-class gates (k >= 3) and ``k - 2``
    ancillas.  Compute/uncompute rungs are relative-phase Toffolis when
    ``use_rtof``; the rung that hits the target is always a full Toffoli.
    """

    use_rtof: bool = True


def parse_mcr(value) -> MultiplexExponential | AncillaLadder:
    if isinstance(value, (MultiplexExponential, AncillaLadder)):
        return value
    if value is None or value == "multiplex":
        return MultiplexExponential()
    if value == "multiplex-merge":
        return MultiplexExponential(merge_boundary=True)
    if value == "ancilla":
        return AncillaLadder(use_rtof=True)
    if value == "ancilla-full":
        return AncillaLadder(use_rtof=False)
    raise ValueError(f"unknown multi-controlled rotation scheme {value!r}")


# Toffoli family -----------------------------------------------------------

#: Phases ``D`` with ``RTOF = TOF @ diag(D)``, index = 4*c1 + 2*c2 + t.
RTOF_PHASES = (1, -1j, 1, -1j, 1, 1j, -1j, 1)


def _ry_quarter(q: int, sign: int) -> list[Gate]:
    # RY(+-pi/4) = S H RZ(+-pi/4) H Sdg; T carries e^{i pi/8}, paired signs cancel it.
    return [Sdg(q), H(q), T(q) if sign > 0 else Tdg(q), H(q), S(q)]


def rtof_gates(c1: int, c2: int, t: int) -> list[Gate]:
    """3-CX relative-phase Toffoli with the phases in :data:`RTOF_PHASES`."""
    gates = _ry_quarter(t, +1) + [CX(c2, t)]
    gates += _ry_quarter(t, +1) + [CX(c1, t)]
    gates += _ry_quarter(t, -1) + [CX(c2, t)]
    gates += _ry_quarter(t, -1)[:-1]  # trailing S cancels the closing Sdg
    return gates


def rtofdg_gates(c1: int, c2: int, t: int) -> list[Gate]:
    return [g.inverse() for g in reversed(rtof_gates(c1, c2, t))]


def toffoli_gates(c1: int, c2: int, t: int) -> list[Gate]:
    return [
        H(t), CX(c2, t), Tdg(t), CX(c1, t), T(t), CX(c2, t), Tdg(t), CX(c1, t),
        T(c2), T(t), H(t), CX(c1, c2), T(c1), Tdg(c2), CX(c1, c2),
    ]


def lower_rtof(c1: int, c2: int, t: int) -> Circuit:
    return Circuit(max(c1, c2, t) + 1, tuple(rtof_gates(c1, c2, t)))


# multi-controlled rotations ---------------------------------------------

def _multiplex_skeleton(n: int, lead: bool) -> list[tuple[str, int]]:
    size = 1 << n
    gray = [i ^ (i >> 1) for i in range(size)]
    flips = [(gray[i] ^ gray[(i + 1) % size]).bit_length() - 1 for i in range(size)]
    if not lead:
        out = []
        for i in range(size):
            out += [("ry", i), ("g", flips[i])]
        return out
    out = []
    for i in reversed(range(size)):
        out += [("g", flips[i]), ("ry", i)]
    return out


def _multiplex_gates(controls: Sequence[Control], target: int, theta: float, lead: bool) -> list[Gate]:
    n = len(controls)
    size = 1 << n
    pattern = sum(1 << j for j, c in enumerate(controls) if c.on_one)
    gates: list[Gate] = []
    mask = 0
    first = True
    for kind, val in _multiplex_skeleton(n, lead):
        if kind == "ry":
            sign = -1 if bin(pattern & mask).count("1") % 2 else 1
            gates.append(RY(sign * theta / size, target))
            continue
        c = controls[val].qubit
        if not lead:
            gates.append(CX(c, target))
        elif first:
            gates += [H(c), CX(target, c), H(c)]
        else:
            gates += [H(target), CX(c, target), H(target)]
        first = False
        mask ^= 1 << val
    return gates


def _cry(control: Control, target: int, theta: float) -> list[Gate]:
    return _multiplex_gates([control], target, theta, lead=True)


def mcry_ancillas(n_controls: int, scheme) -> int:
    if isinstance(scheme, AncillaLadder):
        return max(0, n_controls - 3)
    return 0


def mcx_ancillas(n_controls: int) -> int:
    return max(0, n_controls - 2)


def lower_mcx(controls: Sequence[Control], target: int, ancillas: Sequence[int] = (),
              use_rtof: bool = True) -> list[Gate]:
    controls = [c if isinstance(c, Control) else Control(c) for c in controls]
    flips = [X(c.qubit) for c in controls if not c.on_one]
    qs = [c.qubit for c in controls]
    k = len(qs)
    if k == 0:
        core = [X(target)]
    elif k == 1:
        core = [CX(qs[0], target)]
    elif k == 2:
        core = toffoli_gates(qs[0], qs[1], target)
    else:
        if len(ancillas) < k - 2:
            raise ValueError(f"{k}-controlled X needs {k - 2} ancillas, got {len(ancillas)}")
        anc = list(ancillas[:k - 2])
        rung = rtof_gates if use_rtof else toffoli_gates
        unrung = rtofdg_gates if use_rtof else toffoli_gates
        compute = [(qs[0], qs[1], anc[0])]
        for i in range(1, k - 2):
            compute.append((anc[i - 1], qs[i + 1], anc[i]))
        core = []
        for a, b, c in compute:
            core += rung(a, b, c)
        core += toffoli_gates(anc[-1], qs[-1], target)
        for a, b, c in reversed(compute):
            core += unrung(a, b, c)
    return flips + core + flips


def lower_mcry(controls: Sequence, target: int, theta: float, scheme=None,
               ancillas: Sequence[int] = ()) -> list[Gate]:
    """Exact n-controlled ``RY(theta)`` on ``target`` as primitive gates."""
    scheme = parse_mcr(scheme)
    controls = [c if isinstance(c, Control) else Control(*c) if isinstance(c, tuple) else Control(c)
                for c in controls]
    n = len(controls)
    if n == 0:
        return [RY(theta, target)]
    if isinstance(scheme, MultiplexExponential):
        return _multiplex_gates(controls, target, theta, lead=scheme.merge_boundary or n == 1)
    if n == 1:
        return _cry(controls[0], target, theta)
    head, last = controls[:-1], controls[-1]
    mcx = lower_mcx(head, target, ancillas, scheme.use_rtof)
    return _cry(last, target, theta / 2) + mcx + _cry(last, target, -theta / 2) + mcx


def lower_circuit(c: Circuit, scheme=None, *, fuse: bool = True) -> Circuit:
    """Expand every composite gate; ancillas are appended after existing qubits.

    With ``fuse``, CZ-form multiplexor legs that follow a CX on the same pair
    are fused into it.
    """
    scheme = parse_mcr(scheme)
    need = 0
    for g in c.gates:
        if g.name == "mcry":
            need = max(need, mcry_ancillas(len(g.controls), scheme))
        elif g.name == "mcx":
            need = max(need, mcx_ancillas(len(g.controls)))
    anc = list(range(c.num_qubits, c.num_qubits + need))
    use_rtof = scheme.use_rtof if isinstance(scheme, AncillaLadder) else True
    out: list[Gate] = []
    for g in c.gates:
        if g.is_primitive:
            out.append(g)
        elif g.name == "mcry":
            out += lower_mcry(g.controls, g.target, g.theta, scheme, anc)
        elif g.name == "mcx":
            out += lower_mcx(g.controls, g.target, anc, use_rtof)
        elif g.name == "tof":
            out += toffoli_gates(g.controls[0].qubit, g.controls[1].qubit, g.target)
        elif g.name == "rtof":
            out += rtof_gates(g.controls[0].qubit, g.controls[1].qubit, g.target)
        elif g.name == "rtofdg":
            out += rtofdg_gates(g.controls[0].qubit, g.controls[1].qubit, g.target)
        else:  # pragma: no cover
            raise ValueError(f"cannot lower {g!r}")
    lowered = Circuit(c.width, tuple(out), c.ancilla_count + need)
    return fuse_cx_cz(lowered) if fuse else lowered


# term constructions -------------------------------------------------------

def local_qubits(pairs: Sequence[tuple[int, int]]) -> list[int]:
    return [q for pair in pairs for q in pair]


def oracle_pair(pairs: Sequence[tuple[int, int]]) -> tuple[dict[int, int], dict[int, int]]:
    """Bit assignments of ``|g_m>`` and ``|e_m>`` on the term's qubits."""
    g = {}
    e = {}
    for gq, eq in pairs:
        g[gq], g[eq] = 1, 0
        e[gq], e[eq] = 0, 1
    return g, e


def _width(pairs, width):
    return max(local_qubits(pairs)) + 1 if width is None else width


def build_pair_flag(pair_j: tuple[int, int], q0_pair: tuple[int, int], width: int | None = None) -> Circuit:
    """CX(e_j -> g_j) then RTOF(q0, g_j -> e_j), in circuit order.

    On the states a term can see, pair j ends in |11> (times -i) exactly when
    it held the excitation consistent with q0, and is left alone otherwise.
    """
    g, e = pair_j
    q0 = q0_pair[0]
    return Circuit(_width([pair_j, q0_pair], width), (CX(e, g), RTOF(q0, g, e)))


def build_collapse(pairs: Sequence[tuple[int, int]], width: int | None = None) -> Circuit:
    """Map ``|g>`` and ``|e>`` to states differing only on q0, each with phase ``(-i)**(m-1)``."""
    width = _width(pairs, width)
    q0, q1 = pairs[0]
    gates: list[Gate] = []
    for pair in pairs[1:]:
        gates += build_pair_flag(pair, pairs[0], width).gates
    gates.append(CX(q0, q1))
    return Circuit(width, tuple(gates))


def redundant_controls(pairs) -> list[Control]:
    return [Control(e) for _, e in pairs[1:]] + [Control(pairs[0][1])]


def givens_controls(pairs) -> list[Control]:
    ql = local_qubits(pairs)
    return [Control(ql[k], on_one=bool(k % 2)) for k in range(1, len(ql))]


def lower_term_redundant(pairs, theta: float, width: int | None = None) -> Circuit:
    width = _width(pairs, width)
    u = build_collapse(pairs, width)
    rot = MCRY(redundant_controls(pairs), pairs[0][0], -2.0 * theta)
    return Circuit(width, u.gates + (rot,) + dagger(u).gates)


def lower_term_givens(pairs, theta: float, width: int | None = None) -> Circuit:
    width = _width(pairs, width)
    ql = local_qubits(pairs)
    q0 = ql[0]
    ladder = tuple(CX(q0, q) for q in ql[1:])
    rot = MCRY(givens_controls(pairs), q0, -2.0 * theta)
    return Circuit(width, ladder + (rot,) + ladder[::-1])


def pauli_terms(pairs) -> list[tuple[str, float]]:
    """``theta (|e><g| - |g><e|) = i * sum_k a_k P_k`` with ``a_k`` per unit theta.

    Strings are over the local qubits (g0, e0, g1, e1, ...).
    """
    n = 2 * len(pairs)
    out = []
    for s in itertools.product("XY", repeat=n):
        # |e><g| puts |0><1| = (X+iY)/2 on g qubits and |1><0| = (X-iY)/2 on e qubits
        c = 1.0 + 0j
        for k, p in enumerate(s):
            if p == "Y":
                c *= 1j if k % 2 == 0 else -1j
        c /= 2 ** n
        if abs(c.imag) > 0:
            out.append(("".join(s), 2 * c.imag))
    return out


def lower_term_exponential(pairs, theta: float, width: int | None = None) -> Circuit:
    width = _width(pairs, width)
    ql = local_qubits(pairs)
    order = sorted(range(len(ql)), key=lambda k: ql[k])
    chain = [ql[k] for k in order]
    gates: list[Gate] = []
    for s, a in pauli_terms(pairs):
        pre, post = [], []
        for k, p in enumerate(s):
            q = ql[k]
            if p == "X":
                pre.append(H(q))
                post.append(H(q))
            else:
                pre += [Sdg(q), H(q)]
                post += [H(q), S(q)]
        stair = [CX(chain[i], chain[i + 1]) for i in range(len(chain) - 1)]
        gates += pre + stair + [RZ(-2.0 * a * theta, chain[-1])] + stair[::-1] + post
    return Circuit(width, tuple(gates))


def lower_term(pairs, theta: float, width: int | None, method) -> Circuit:
    method = LoweringMethod.parse(method)
    if method is LoweringMethod.EXPONENTIAL:
        return lower_term_exponential(pairs, theta, width)
    if method is LoweringMethod.GIVENS:
        return lower_term_givens(pairs, theta, width)
    return lower_term_redundant(pairs, theta, width)


# known-state pruning --------------------------------------------------------

def _basis_action(g: Gate, bits: Sequence[int]) -> tuple[tuple[int, ...], complex]:
    """Output basis bits and phase of a Toffoli-family gate on (c1, c2, t)."""
    c1, c2, t = bits
    fire = c1 and c2
    if g.name == "rtof":
        return (c1, c2, t ^ fire), RTOF_PHASES[4 * c1 + 2 * c2 + t]
    if g.name == "rtofdg":
        t_in = t ^ fire
        return (c1, c2, t_in), RTOF_PHASES[4 * c1 + 2 * c2 + t_in].conjugate()
    raise ValueError(g.name)


def _phase_gate(q: int, value: int, phase: complex) -> list[Gate]:
    """Gate on a qubit known to hold ``value`` that contributes ``phase`` globally."""
    gamma = cmath.phase(phase)
    if abs(math.remainder(gamma, 2 * math.pi)) < 1e-15:
        return []
    return [RZ(2 * gamma if value else -2 * gamma, q)]


def _prune_rtof(g: Gate, state: list) -> list[Gate] | None:
    qs = [g.controls[0].qubit, g.controls[1].qubit, g.target]
    vals = [state[q] for q in qs]
    if all(v is not None for v in vals):
        out_bits, phase = _basis_action(g, vals)
        gates = [X(g.target)] if out_bits[2] != vals[2] else []
        state[g.target] = out_bits[2]
        return gates + _phase_gate(g.target, out_bits[2], phase)
    if vals[0] == 0 or vals[1] == 0:
        # gate is diagonal here; try to factor it into single-qubit phases
        unknown = [i for i, v in enumerate(vals) if v is None]
        phases = {}
        for assign in itertools.product((0, 1), repeat=len(unknown)):
            bits = list(vals)
            for i, b in zip(unknown, assign):
                bits[i] = b
            _, ph = _basis_action(g, bits)
            phases[assign] = ph
        base = phases[(0,) * len(unknown)]
        deltas = []
        for i in range(len(unknown)):
            e = tuple(int(j == i) for j in range(len(unknown)))
            deltas.append(phases[e] / base)
        for assign, ph in phases.items():
            pred = base * np.prod([d for d, b in zip(deltas, assign) if b]) if any(assign) else base
            if abs(pred - ph) > 1e-12:
                return None
        out: list[Gate] = []
        glob = base
        for i, d in zip(unknown, deltas):
            delta = cmath.phase(d)
            if abs(delta) > 1e-15:
                out.append(RZ(delta, qs[i]))
                glob *= cmath.exp(1j * delta / 2)
        known = next(i for i, v in enumerate(vals) if v is not None)
        return out + _phase_gate(qs[known], vals[known], glob)
    if vals[2] is not None:
        state[g.target] = None
    return None


def _apply_1q(g: Gate, state: list) -> None:
    q = g.target
    if g.name == "x":
        if state[q] is not None:
            state[q] ^= 1
    elif g.name in DIAGONAL_1Q:
        pass
    else:
        state[q] = None


def prune_known_controls(c: Circuit, initial: str | None = None) -> Circuit:
    """Simplify ``c`` for the single input ``|initial>`` (default all zeros).

    Tracks each qubit as known-0, known-1 or unknown.  Controls known to fire
    are dropped, gates with a control known not to fire are deleted, and
    relative-phase Toffolis on known inputs are replaced by the equivalent X
    and phase gates.  The result agrees with ``c`` on ``|initial>`` only.
    """
    n = c.num_qubits
    if initial is None:
        initial = "0" * n
    if len(initial) == c.width and n > c.width:
        initial = initial + "0" * (n - c.width)
    if len(initial) != n:
        raise ValueError(f"initial state has {len(initial)} bits, circuit has {n} qubits")
    state: list[int | None] = [int(b) for b in initial]
    out: list[Gate] = []
    for g in c.gates:
        if not g.controls:
            out.append(g)
            _apply_1q(g, state)
            continue
        if g.name in ("rtof", "rtofdg"):
            repl = _prune_rtof(g, state)
            if repl is None:
                out.append(g)
            else:
                out += repl
            continue
        remaining = []
        blocked = False
        for ctl in g.controls:
            v = state[ctl.qubit]
            if v is None:
                remaining.append(ctl)
            elif v != int(ctl.on_one):
                blocked = True
                break
        if blocked:
            continue
        base_x = g.name in ("cx", "tof", "mcx")
        if not remaining:
            ng = X(g.target) if base_x else RY(g.theta, g.target)
            out.append(ng)
            _apply_1q(ng, state)
            continue
        if base_x:
            if len(remaining) == 1 and remaining[0].on_one:
                ng = CX(remaining[0].qubit, g.target)
            elif len(remaining) == 2 and g.name == "tof" and len(g.controls) == 2:
                ng = g
            else:
                ng = Gate("mcx", g.target, tuple(remaining))
        else:
            ng = MCRY(remaining, g.target, g.theta)
        out.append(ng)
        state[g.target] = None
    return c.with_gates(out)


def has_composite(c: Circuit) -> bool:
    return any(g.name in COMPOSITE for g in c.gates)

"""Dense statevector simulation, analytic oracles and a depolarizing noise proxy.

Amplitude index ``k`` corresponds to the bitstring of ``k`` written with qubit
0 as the most significant (leftmost) bit.  Ancillas occupy the highest qubit
numbers, i.e. the least significant bits.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .ansatz import AnsatzSpec, ExcitationTerm, term_qubits
from .circuit import Circuit, Gate, TierViolation, WidthMismatch
from .encoding import encode_unary

MAX_QUBITS = 24
PROB_CUTOFF = 1e-15

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
}
_RTOF_DIAG = np.array([1, -1j, 1, -1j, 1, 1j, -1j, 1])


def gate_matrix(g: Gate) -> np.ndarray:
    """2x2 matrix of a single-qubit gate, or of the target action of a controlled one."""
    if g.name in _FIXED:
        return _FIXED[g.name]
    if g.name in ("cx", "tof", "mcx"):
        return _FIXED["x"]
    if g.name in ("ry", "mcry"):
        c, s = math.cos(g.theta / 2), math.sin(g.theta / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if g.name == "rz":
        return np.diag([np.exp(-0.5j * g.theta), np.exp(0.5j * g.theta)])
    raise ValueError(f"no 2x2 matrix for {g.name}")


def _check_size(n: int) -> None:
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the dense-simulation cap of {MAX_QUBITS}")


# batched kernels: psi has shape (batch, 2, 2, ..., 2) --------------------

def _apply_1q(psi: np.ndarray, u: np.ndarray, q: int) -> np.ndarray:
    out = np.tensordot(u, psi, axes=([1], [q + 1]))
    return np.moveaxis(out, 0, q + 1)


def _controlled_view_index(n: int, controls) -> tuple:
    idx = [slice(None)] * (n + 1)
    for c in controls:
        idx[c.qubit + 1] = 1 if c.on_one else 0
    return tuple(idx)


def _target_axis(target: int, controls) -> int:
    return target + 1 - sum(1 for c in controls if c.qubit < target)


def _apply_controlled(psi: np.ndarray, u: np.ndarray, controls, target: int) -> np.ndarray:
    n = psi.ndim - 1
    idx = _controlled_view_index(n, controls)
    ax = _target_axis(target, controls)
    sub = psi[idx]
    if u is _FIXED["x"]:
        sub[...] = np.flip(sub, axis=ax).copy()
    else:
        out = np.moveaxis(np.tensordot(u, sub, axes=([1], [ax])), 0, ax)
        sub[...] = out
    return psi


def _apply_phase3(psi: np.ndarray, diag: np.ndarray, qs: Sequence[int]) -> np.ndarray:
    n = psi.ndim - 1
    shape = [1] * (n + 1)
    for q in qs:
        shape[q + 1] = 2
    # broadcast the 8 phases onto the three axes in ascending qubit order
    order = np.argsort(qs)
    d = diag.reshape(2, 2, 2).transpose(order)
    return psi * d.reshape(shape)


def _apply_gate(psi: np.ndarray, g: Gate) -> np.ndarray:
    if not g.controls:
        return _apply_1q(psi, gate_matrix(g), g.target)
    if g.name in ("rtof", "rtofdg"):
        qs = [g.controls[0].qubit, g.controls[1].qubit, g.target]
        if g.name == "rtof":
            psi = _apply_phase3(psi, _RTOF_DIAG, qs)
            return _apply_controlled(psi, _FIXED["x"], g.controls, g.target)
        psi = _apply_controlled(psi, _FIXED["x"], g.controls, g.target)
        return _apply_phase3(psi, _RTOF_DIAG.conj(), qs)
    return _apply_controlled(psi, gate_matrix(g), g.controls, g.target)


def _as_batch(states: np.ndarray, c: Circuit) -> np.ndarray:
    n = c.num_qubits
    states = np.asarray(states, dtype=complex)
    if states.ndim == 1:
        states = states[None, :]
    dim = states.shape[1]
    if dim == 2 ** c.width and c.ancilla_count:
        padded = np.zeros((states.shape[0], 2 ** n), dtype=complex)
        padded[:, :: 2 ** c.ancilla_count] = states
        states = padded
    elif dim != 2 ** n:
        raise WidthMismatch(f"state of dimension {dim} for a {n}-qubit circuit")
    return states.reshape((states.shape[0],) + (2,) * n).copy()


def apply_circuit_batch(c: Circuit, states: np.ndarray, *, allow_composite: bool = True) -> np.ndarray:
    """Apply ``c`` to each row of ``states`` (shape ``(batch, 2**n)``)."""
    _check_size(c.num_qubits)
    if not allow_composite and not c.is_primitive:
        raise TierViolation("composite gates present and allow_composite=False")
    psi = _as_batch(states, c)
    for g in c.gates:
        psi = _apply_gate(psi, g)
    return psi.reshape(psi.shape[0], -1)


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1
    return psi


def basis_state(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2) if bits else 0] = 1
    return psi


def apply_circuit(c: Circuit, psi: np.ndarray | None = None, *, allow_composite: bool = True) -> np.ndarray:
    """``U_c psi``; ``psi`` defaults to all zeros and may omit the ancillas (taken as 0)."""
    if psi is None:
        psi = zero_state(c.num_qubits)
    return apply_circuit_batch(c, psi, allow_composite=allow_composite)[0]


def circuit_unitary(c: Circuit) -> np.ndarray:
    dim = 2 ** c.num_qubits
    return apply_circuit_batch(c, np.eye(dim, dtype=complex)).T


# oracles ------------------------------------------------------------------

def _term_order(t) -> int:
    return t.order if isinstance(t, ExcitationTerm) else int(t)


def oracle_term_unitary(t: ExcitationTerm | int, theta: float) -> np.ndarray:
    """Rotation between ``|g>`` and ``|e>`` on the term's ``2m`` qubits.

    Local qubits are ordered ``g_0, e_0, g_1, e_1, ...`` (most significant
    first); ``|g>`` has every ``g`` bit set and ``|e>`` every ``e`` bit set.
    """
    m = _term_order(t)
    dim = 4 ** m
    g = int("10" * m, 2)
    e = int("01" * m, 2)
    u = np.eye(dim, dtype=complex)
    c, s = math.cos(theta), math.sin(theta)
    u[g, g] = c
    u[e, e] = c
    u[e, g] = s
    u[g, e] = -s
    return u


def apply_oracle_term(psi: np.ndarray, pairs: Sequence[tuple[int, int]], theta: float,
                      n_qubits: int) -> np.ndarray:
    """Apply the term oracle on the given qubit pairs of an ``n_qubits`` state."""
    idx = np.arange(2 ** n_qubits)
    gmask = emask = 0
    allmask = 0
    for gq, eq in pairs:
        gbit = 1 << (n_qubits - 1 - gq)
        ebit = 1 << (n_qubits - 1 - eq)
        gmask |= gbit
        emask |= ebit
        allmask |= gbit | ebit
    is_g = (idx & allmask) == gmask
    gi = idx[is_g]
    ei = (gi & ~allmask) | emask
    out = np.array(psi, dtype=complex, copy=True)
    a, b = psi[gi], psi[ei]
    c, s = math.cos(theta), math.sin(theta)
    out[gi] = c * a - s * b
    out[ei] = s * a + c * b
    return out


def embedded_term_unitary(pairs: Sequence[tuple[int, int]], theta: float, n_qubits: int) -> np.ndarray:
    return apply_oracle_term(np.eye(2 ** n_qubits, dtype=complex), pairs, theta, n_qubits)


def oracle_ansatz_state(a: AnsatzSpec) -> np.ndarray:
    n = a.layout.width
    _check_size(n)
    psi = basis_state(encode_unary(a.reference, a.spec))
    for t in a.terms:
        psi = apply_oracle_term(psi, term_qubits(t, a.layout), t.theta, n)
    return psi


# distributions -------------------------------------------------------------

def _bitstring(k: int, n: int) -> str:
    return format(k, f"0{n}b") if n else ""


def probabilities(psi: np.ndarray, width: int | None = None) -> np.ndarray:
    """Outcome probabilities of the first ``width`` qubits (all by default)."""
    p = np.abs(np.asarray(psi)) ** 2
    n = int(round(math.log2(p.size)))
    if width is None or width == n:
        return p
    if width > n:
        raise WidthMismatch(f"width {width} > {n} qubits")
    return p.reshape(2 ** width, -1).sum(axis=1)


def distribution(psi: np.ndarray, width: int | None = None) -> dict[str, float]:
    p = probabilities(psi, width)
    n = int(round(math.log2(p.size)))
    return {_bitstring(k, n): float(v) for k, v in enumerate(p) if v >= PROB_CUTOFF}


def tvd(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def _counts_to_dist(keys: Sequence[str], counts: np.ndarray, shots: int) -> dict[str, float]:
    return {k: int(c) / shots for k, c in sorted(zip(keys, counts)) if c}


def sample_shots(p: Mapping[str, float], shots: int, seed=None) -> dict[str, float]:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    keys = sorted(p)
    probs = np.array([p[k] for k in keys], dtype=float)
    counts = rng.multinomial(shots, probs / probs.sum())
    return _counts_to_dist(keys, counts, shots)


# noise ---------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Two-qubit depolarizing channel after every CX."""

    p2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p2 <= 1.0:
            raise ValueError(f"p2 must lie in [0, 1], got {self.p2}")


def _compile(c: Circuit) -> list[tuple]:
    """Fuse wire-adjacent single-qubit gates; ops are ('u', q, mat) or ('cx', c, t, k)."""
    pending: dict[int, np.ndarray] = {}
    ops: list[tuple] = []
    k = 0

    def flush(q):
        if q in pending:
            ops.append(("u", q, pending.pop(q)))

    for g in c.gates:
        if g.name == "cx":
            ctl = g.controls[0].qubit
            flush(ctl)
            flush(g.target)
            ops.append(("cx", ctl, g.target, k))
            k += 1
        elif not g.controls:
            pending[g.target] = gate_matrix(g) @ pending.get(g.target, np.eye(2))
        else:
            raise TierViolation(f"noisy simulation needs primitive gates, got {g!r}")
    for q in sorted(pending):
        flush(q)
    return ops


def _cx(psi: np.ndarray, ctl: int, tgt: int) -> np.ndarray:
    n = psi.ndim - 1
    idx = [slice(None)] * (n + 1)
    idx[ctl + 1] = 1
    sub = psi[tuple(idx)]
    ax = tgt + 1 - (1 if ctl < tgt else 0)
    sub[...] = np.flip(sub, axis=ax).copy()
    return psi


def _pauli(psi: np.ndarray, q: int, code: int) -> None:
    """In-place X (1), Z (2) or Y up to phase (3) on qubit q for every row."""
    n = psi.ndim - 1
    if code & 2:
        idx = [slice(None)] * (n + 1)
        idx[q + 1] = 1
        psi[tuple(idx)] *= -1
    if code & 1:
        psi[...] = np.flip(psi, axis=q + 1).copy()


def _trajectory_outcomes(ops, psi0_snapshots, n, first_err, errors, rng, chunk):
    """Measure one outcome per errored trajectory.

    ``errors`` maps trajectory -> {cx index: pauli pair code}; trajectories
    before their first error follow the ideal evolution, so each chunk starts
    from the ideal snapshot at its earliest first-error position.
    """
    order = np.argsort(first_err, kind="stable")
    outcomes = np.empty(len(order), dtype=np.int64)
    cx_positions = [i for i, op in enumerate(ops) if op[0] == "cx"]
    for lo in range(0, len(order), chunk):
        rows = order[lo:lo + chunk]
        start_cx = int(first_err[rows[0]])
        start_op = cx_positions[start_cx]
        psi = np.repeat(psi0_snapshots[start_cx][None], len(rows), axis=0)
        psi = psi.reshape((len(rows),) + (2,) * n)
        events: dict[int, list[tuple[int, int]]] = {}
        for r_local, r in enumerate(rows):
            for k, code in errors[r].items():
                events.setdefault(k, []).append((r_local, code))
        for op in ops[start_op:]:
            if op[0] == "u":
                psi = _apply_1q(psi, op[2], op[1])
                continue
            _, ctl, tgt, k = op
            psi = _cx(psi, ctl, tgt)
            for r_local, code in events.get(k, ()):
                row = psi[r_local:r_local + 1]
                _pauli(row, ctl, code >> 2)
                _pauli(row, tgt, code & 3)
        probs = np.abs(psi.reshape(len(rows), -1)) ** 2
        cum = np.cumsum(probs, axis=1)
        u = rng.random(len(rows)) * cum[:, -1]
        outcomes[lo:lo + len(rows)] = np.minimum((cum < u[:, None]).sum(axis=1), cum.shape[1] - 1)
    result = np.empty_like(outcomes)
    result[order] = outcomes
    return result


def simulate_noisy(c: Circuit, noise: NoiseModel, shots: int, seed=None, *,
                   chunk: int = 1024) -> dict[str, float]:
    """Empirical data-register distribution over ``shots`` noisy trajectories."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    seed = noise.seed if seed is None else seed
    ideal = apply_circuit(c, allow_composite=False)
    exact = distribution(ideal, c.width)
    if noise.p2 == 0.0:
        return sample_shots(exact, shots, seed)
    n = c.num_qubits
    _check_size(n)
    ops = _compile(c)
    n_cx = sum(1 for op in ops if op[0] == "cx")
    rng = np.random.default_rng(seed)
    hits = rng.random((shots, n_cx)) < noise.p2
    clean = ~hits.any(axis=1)
    n_clean = int(clean.sum())
    keys = [_bitstring(k, c.width) for k in range(2 ** c.width)]
    p_data = probabilities(ideal, c.width)
    counts = rng.multinomial(n_clean, p_data / p_data.sum()) if n_clean else np.zeros(len(keys), int)
    dirty = np.flatnonzero(~clean)
    if dirty.size:
        # ideal state just before each CX, the starting point for trajectories
        # whose first error follows that CX
        snapshots = []
        psi = _as_batch(zero_state(n), c)
        for op in ops:
            if op[0] == "cx":
                snapshots.append(psi[0].copy())
                psi = _cx(psi, op[1], op[2])
            else:
                psi = _apply_1q(psi, op[2], op[1])
        first_err = np.argmax(hits[dirty], axis=1)
        errors = []
        for r in dirty:
            ks = np.flatnonzero(hits[r])
            codes = rng.integers(1, 16, size=ks.size)
            errors.append({int(k): int(code) for k, code in zip(ks, codes)})
        outcomes = _trajectory_outcomes(ops, snapshots, n, first_err, errors, rng, chunk)
        data = outcomes >> c.ancilla_count
        counts = counts + np.bincount(data, minlength=len(keys))
    return _counts_to_dist(keys, counts, shots)


# export --------------------------------------------------------------------

def distribution_json(p: Mapping[str, float]) -> str:
    return json.dumps({k: p[k] for k in sorted(p)}, indent=2, sort_keys=True)


def write_histogram_csv(path, exact: Mapping[str, float], series: Mapping[str, Mapping[str, float]]) -> None:
    """Rows ``bitstring, exact, method, value`` for each named series."""
    keys = sorted(set(exact).union(*[set(s) for s in series.values()]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bitstring", "exact", "method", "value"])
        for name in sorted(series):
            for k in keys:
                w.writerow([k, repr(exact.get(k, 0.0)), name, repr(series[name].get(k, 0.0))])

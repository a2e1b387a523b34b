"""End-to-end acceptance checks; each prints one pass/fail line."""

import itertools
import math
import time

import numpy as np

from conftest import record_criterion
from uvcc import cost, lowering
from uvcc.ansatz import compile_ansatz
from uvcc.circuit import Circuit, count_gates
from uvcc.cli import physical_term_inputs, tables_report, term_error
from uvcc.simulator import (
    NoiseModel, apply_circuit, apply_circuit_batch, distribution, oracle_ansatz_state,
    oracle_term_unitary, simulate_noisy, tvd,
)

TABLE1 = {
    "exponential": [4, 48, 320, 1792],
    "givens": [3, 13, 41, 142],
    "redundant": [3, 13, 25, 42],
}


def _data_block(c: Circuit, psi):
    block = psi.reshape(2 ** c.width, -1)
    return block[:, 0], (np.abs(block[:, 1:]).max() if block.shape[1] > 1 else 0.0)


def test_table1_cells_and_measured_counts():
    t0 = time.perf_counter()
    rep = tables_report(cost.CostModel())
    formula = rep["table1"]["counts"]
    cells_ok = all(formula[meth][str(m)] == v for meth, vals in TABLE1.items() for m, v in enumerate(vals, 1))
    audit = rep["table1"]["audit"]
    within = all(r["ok"] for r in audit)
    devs = {(r["method"], r["m"]): r["deviation"] for r in audit if r["deviation"]}
    elapsed = time.perf_counter() - t0
    ok = cells_ok and within and len(audit) == 12 and elapsed < 10
    record_criterion(1, ok, f"12 formula cells exact={cells_ok}, deviations {devs}, {elapsed:.2f}s")
    assert cells_ok
    assert within
    assert elapsed < 10


def test_table2_formulas_and_reduction():
    t0 = time.perf_counter()
    rel = cost.CostModel(2, 3, "relative")
    lin = all(cost.cnot_count_table2("givens", rel, m) == 28 * m - 40
              and cost.cnot_count_table2("redundant", rel, m) == 20 * m - 32 for m in range(2, 7))
    r23 = cost.reduction_percent(rel)
    r100 = cost.reduction_percent(cost.CostModel(100, 3, "relative"))
    r100_full = cost.reduction_percent(cost.CostModel(100, 3, "full"))
    elapsed = time.perf_counter() - t0
    ok = (lin and abs(r23 - 2 / 7) < 1e-12 and round(100 * r23, 2) == 28.57
          and abs(r100 - 0.5) < 0.01 and abs(r100_full - 0.5) < 0.01 and elapsed < 1)
    record_criterion(2, ok, f"28m-40 / 20m-32 exact={lin}, reduction {100 * r23:.2f}% at A=2, "
                            f"{100 * r100:.2f}% at A=100, {elapsed * 1e3:.1f}ms")
    assert lin
    assert round(100 * r23, 2) == 28.57
    assert abs(r100 - 0.5) < 0.01
    assert elapsed < 1


def test_oracle_equivalence_all_methods():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240917)
    worst = {}
    for m in (1, 2, 3, 4):
        angles = rng.uniform(-math.pi, math.pi, 20)
        phys = physical_term_inputs(m)
        for method in ("redundant", "givens", "exponential"):
            inputs = phys if method == "redundant" else None
            err = max(term_error(method, m, th, "multiplex", inputs) for th in angles)
            worst[(method, m)] = err
    elapsed = time.perf_counter() - t0
    top = max(worst.values())
    ok = top < 1e-9 and elapsed < 60
    record_criterion(3, ok, f"max amplitude error {top:.2e} over m=1..4 x 20 angles x 3 methods, {elapsed:.1f}s")
    assert top < 1e-9
    assert elapsed < 60


# rows as (pair ket e_j g_j, q0) -> (amplitude, pair ket)
S_TABLE = {
    ("00", 0): (1, "00"), ("00", 1): (1, "00"),
    ("01", 0): (1, "01"), ("01", 1): (-1j, "11"),
    ("10", 0): (-1j, "11"), ("10", 1): (1, "01"),
}


def _s_table_ok() -> bool:
    # qubits: 0 = q0, 1 = unused partner of q0, 2 = g_j, 3 = e_j
    c = lowering.lower_circuit(lowering.build_pair_flag((2, 3), (0, 1), 4))
    for (pair, q0), (amp, out_pair) in S_TABLE.items():
        bits = f"{q0}0{pair[1]}{pair[0]}"
        psi = np.zeros(16, complex)
        psi[int(bits, 2)] = 1
        want = np.zeros(16, complex)
        want[int(f"{q0}0{out_pair[1]}{out_pair[0]}", 2)] = amp
        if np.abs(apply_circuit(c, psi) - want).max() > 1e-12:
            return False
    return True


def _calU_ok(m: int) -> float:
    pairs = [(2 * j, 2 * j + 1) for j in range(m)]
    c = lowering.lower_circuit(lowering.build_collapse(pairs))
    n = 2 * m
    g = int("10" * m, 2)
    e = int("01" * m, 2)
    g_out = int("11" * m, 2)          # q0 = 1, every other qubit set
    e_out = int("01" + "11" * (m - 1), 2)
    err = 0.0
    for src, dst in ((g, g_out), (e, e_out)):
        psi = np.zeros(2 ** n, complex)
        psi[src] = 1
        want = np.zeros(2 ** n, complex)
        want[dst] = (-1j) ** (m - 1)
        err = max(err, float(np.abs(apply_circuit(c, psi) - want).max()))
    return err


def test_S_j_table_and_calU_amplitude_law():
    table = _s_table_ok()
    errs = {m: _calU_ok(m) for m in (2, 3, 4)}
    ok = table and max(errs.values()) < 1e-12
    record_criterion(4, ok, f"six-row table exact={table}, (-i)^(m-1) law max error {max(errs.values()):.1e}")
    assert table
    assert max(errs.values()) < 1e-12


def test_redundant_lowering_uses_unphysical_subspace():
    found = {}
    theta = 0.7
    for m in (2, 3):
        pairs = [(2 * j, 2 * j + 1) for j in range(m)]
        c = lowering.lower_circuit(lowering.lower_term(pairs, theta, None, "redundant"))
        phys = set(physical_term_inputs(m))
        unphys = [x for x in range(4 ** m) if x not in phys]
        got = apply_circuit_batch(c, np.eye(4 ** m, dtype=complex)[unphys])
        want = oracle_term_unitary(m, theta)[:, unphys].T
        dev = np.abs(got - want).max(axis=1)
        k = int(np.argmax(dev))
        found[m] = (format(unphys[k], f"0{2 * m}b"), float(dev[k]))
    ok = all(d > 1e-3 for _, d in found.values())
    record_criterion(5, ok, "witnesses " + ", ".join(f"m={m}: |{b}> dev {d:.3f}" for m, (b, d) in found.items()))
    assert ok


def test_end_to_end_shipped_systems(s6, s8):
    t0 = time.perf_counter()
    details = []
    ok = True
    for name, a in (("S-6", s6), ("S-8", s8)):
        oracle = oracle_ansatz_state(a)
        states, cxs = {}, {}
        for method in ("redundant", "givens"):
            c = compile_ansatz(a, method)
            data, leak = _data_block(c, apply_circuit(c))
            states[method] = data
            cxs[method] = count_gates(c).cx
            ok &= np.abs(data - oracle).max() < 1e-9 and leak < 1e-9
        cross = tvd(distribution(states["redundant"]), distribution(states["givens"]))
        ok &= cross < 1e-9 and cxs["redundant"] < cxs["givens"]
        details.append(f"{name} cx {cxs['redundant']} vs {cxs['givens']}, tvd {cross:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    record_criterion(6, ok, "; ".join(details) + f", {elapsed:.1f}s")
    assert ok


def test_noise_ordering_s8(s8):
    t0 = time.perf_counter()
    exact = distribution(oracle_ansatz_state(s8))
    means = {}
    for method in ("redundant", "givens"):
        c = compile_ansatz(s8, method)
        tv = [tvd(simulate_noisy(c, NoiseModel(0.005, seed), 10_000), exact) for seed in range(20)]
        means[method] = float(np.mean(tv))
    elapsed = time.perf_counter() - t0
    ok = means["redundant"] < means["givens"] and elapsed < 300
    record_criterion(7, ok, f"mean TVD redundant {means['redundant']:.4f} < givens {means['givens']:.4f}, {elapsed:.0f}s")
    assert means["redundant"] < means["givens"]
    assert elapsed < 300


def test_pruning_soundness(s6, s8):
    worst = 0.0
    never_more = True
    for a, method, mcr in itertools.product((s6, s8), ("redundant", "givens"), ("multiplex", "ancilla")):
        pruned = compile_ansatz(a, method, mcr, prune=True)
        full = compile_ansatz(a, method, mcr, prune=False)
        pd, pleak = _data_block(pruned, apply_circuit(pruned))
        fd, fleak = _data_block(full, apply_circuit(full))
        worst = max(worst, float(np.abs(pd - fd).max()), pleak, fleak)
        never_more &= count_gates(pruned).cx <= count_gates(full).cx
    ok = worst < 1e-12 and never_more
    record_criterion(8, ok, f"max statevector difference {worst:.1e}, cx never increased={never_more}")
    assert worst < 1e-12
    assert never_more

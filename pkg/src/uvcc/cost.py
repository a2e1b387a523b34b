"""Closed-form CNOT counts and audits against built circuits.

Two accountings are offered:

* ancilla-free counts, where an n-controlled rotation costs ``2**n`` CX via
  the Gray-code multiplexor (``cnot_count_table1``);
* ancilla-assisted counts, where C^nX costs ``A*n - B`` Toffoli-class gates of
  6 CX (full) or 3 CX (relative phase) each (``cnot_count_table2``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .circuit import Circuit, count_gates
from .lowering import LoweringMethod, lower_circuit, lower_term

TOFFOLI_KINDS = ("full", "relative")


@dataclass(frozen=True)
class CostModel:
    A: int = 2
    B: int = 3
    toffoli_kind: str = "relative"

    def __post_init__(self):
        if self.toffoli_kind not in TOFFOLI_KINDS:
            raise ValueError(f"toffoli_kind must be one of {TOFFOLI_KINDS}, got {self.toffoli_kind!r}")

    def toffolis(self, n: int) -> int:
        return self.A * n - self.B

    def valid_for(self, method, m: int) -> bool:
        """True when every C^nX the method needs at order m has ``A*n - B >= 1``."""
        method = LoweringMethod.parse(method)
        n = 2 * m - 2 if method is LoweringMethod.GIVENS else m - 1
        return n >= 1 and self.toffolis(n) >= 1


def cancellation_credit(m: int) -> int:
    return 1 if m <= 3 else 0


def cnot_count_table1(method, m: int) -> int:
    method = LoweringMethod.parse(method)
    if m < 1:
        raise ValueError("m must be >= 1")
    if method is LoweringMethod.EXPONENTIAL:
        return 4 ** m * (2 * m - 1)
    if method is LoweringMethod.GIVENS:
        return 2 * (2 * m - 1) + 2 ** (2 * m - 1) - cancellation_credit(m)
    return (8 * m - 6) + 2 ** m - cancellation_credit(m)


def table1_formula(method) -> str:
    method = LoweringMethod.parse(method)
    if method is LoweringMethod.EXPONENTIAL:
        return "4^m(2m-1)"
    if method is LoweringMethod.GIVENS:
        return "2(2m-1) + 2^(2m-1) - c(m)"
    return "(8m-6) + 2^m - c(m)"


def _table2_linear(method, model: CostModel) -> tuple[int, int]:
    method = LoweringMethod.parse(method)
    A, B = model.A, model.B
    full = model.toffoli_kind == "full"
    if method is LoweringMethod.GIVENS:
        return ((24 * A + 4, -24 * A - 12 * B + 2) if full
                else (12 * A + 4, -12 * A - 6 * B + 2))
    if method is LoweringMethod.REDUNDANT:
        return ((12 * A + 8, -12 * A - 12 * B - 2) if full
                else (6 * A + 8, -6 * A - 6 * B - 2))
    raise ValueError("ancilla-assisted counts exist for givens and redundant only")


def cnot_count_table2(method, model: CostModel, m: int) -> int:
    if m < 2:
        raise ValueError("m must be >= 2")
    slope, icpt = _table2_linear(method, model)
    return slope * m + icpt


def table2_formula(method, model: CostModel) -> str:
    slope, icpt = _table2_linear(method, model)
    return f"{slope}m{icpt:+d}"


def toffoli_leading(method, model: CostModel, m: int | None = None) -> str:
    method = LoweringMethod.parse(method)
    if method is LoweringMethod.REDUNDANT:
        return f"{2 * (model.A + 2)}m + C"
    if method is LoweringMethod.GIVENS:
        return f"{4 * model.A}m + C'"
    raise ValueError("Toffoli counts exist for givens and redundant only")


def reduction_percent(model: CostModel, m: int | None = None) -> float:
    """Fractional CNOT saving of the redundant method over Givens.

    With ``m=None`` the ratio of slopes (the large-m limit) is used.
    """
    if m is None:
        rs, _ = _table2_linear("redundant", model)
        gs, _ = _table2_linear("givens", model)
        return 1 - rs / gs
    return 1 - cnot_count_table2("redundant", model, m) / cnot_count_table2("givens", model, m)


@dataclass
class CostReport:
    title: str
    counts: dict[str, dict[int, int]] = field(default_factory=dict)
    formulas: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "formulas": dict(sorted(self.formulas.items())),
            "counts": {k: {str(m): v for m, v in sorted(d.items())} for k, d in sorted(self.counts.items())},
        }


def table1_report(ms: Iterable[int] = (1, 2, 3, 4)) -> CostReport:
    rep = CostReport("ancilla-free CNOT counts")
    for meth in LoweringMethod:
        rep.formulas[meth.value] = table1_formula(meth)
        rep.counts[meth.value] = {m: cnot_count_table1(meth, m) for m in ms}
    return rep


def table2_report(model: CostModel, ms: Iterable[int] = (2, 3, 4, 5, 6)) -> CostReport:
    rep = CostReport(f"ancilla-assisted CNOT counts (A={model.A}, B={model.B}, {model.toffoli_kind} Toffoli)")
    for meth in (LoweringMethod.GIVENS, LoweringMethod.REDUNDANT):
        rep.formulas[meth.value] = table2_formula(meth, model)
        rep.counts[meth.value] = {m: cnot_count_table2(meth, model, m) for m in ms}
    return rep


# measured counts -------------------------------------------------------------

def term_circuit(method, m: int, mcr=None, theta: float = 0.3) -> Circuit:
    """Lowered single ``m``-excitation term on qubits ``0 .. 2m-1``, no peephole pass."""
    pairs = [(2 * j, 2 * j + 1) for j in range(m)]
    return lower_circuit(lower_term(pairs, theta, None, method), mcr)


def measured_cx(method, m: int, mcr=None) -> int:
    return count_gates(term_circuit(method, m, mcr)).cx


@dataclass(frozen=True)
class AuditRecord:
    method: str
    m: int
    expected: int
    measured: int
    mode: str

    @property
    def deviation(self) -> int:
        return self.measured - self.expected

    @property
    def ok(self) -> bool:
        if self.mode == "upper":
            return self.measured <= self.expected
        return 0 <= self.deviation <= 1

    def to_dict(self) -> dict:
        return {"method": self.method, "m": self.m, "expected": self.expected,
                "measured": self.measured, "deviation": self.deviation, "ok": self.ok}


def audit_counts(circuit: Circuit, expected: CostReport, method, m: int, mode: str = "within_one") -> AuditRecord:
    """Compare a lowered circuit's CX count with a report cell.

    ``within_one`` accepts a deviation of 0 or +1; ``upper`` accepts any
    measured count not above the formula.
    """
    method = LoweringMethod.parse(method).value
    measured = count_gates(circuit, "primitive").cx
    return AuditRecord(method, m, expected.counts[method][m], measured, mode)


def audit_table1(ms: Iterable[int] = (1, 2, 3, 4), mcr=None) -> list[AuditRecord]:
    ms = list(ms)
    rep = table1_report(ms)
    return [audit_counts(term_circuit(meth, m, mcr), rep, meth, m)
            for meth in LoweringMethod for m in ms]


def audit_table2(model: CostModel, ms: Iterable[int] = (2, 3, 4)) -> list[AuditRecord]:
    """Ancilla-lowered circuits against the full-Toffoli formula (an upper bound)."""
    ms = list(ms)
    full = CostModel(model.A, model.B, "full")
    rep = table2_report(full, ms)
    scheme = "ancilla" if model.toffoli_kind == "relative" else "ancilla-full"
    out = []
    for meth in ("givens", "redundant"):
        for m in ms:
            if full.valid_for(meth, m):
                out.append(audit_counts(term_circuit(meth, m, scheme), rep, meth, m, mode="upper"))
    return out

"""Circuit construction and analysis for vibrational coupled-cluster ansatze in the unary encoding."""

from .encoding import ModalState, ModeSpec, QubitLayout, decode_unary, encode_unary, qubit_count
from .circuit import Circuit, Control, Gate, GateCounts, count_gates, export_qasm, peephole_cancel
from .ansatz import AnsatzSpec, ExcitationTerm, build_ansatz
from .lowering import AncillaLadder, LoweringMethod, MultiplexExponential

__all__ = [
    "AncillaLadder", "AnsatzSpec", "Circuit", "Control", "ExcitationTerm", "Gate", "GateCounts",
    "LoweringMethod", "ModalState", "ModeSpec", "MultiplexExponential", "QubitLayout",
    "build_ansatz", "count_gates", "decode_unary", "encode_unary", "export_qasm",
    "peephole_cancel", "qubit_count",
]

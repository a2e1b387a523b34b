import pytest

from uvcc.ansatz import (
    AnsatzSpec, ExcitationTerm, InvalidTerm, build_ansatz, enumerate_reference_excitations,
    reference_circuit, term_qubits,
)
from uvcc.circuit import count_gates
from uvcc.encoding import ModeSpec, QubitLayout, encode_unary
from uvcc.simulator import apply_circuit, basis_state


def test_term_validation():
    with pytest.raises(InvalidTerm):
        ExcitationTerm(((0, 1, 1),))
    with pytest.raises(InvalidTerm):
        ExcitationTerm(((0, 0, 1), (0, 0, 1)))
    spec = ModeSpec.from_levels([2, 2])
    with pytest.raises(InvalidTerm):
        ExcitationTerm(((0, 0, 2),)).validate(spec)
    with pytest.raises(InvalidTerm):
        AnsatzSpec(spec, (1, 0), (ExcitationTerm(((0, 0, 1),)),))


def test_term_qubit_pairs():
    lay = QubitLayout.of(ModeSpec.from_levels([2, 2, 4]))
    t = ExcitationTerm.from_target((0, 0, 0), (1, 0, 3))
    assert term_qubits(t, lay) == [(0, 1), (4, 7)]
    assert t.order == 2


def test_enumeration_counts():
    spec = ModeSpec.from_levels([2, 2, 2])
    terms = enumerate_reference_excitations(spec, 3)
    assert len(terms) == 7
    assert [t.order for t in terms] == [3, 2, 2, 2, 1, 1, 1]
    spec8 = ModeSpec.from_levels([2, 2, 4])
    assert len(enumerate_reference_excitations(spec8, 3)) == 15
    assert len(enumerate_reference_excitations(spec8, 1)) == 5


def test_reference_circuit_prepares_reference():
    spec = ModeSpec.from_levels([2, 3])
    a = AnsatzSpec(spec, (1, 2))
    psi = apply_circuit(reference_circuit(a))
    assert abs(psi @ basis_state(encode_unary((1, 2), spec)).conj()) == pytest.approx(1)


def test_build_tiers(s6):
    comp = build_ansatz(s6, "redundant")
    assert not comp.is_primitive
    low = build_ansatz(s6, "redundant", lower=True)
    assert low.is_primitive
    assert low.width == 6
    assert count_gates(comp, "composite").mcry == 7


def test_with_angles_length():
    spec = ModeSpec.from_levels([2, 2])
    a = AnsatzSpec(spec, (0, 0), (ExcitationTerm(((0, 0, 1),)),))
    with pytest.raises(ValueError):
        a.with_angles([0.1, 0.2])
    assert a.with_angles([0.5]).terms[0].theta == 0.5

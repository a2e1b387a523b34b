import pytest
from hypothesis import given, strategies as st

from uvcc.encoding import (
    InvalidState, LengthMismatch, ModalState, ModeSpec, QubitLayout, decode_unary, encode_unary,
    enumerate_physical, format_ket, parse_ket, physical_fraction, qubit_count,
)

levels_st = st.lists(st.integers(2, 5), min_size=1, max_size=4)


@st.composite
def spec_and_state(draw):
    levels = draw(levels_st)
    occ = [draw(st.integers(0, d - 1)) for d in levels]
    return ModeSpec.from_levels(levels), occ


def test_encode_examples():
    assert encode_unary((0, 0, 0), ModeSpec.from_levels([2, 2, 2])) == "101010"
    assert encode_unary((1, 1, 3), ModeSpec.from_levels([2, 2, 4])) == "01010001"


def test_qubit_count():
    assert qubit_count(ModeSpec.from_levels([2, 2, 4])) == 8


@given(spec_and_state())
def test_roundtrip(data):
    spec, occ = data
    bits = encode_unary(occ, spec)
    assert len(bits) == qubit_count(spec)
    assert bits.count("1") == len(spec)
    assert decode_unary(bits, spec) == ModalState(occ)


@given(levels_st)
def test_physical_enumeration_size(levels):
    spec = ModeSpec.from_levels(levels)
    phys = enumerate_physical(spec)
    assert len(phys) == len(set(phys))
    assert len(phys) == physical_fraction(spec) * 2 ** qubit_count(spec)


def test_unphysical_decodes_to_none():
    spec = ModeSpec.from_levels([2, 2])
    assert decode_unary("1110", spec) is None
    assert decode_unary("0010", spec) is None


def test_errors():
    spec = ModeSpec.from_levels([2, 3])
    with pytest.raises(InvalidState):
        encode_unary((0, 3), spec)
    with pytest.raises(InvalidState):
        encode_unary((0,), spec)
    with pytest.raises(LengthMismatch):
        decode_unary("1010", spec)
    with pytest.raises(ValueError):
        ModeSpec.from_levels([1])


def test_layout_offsets():
    lay = QubitLayout.of(ModeSpec.from_levels([2, 2, 4]))
    assert lay.mode_offsets == (0, 2, 4)
    assert lay.qubit(2, 3) == 7
    with pytest.raises(InvalidState):
        lay.qubit(0, 2)


def test_ket_slot_order():
    assert format_ket((1, 1, 3)) == "|3,1,1>"
    assert parse_ket("|3,1,1>") == ModalState((1, 1, 3))
    assert parse_ket("|011>") == ModalState((1, 1, 0))
    assert format_ket((1, 1, 3), reverse=False) == "|1,1,3>"

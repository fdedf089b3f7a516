"""Data model: sparse matrices, nets, markings, steps."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from udpn import (Marking, Net, SparseMatrix, UdpnError, as_fraction, delta,
                  make_step, sorted_data)
from udpn.core import mode_matrix

from helpers import golden_net, golden_step


def random_matrix(rng, rows=3, cols=3, density=0.5):
    entries = {}
    for r in range(rows):
        for c in range(cols):
            if rng.random() < density:
                entries[(f"r{r}", f"c{c}")] = Fraction(rng.randint(-6, 6),
                                                       rng.randint(1, 4))
    return SparseMatrix(entries)


def test_as_fraction_rejects_floats():
    with pytest.raises(UdpnError):
        as_fraction(0.5)
    assert as_fraction("2/3") == Fraction(2, 3)
    assert as_fraction(7) == Fraction(7)


def test_sorted_data_is_lexicographic():
    assert sorted_data({"red", "blue", "green"}) == ["blue", "green", "red"]


def test_golden_delta_entries():
    net = golden_net()
    d = delta(net, "t")
    assert d.get("p1", "y") == -1
    assert d.get("p2", "x") == -1
    assert d.get("p3", "y") == 2
    assert d.get("p4", "x") == 1
    assert d.get("p4", "z") == 1
    assert len(d.raw()) == 5


def test_delta_cancellation():
    net = Net(["p"], ["t"], ["y"],
              flow_in={("p", "t"): {"y": 2}},
              flow_out={("t", "p"): {"y": 2}})
    assert delta(net, "t").is_zero()


def test_delta_unknown_transition():
    with pytest.raises(UdpnError):
        golden_net().delta("nope")


def test_matrix_add_scale_cancel():
    rng = random.Random(7)
    for _ in range(50):
        m = random_matrix(rng)
        assert m.add(m.scale(-1)).is_zero()


def test_matrix_add_sub_roundtrip():
    rng = random.Random(8)
    for _ in range(50):
        a = random_matrix(rng)
        b = random_matrix(rng)
        assert a.add(b).sub(b) == a


@given(st.integers(min_value=-20, max_value=20),
       st.integers(min_value=1, max_value=9))
def test_matrix_scale_exact(num, den):
    m = SparseMatrix({("r", "c"): Fraction(3, 7)})
    k = Fraction(num, den)
    assert m.scale(k).get("r", "c") == Fraction(3, 7) * k


def test_golden_delta_times_mode_is_difference():
    net = golden_net()
    step = golden_step(net)
    product = delta(net, "t").matmul(mode_matrix(step))
    expected = SparseMatrix({
        ("p1", "green"): -1, ("p2", "blue"): -1,
        ("p3", "green"): 2,
        ("p4", "blue"): 1, ("p4", "black"): 1,
    })
    assert product == expected


def test_identity_permutation_renames_columns():
    m = SparseMatrix({("x", "a"): Fraction(2), ("y", "b"): Fraction(3)})
    perm = SparseMatrix({("a", "b"): 1, ("b", "a"): 1})
    out = m.matmul(perm)
    assert out.get("x", "b") == 2
    assert out.get("y", "a") == 3
    assert len(out.raw()) == 2


def test_mode_matrix_shape():
    net = golden_net()
    step = golden_step(net)
    m = mode_matrix(step)
    for (_x, _a), v in m.items():
        assert v == 1
    assert m.rows() == set(net.vars_of("t"))
    for a in m.cols():
        assert sum(m.column(a).values()) <= 1
    for x in m.rows():
        assert sum(m.row(x).values()) == 1


def test_net_validation():
    with pytest.raises(UdpnError):
        Net(["p", "p"], ["t"], ["x"])
    with pytest.raises(UdpnError):
        Net(["p"], ["t"], ["x"], flow_in={("q", "t"): {"x": 1}})
    with pytest.raises(UdpnError):
        Net(["p"], ["t"], ["x"], flow_in={("p", "t"): {"w": 1}})
    with pytest.raises(UdpnError):
        Net(["p"], ["t"], ["x"], flow_in={("p", "t"): {"x": -1}})


def test_marking_validation():
    net = golden_net()
    with pytest.raises(UdpnError):
        Marking(net, {("nowhere", "red"): 1})
    m = Marking(net, {("p1", "red"): Fraction(1, 2), ("p2", "red"): 0})
    assert m.get("p1", "red") == Fraction(1, 2)
    assert m.dval() == {"red"}


def test_make_step_checks():
    net = golden_net()
    with pytest.raises(UdpnError):
        make_step(net, -1, "t", {"x": "a", "y": "b", "z": "c"})
    with pytest.raises(UdpnError):
        make_step(net, 1, "t", {"x": "a", "y": "b"})
    with pytest.raises(UdpnError):
        make_step(net, 1, "t", {"x": "a", "y": "a", "z": "c"})
    # assignments outside vars(t) are dropped
    step = make_step(net, 1, "t", {"x": "a", "y": "b", "z": "c", "w": "d"})
    assert set(step.mode) == {"x", "y", "z"}

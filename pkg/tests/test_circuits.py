import itertools

import pytest
from hypothesis import given, strategies as st

from ringproof.circuits import ONE, ZERO, Net, build_cla, build_ripple_carry, sig_value
from ringproof.oracle import _occurrences, bits, simulate


def _adder_net():
    net = Net()
    with net.circuit("A"):
        a, b, c = net.input_vector("a", 3)
        gate = net.adder([a, b, c], "s", "c", 0)
    return net, (a, b, c), gate


@pytest.mark.parametrize("ins, s, c", [((1, 0, 1), 0, 1), ((0, 0, 0), 0, 0), ((1, 1, 1), 1, 1)])
def test_full_adder_examples(ins, s, c):
    net, vs, gate = _adder_net()
    sim = simulate(net.build(), dict(zip(vs, ins)), [gate.sum_out, gate.carry_out])
    assert sim.outputs == [s, c]


def test_full_adder_exhaustive():
    net, vs, gate = _adder_net()
    f = net.build()
    for ins in itertools.product((0, 1), repeat=3):
        sim = simulate(f, dict(zip(vs, ins)), [gate.sum_out, gate.carry_out])
        assert sim.outputs[0] + 2 * sim.outputs[1] == sum(ins)


def test_adder_folds_constants():
    net = Net()
    with net.circuit("A"):
        a, b = net.input_vector("a", 2)
        half = net.adder([a, b], "s", "c", 0)
        wire = net.adder([a], "s2", "c2", 0)
    assert half.kind == "half"
    assert wire.kind == "wire" and wire.carry_out == ZERO
    assert net.xor([ONE, ONE], "z", 0) == ZERO


def _add(circ, x, y, occ=None):
    return simulate(circ.formula, {**bits(circ.x, x), **bits(circ.y, y)}, circ.o, occ).value


def test_ripple_examples():
    assert _add(build_ripple_carry(4), 5, 6) == 11
    c = build_ripple_carry(1)
    sim = simulate(c.formula, {c.x[0]: 1, c.y[0]: 1}, c.o)
    assert sim.outputs == [0, 1]


def test_cla_wraps_all_groups():
    assert _add(build_cla(16), 0xFFFF, 1) == 0x10000


def test_cla_block_signals():
    c = build_cla(4)
    sim = simulate(c.formula, {**bits(c.x, 0b1111), **bits(c.y, 0)}, c.o)
    names = c.formula.name_to_var()
    assert sim.values[names["p^A_{1,0}"]] == 1
    assert sim.values[names["g^A_{1,0}"]] == 0


@pytest.mark.parametrize("build", [build_ripple_carry, build_cla])
@pytest.mark.parametrize("n", range(1, 7))
def test_adders_exhaustive(build, n):
    circ = build(n)
    occ = _occurrences(circ.formula)
    for x in range(1 << n):
        for y in range(1 << n):
            assert _add(circ, x, y, occ) == x + y


@given(st.integers(1, 24).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1), st.integers(0, 2**n - 1))))
def test_cla_random_wide(data):
    n, x, y = data
    assert _add(build_cla(n), x, y) == x + y


def test_sig_value_constants():
    assert sig_value(ONE, {}) == 1 and sig_value(ZERO, {}) == 0
    assert sig_value(-3, {3: 1}) == 0

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gapedit.audit import apm_equivalence
from gapedit.core_strings import GridBox, Interval, exact_edit_distance
from gapedit.intervals import Stack, WeightedBox
from gapedit.shortcut_graph import (BoxArray, apm, augment, column_costs_oracle,
                                    cost_via_shortcuts_oracle, partition_array,
                                    partition_by_horizontal, stack_costs)

I = Interval
WB = WeightedBox


def test_oracle_examples():
    b = GridBox(I(0, 8), I(0, 8))
    assert cost_via_shortcuts_oracle([], b) == 16
    assert cost_via_shortcuts_oracle([WB(I(0, 8), I(0, 8), Fraction(0))], b) == 0
    half = WB(I(0, 4), I(0, 4), Fraction(1, 4))
    assert cost_via_shortcuts_oracle([half], b) == 9


def test_oracle_ignores_boxes_outside():
    b = GridBox(I(0, 4), I(4, 8))
    outside = WB(I(0, 4), I(0, 4), Fraction(0))
    assert cost_via_shortcuts_oracle([outside], b) == 8


def test_oracle_refuses_huge_grids():
    with pytest.raises(ValueError):
        cost_via_shortcuts_oracle([], GridBox(I(0, 1000), I(0, 1000)), limit=10_000)


def test_column_costs_match_single_queries():
    boxes = [WB(I(0, 2), I(3, 5), Fraction(1, 2)), WB(I(2, 4), I(5, 7), Fraction(0))]
    h = I(0, 4)
    col = column_costs_oracle(boxes, GridBox(h, I(0, 10)))
    for y in range(0, 11):
        assert col[y] == cost_via_shortcuts_oracle(boxes, GridBox(h, I(0, y)))


def test_apm_examples():
    h = I(0, 4)
    J = I(4, 8)
    assert apm(Stack(h, [J]), 0, [WB(h, J, Fraction(0))]) == [J]
    assert apm(Stack(h, [I(4, 8), I(6, 10)]), Fraction(1, 4), []) == []
    assert apm(Stack(h, []), 1, []) == []


def test_apm_rejects_bad_stacks():
    with pytest.raises(ValueError):
        apm(Stack(I(0, 4), [I(4, 6)]), 1, [])
    with pytest.raises(ValueError):
        apm(Stack(I(0, 4), [I(4, 8)]), 1, [WB(I(2, 6), I(4, 8), Fraction(0))])


def test_augment_adds_free_edges():
    out = augment(I(4, 8), [I(0, 4), I(6, 10), I(6, 10)], [])
    assert out == [WB(I(4, 4), I(0, 6), Fraction(0))]


@given(st.data())
def test_stack_costs_match_oracle(data):
    w = data.draw(st.sampled_from([1, 2, 4, 8]))
    hlo = data.draw(st.integers(0, 8)) * w
    h = I(hlo, hlo + w)
    boxes = []
    for _ in range(data.draw(st.integers(0, 8))):
        a = data.draw(st.integers(h.lo, h.hi - 1))
        b = data.draw(st.integers(a + 1, h.hi))
        c = data.draw(st.integers(0, 24))
        d = data.draw(st.integers(c, c + 2 * (b - a)))
        boxes.append(WB(I(a, b), I(c, d), Fraction(data.draw(st.integers(0, 6)), 2 * (b - a))))
    los = sorted(set(data.draw(st.lists(st.integers(0, 24), min_size=1, max_size=6))))
    vs = [I(s, s + w) for s in los]
    arr = BoxArray.from_boxes(boxes, scale=2 * w * 8)
    got = stack_costs(h.lo, w, np.array(los), w, arr)
    col = column_costs_oracle(augment(h, vs, boxes), GridBox(h, I(0, max(v.hi for v in vs))))
    assert [Fraction(int(c), arr.scale) for c in got] == [col[v.hi] for v in vs]


def test_apm_equivalence_small_batch():
    eq, p61 = apm_equivalence(60, seed=3, max_width=16, max_boxes=12, max_stack=8)
    assert eq.ok, eq.examples
    assert p61.ok, p61.examples
    assert eq.checked > 0


def test_apm_uncertified_boxes_still_match_oracle():
    eq, _ = apm_equivalence(40, seed=4, max_width=16, max_boxes=12, max_stack=8, certified=False)
    assert eq.ok, eq.examples


def test_apm_completeness_and_soundness_on_exact_boxes(rng):
    # R = every square sub-box certified with its true cost
    n = 8
    z = rng.integers(0, 2, 2 * n)
    h = I(0, n)
    boxes = [WB(h, I(s, s + n), Fraction(exact_edit_distance(z[0:n], z[s:s + n]), n))
             for s in range(0, n + 1)]
    vs = [I(s, s + n) for s in range(0, n + 1)]
    for num in range(0, 2 * n + 1):
        kappa = Fraction(num, 2 * n)
        got = set(apm(Stack(h, vs), kappa, boxes))
        for v in vs:
            c = exact_edit_distance(z[0:n], z[v.lo:v.hi])
            if c <= kappa * n:
                assert v in got
            if c > 2 * kappa * n:
                assert v not in got


def test_partition_examples():
    fam = [I(0, 8), I(8, 16)]
    assert partition_by_horizontal([], fam) == {I(0, 8): [], I(8, 16): []}
    a = WB(I(0, 4), I(0, 4), Fraction(0))
    b = WB(I(4, 8), I(4, 8), Fraction(0))
    got = partition_by_horizontal([a, b], fam)
    assert got[I(0, 8)] == [a, b] and got[I(8, 16)] == []
    with pytest.raises(ValueError):
        partition_by_horizontal([WB(I(6, 10), I(0, 4), Fraction(0))], fam)


def test_partition_array_groups_by_aligned_block():
    boxes = [WB(I(0, 4), I(0, 4), Fraction(0)), WB(I(8, 12), I(0, 4), Fraction(0)),
             WB(I(4, 8), I(0, 4), Fraction(1, 4))]
    parts = partition_array(BoxArray.from_boxes(boxes), 8)
    assert sorted(parts) == [0, 8]
    assert parts[0].hlo.tolist() == [0, 4] and parts[8].hlo.tolist() == [8]
    with pytest.raises(ValueError):
        partition_array(BoxArray.from_boxes([WB(I(6, 10), I(0, 4), Fraction(0))]), 8)


def test_box_array_round_trip():
    boxes = [WB(I(0, 4), I(2, 6), Fraction(3, 8)), WB(I(4, 8), I(4, 8), Fraction(0))]
    arr = BoxArray.from_boxes(boxes)
    assert arr.to_boxes() == boxes
    with pytest.raises(ValueError):
        BoxArray.from_boxes([WB(I(0, 4), I(0, 4), Fraction(1, 3))], scale=4)

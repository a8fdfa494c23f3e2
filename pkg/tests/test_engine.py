from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapedit.audit import (audit_engine, enumerate_soundness, final_soundness)
from gapedit.core_strings import GapDecision, Text, exact_edit_distance
from gapedit.engine import (BudgetExceeded, GapEngine, ThetaInadmissible, grid_union, main_gap,
                            run_gap, scaled_threshold)
from gapedit.parameters import custom_profile, derive_schedule

from conftest import random_pair

PRACTICAL = dict(mode="practical:0", levels=1)
# two levels whose second one is not trivially dense at n = 1024: the
# closeness exponent is chained (5 >= q_1 + 1 + 1) but q_2 is kept small
DEEP = custom_profile([0, 3, 6], [0, 5], slack=0)


def schedule(n, **kw):
    return derive_schedule(1, n, **kw)


def test_helpers():
    assert scaled_threshold(64, 3) == 8
    assert scaled_threshold(64, -2) == 256
    got = grid_union(np.array([0, 5]), np.array([4, 9]), 2)
    assert got.tolist() == [0, 2, 4, 6, 8]
    assert grid_union(np.array([3]), np.array([3]), 2).size == 0


@pytest.mark.parametrize("n", [16, 64, 256])
@pytest.mark.parametrize("mode", ["theoretical", "practical:0", "practical:2"])
def test_identical_strings_accept(n, mode, rng):
    x = rng.integers(97, 101, n)
    p = schedule(n, mode=mode, levels=None if n >= 128 and mode != "practical:0" else 1)
    for e in range(0, p.log_n + 1):
        assert main_gap(x, x, Fraction(1, 2 ** e), p, strict=False) == GapDecision.ACCEPT


def test_strict_mode_refuses_small_theta():
    p = schedule(1024)
    x = np.zeros(1024, dtype=np.int64)
    assert main_gap(x, x, 1, p) == GapDecision.ACCEPT
    with pytest.raises(ThetaInadmissible):
        main_gap(x, x, Fraction(1, 2), p)


def test_level_one_has_no_lower_structures(rng):
    x, y = random_pair(rng, 256)
    eng = run_gap(x, y, Fraction(1, 16), schedule(256, **PRACTICAL), strict=False)
    assert eng.bbelow(1, 0, 3) is None
    assert eng.sparse_sample(1, 0, 3).size == 0


def test_rejects_mismatched_schedule():
    p = schedule(256, **PRACTICAL)
    with pytest.raises(ValueError):
        GapEngine(Text.from_pair("a" * 128, "a" * 128), p, 1)
    with pytest.raises(ValueError):
        GapEngine(Text.from_pair("a" * 256, "a" * 256), p, 9)


def test_enumerate_single_identical_member():
    x = "abcd" * 16
    eng = GapEngine(Text.from_pair(x, x), schedule(64, **PRACTICAL), 4)
    eng.process_dense(1)
    assert eng.enumerate(1, 0, np.array([64]), 4).tolist() == [64]


@pytest.mark.parametrize("seed", range(4))
def test_same_seed_same_run(seed, rng):
    x, y = random_pair(rng, 256, edits=8)
    p = schedule(256, **PRACTICAL)
    a = run_gap(x, y, Fraction(1, 32), p, seed=seed, strict=False)
    b = run_gap(x, y, Fraction(1, 32), p, seed=seed, strict=False)
    assert a.decision == b.decision and a.steps == b.steps
    assert a.final_cost == b.final_cost
    for j in a.R:
        assert np.array_equal(a.R[j].vlo, b.R[j].vlo) and np.array_equal(a.R[j].cost, b.R[j].cost)


def test_enumerate_consistency_across_stacks(rng):
    """Membership of J does not depend on the other stack members."""
    n = 1024
    x, y = random_pair(rng, n, edits=n // 32)
    p = derive_schedule(1, n, profile=DEEP)
    ref = run_gap(x, y, Fraction(1, 2 ** 9), p, seed=5, strict=False)
    w = p.w[2]
    fam = ref.family(w, 9 + 3)
    checked = 0
    for I in ref.horizontal(w)[:4].tolist():
        full = set(ref.enumerate(2, I, fam, 9).tolist())
        for J in fam[:: max(1, fam.size // 12)].tolist():
            fresh = GapEngine(ref.text, p, 9, seed=5)
            fresh.process_dense(1)
            assert (J in set(fresh.enumerate(2, I, np.array([J]), 9).tolist())) == (J in full)
            checked += 1
    assert checked > 10


@pytest.mark.parametrize("mode,levels", [("practical:0", 1), ("practical:2", None), ("theoretical", None)])
def test_audits_pass(mode, levels, rng):
    for _ in range(3):
        x, y = random_pair(rng, 256)
        p = schedule(256, mode=mode, levels=levels)
        for e in (2, 4, 6, 8):
            eng = run_gap(x, y, Fraction(1, 2 ** e), p, seed=int(rng.integers(1000)), strict=False)
            for res in audit_engine(eng):
                assert res.ok, (res.name, res.examples)


def test_deep_level_paths_run_and_stay_sound(rng):
    n = 1024
    p = derive_schedule(1, n, profile=DEEP)
    for s in range(2):
        x, y = random_pair(rng, n, edits=n // 32)
        eng = run_gap(x, y, Fraction(1, 2 ** 10), p, seed=s, strict=False)
        st2 = eng.stats[2]
        assert st2.bbelow_built > 0 and st2.samples_built > 0 and st2.pivots > 0
        assert enumerate_soundness(eng).ok
        assert final_soundness(eng).ok


def test_unchained_closeness_is_caught_by_the_audit(rng):
    # close_2 = 1 ignores the level-1 loss; the audit must notice
    n = 1024
    p = derive_schedule(1, n, profile=custom_profile([0, 3, 4], [0, 1], slack=1))
    x, y = random_pair(rng, n, edits=n // 64)
    eng = run_gap(x, y, Fraction(1, 2 ** 8), p, seed=1, strict=False)
    assert not enumerate_soundness(eng).ok


def test_bbelow_contains_diagonal_for_equal_halves(rng):
    n = 1024
    x = rng.integers(97, 101, n)
    p = derive_schedule(1, n, profile=DEEP)
    eng = run_gap(x, x, Fraction(1, 2 ** 8), p, seed=0, strict=False)
    w = p.w[2]
    for I in eng.horizontal(w).tolist():
        for i in (2, 5, 8):
            assert eng.bbelow(2, I, i)[I + n]


def test_budget(rng):
    x, y = random_pair(rng, 256, edits=4)
    p = schedule(256, **PRACTICAL)
    full = run_gap(x, y, Fraction(1, 16), p, seed=1, strict=False)
    with pytest.raises(BudgetExceeded):
        run_gap(x, y, Fraction(1, 16), p, seed=1, strict=False, budget=full.steps // 2)
    again = run_gap(x, y, Fraction(1, 16), p, seed=1, strict=False, budget=full.steps)
    assert again.decision == full.decision


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 6), st.integers(0, 64))
def test_accept_implies_quality_bound(seed, e, edits):
    n = 64
    rng = np.random.default_rng(seed)
    x, y = random_pair(rng, n, alphabet=2, edits=edits)
    p = schedule(n, mode="practical:0", levels=1)
    if main_gap(x, y, Fraction(1, 2 ** e), p, seed=seed, strict=False):
        assert exact_edit_distance(x, y) <= Fraction(p.Q * n, 2 ** e)


def test_report_rows(rng):
    x, y = random_pair(rng, 64)
    eng = run_gap(x, y, Fraction(1, 4), schedule(64, **PRACTICAL), strict=False)
    rows = dict(eng.report())
    assert rows["decision"] in ("ACCEPT", "REJECT")
    assert rows["level_1_width"] == str(eng.w[1])

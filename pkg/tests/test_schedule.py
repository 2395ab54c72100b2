from fractions import Fraction

import pytest

import congest_mwm.reduction.schedule as schedule
from congest_mwm.graph import make_instance, nu_exact
from congest_mwm.reduction import (
    FORCE_MERGE,
    MERGE_SMALLEST,
    RAISE_SMALLEST,
    algorithm1_mwm,
    ladder_schedule,
    merge_smallest_class,
    raise_smallest_class,
)

F = Fraction


def _replay(base, top, eps, cap):
    # literal loop on an explicit instance: one edge per class on a matching
    n = 2 * (top + 1)
    inst = make_instance(n, [(2 * j, 2 * j + 1, base**j) for j in range(top + 1)])
    records = []
    for c in range(top + 1, 1, -1):
        k = 0
        while True:
            w1, w2 = inst.distinct_weights()[:2]
            if (w2 - w1) / w1 <= eps / c:
                inst, _, rec = merge_smallest_class(inst, None, eps, t=c)
                break
            if k == cap:
                inst, _, rec = merge_smallest_class(inst, None, eps, force=True, t=c)
                break
            inst, rec = raise_smallest_class(inst, None, eps, c)
            records.append(rec)
            eps = rec.epsilon_after
            k += 1
        records.append(rec)
        eps = rec.epsilon_after
    return records, eps, inst


@pytest.mark.parametrize(
    "base, top, eps, cap",
    [(F(8, 7), 2, F(3, 8), 12), (F(8, 7), 5, F(3, 8), 3), (F(12, 11), 4, F(1, 4), 20), (F(4, 3), 3, F(1, 2), 0)],
)
def test_schedule_matches_literal_replay(base, top, eps, cap):
    records, final_eps, inst = _replay(base, top, eps, cap)
    res = ladder_schedule(base, top, eps, cap)
    assert res.epsilon_raw == final_eps
    assert [(r.kind, r.rho, r.epsilon_before) for r in res.records] == [
        (r.kind, r.rho, r.epsilon_before) for r in records
    ]
    assert len(inst.distinct_weights()) == 1
    assert res.force_merge_count == sum(r.kind == FORCE_MERGE for r in records)


def test_schedule_trivial_ladder():
    res = ladder_schedule(F(2), 0, F(1, 4))
    assert res.records == () and res.epsilon_raw == F(1, 4)


def test_two_class_schedule_replays_algorithm1():
    # a two-class instance whose x-ladder has exactly two classes
    eps = F(1, 4)
    x = 1 / (1 - eps / 2)
    inst = make_instance(3, [(0, 1, 1), (1, 2, x)])
    _, trace = algorithm1_mwm(inst, eps, lambda g, e: nu_exact(g).matching)
    assert trace.loop_classes == 2
    res = ladder_schedule(x, 1, trace.loop_epsilon)
    assert res.epsilon_raw == trace.epsilon_unweighted_raw


def test_schedule_errors():
    with pytest.raises(ValueError):
        ladder_schedule(F(1), 3, F(1, 2))
    with pytest.raises(ValueError):
        ladder_schedule(F(2), -1, F(1, 2))
    with pytest.raises(ValueError):
        ladder_schedule(F(2), 3, F(0))


def _per_class(res):
    out = {}
    for r in res.records:
        slot = out.setdefault(r.class_count_before, [0, None, F(0)])
        if r.kind == RAISE_SMALLEST:
            slot[0] += r.repeat
        else:
            slot[1] = r.kind
        slot[2] += r.rho
    return out


@pytest.mark.parametrize("top, eps, cap", [(40, F(3, 8), 12), (25, F(1, 4), None)])
def test_interval_mode_agrees_with_exact_mode(monkeypatch, top, eps, cap):
    base = F(16, 15)
    schedule._cached_schedule.cache_clear()
    monkeypatch.setattr(schedule, "EXACT_EPS_BITS", 1 << 40)
    monkeypatch.setattr(schedule, "EXACT_VALUE_BITS", 1 << 40)
    reference = ladder_schedule(base, top, eps, cap)
    assert all(r.exact for r in reference.records)
    exact, exact_raw = _per_class(reference), reference.epsilon_raw
    schedule._cached_schedule.cache_clear()
    monkeypatch.setattr(schedule, "EXACT_EPS_BITS", 48)
    monkeypatch.setattr(schedule, "EXACT_VALUE_BITS", 48)
    fast = ladder_schedule(base, top, eps, cap)
    schedule._cached_schedule.cache_clear()
    assert fast.epsilon_raw == exact_raw
    assert any(not r.exact for r in fast.records)
    approx = _per_class(fast)
    assert sorted(approx) == sorted(exact)
    for c, (k, kind, rho) in exact.items():
        assert approx[c][:2] == [k, kind]
        # inexact records only ever overstate the raise
        assert approx[c][2] >= rho
        assert approx[c][2] - rho < F(1, 10**3)


def test_merges_only_when_gap_is_cheap():
    res = ladder_schedule(F(12, 11), 6, F(1, 4))
    for r in res.records:
        if r.kind == MERGE_SMALLEST:
            assert r.rho <= r.epsilon_before / r.class_count_before

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gpk.crp import (
    GroupOutcome,
    check_conjecture8,
    deletion_conditional_eppf,
    expected_kstar,
    expected_s,
    group_outcome_prob,
    joint_kstar_s,
    new_sizes_marginal,
    pmf_kstar,
    pmf_s,
    pmf_s_given_kstar,
    prob_all_new,
    prob_all_old,
    prob_avoid_tables,
    sample_group,
    sample_groups,
    sample_next,
)
from gpk.gibbs import DirichletProcess, ExplicitTable, PartitionState, PitmanYor
from gpk.numerics import rising_factorial
from gpk.oracle import block_sizes, brute_group_law, enumerate_partitions

S1 = PartitionState((1,))
S21 = PartitionState((2, 1))

# Frozen from an exact-rational brute force over sequential seatings, PY(1/2, 1/2).


def test_joint_state1_m2(py55):
    joint = joint_kstar_s(py55, S1, 2).as_dict()
    expected = {(0, 0): 1 / 5, (1, 1): 4 / 15, (1, 2): 2 / 15, (2, 2): 2 / 5}
    assert joint.keys() == expected.keys()
    for key, p in expected.items():
        assert joint[key] == pytest.approx(p, abs=1e-15)
    assert prob_all_new(py55, S1, 2) == pytest.approx(8 / 15, abs=1e-15)


def test_kstar_state1_m3(py55):
    got = pmf_kstar(py55, S1, 3)
    assert list(got.probs) == pytest.approx([1 / 7, 2 / 7, 12 / 35, 8 / 35], abs=1e-15)


def test_state21_values(py55):
    assert prob_all_old(py55, S21, 2) == pytest.approx(8 / 21, abs=1e-15)
    assert prob_avoid_tables(py55, S21, 2, 1) == pytest.approx(16 / 21, abs=1e-15)
    assert new_sizes_marginal(py55, S21, 3, (1, 1)) == pytest.approx(16 / 77, abs=1e-15)
    ps = pmf_s(py55, S21, 3)
    assert list(ps.probs) == pytest.approx([64 / 231, 24 / 77, 20 / 77, 5 / 33], abs=1e-15)
    assert expected_s(py55, S21, 3) == pytest.approx(9 / 7, rel=1e-14)


def test_expected_s_small(py55):
    assert expected_s(py55, PartitionState((1, 1)), 1) == pytest.approx(0.6, rel=1e-14)


def test_m_zero(py55):
    assert joint_kstar_s(py55, S21, 0).as_dict() == {(0, 0): 1.0}
    assert prob_all_old(py55, S21, 0) == 1.0
    assert pmf_kstar(py55, S21, 0).as_dict() == {0: 1.0}


def test_empty_state(py55):
    empty = PartitionState()
    assert prob_all_new(py55, empty, 4) == pytest.approx(1.0, abs=1e-14)
    pk = pmf_kstar(py55, empty, 4)
    assert pk[0] == 0.0
    assert pk.total == pytest.approx(1.0, abs=1e-14)
    # the first customer always opens a table
    assert pmf_kstar(py55, empty, 1).as_dict() == pytest.approx({0: 0.0, 1: 1.0})
    with pytest.raises(ValueError):
        check_conjecture8(py55, empty, 3)


def test_group_outcome_prob_validation(py55):
    with pytest.raises(ValueError):
        group_outcome_prob(py55, S21, GroupOutcome((1,), ()))
    with pytest.raises(ValueError):
        GroupOutcome((-1,), ())
    with pytest.raises(ValueError):
        new_sizes_marginal(py55, S21, 2, (2, 1))
    with pytest.raises(ValueError):
        pmf_s(py55, S21, -1)


def test_outcome_apply():
    o = GroupOutcome((0, 2), (1, 3))
    assert (o.s, o.m, o.kstar) == (4, 6, 2)
    assert o.apply(S21).sizes == (2, 3, 1, 3)


@pytest.mark.parametrize("sizes", [(1,), (2, 1), (1, 1, 1), (3, 1)])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_closed_forms_match_enumeration(sizes, m):
    for model in (PitmanYor(0.3, 1.7), DirichletProcess(0.8)):
        state = PartitionState(sizes)
        law = brute_group_law(model, state, m)
        by_s = {}
        by_k = {}
        for o, p in law.items():
            by_s[o.s] = by_s.get(o.s, 0.0) + p
            by_k[o.kstar] = by_k.get(o.kstar, 0.0) + p
        for s, p in by_s.items():
            assert pmf_s(model, state, m)[s] == pytest.approx(p, abs=1e-13)
        for j, p in by_k.items():
            assert pmf_kstar(model, state, m)[j] == pytest.approx(p, abs=1e-13)


def test_conditional_law(py55):
    joint = joint_kstar_s(py55, S21, 5).as_dict()
    pk = pmf_kstar(py55, S21, 5)
    for j in range(1, 6):
        cond = pmf_s_given_kstar(py55, S21, 5, j)
        assert cond.total == pytest.approx(1.0, abs=1e-13)
        for s, p in cond.items():
            assert p * pk[j] == pytest.approx(joint[(j, s)], abs=1e-14)
    with pytest.raises(ValueError):
        pmf_s_given_kstar(py55, S21, 5, 6)


def test_expected_kstar_matches_pmf(py55):
    pk = pmf_kstar(py55, S21, 10)
    assert expected_kstar(py55, S21, 10) == pytest.approx(sum(j * p for j, p in pk.items()))


def test_pitman_yor_closed_form():
    alpha, theta = 0.35, 1.4
    model = PitmanYor(alpha, theta)
    state = PartitionState((4, 2, 1))
    n, k, m = state.n, state.k, 12
    ps = pmf_s(model, state, m)
    for s in range(m + 1):
        want = math.comb(m, s) * float(
            rising_factorial(n - k * alpha, m - s) * rising_factorial(theta + k * alpha, s) / rising_factorial(theta + n, m)
        )
        assert ps[s] == pytest.approx(want, rel=1e-12)
    assert expected_s(model, state, m) == pytest.approx(m * (theta + k * alpha) / (theta + n), rel=1e-12)


def test_large_group_stays_finite():
    model = PitmanYor(0.5, 3.0)
    state = PartitionState((100, 50, 20))
    ps = pmf_s(model, state, 300)
    assert ps.total == pytest.approx(1.0, abs=1e-10)
    assert expected_s(model, state, 300) == pytest.approx(300 * (3.0 + 1.5) / 173, rel=1e-10)


def test_avoidance_monotone_in_r(py55):
    state = PartitionState((3, 2, 1))
    vals = [prob_avoid_tables(py55, state, 4, r) for r in range(4)]
    assert vals == sorted(vals)
    assert vals[-1] == pytest.approx(1.0, abs=1e-13)
    assert vals[0] == pytest.approx(prob_all_new(py55, state, 4), rel=1e-13)
    strict = prob_avoid_tables(py55, state, 4, 2, include_all_old=False)
    # strict form drops exactly the all-old outcomes that stay on tables 1..2
    law = brute_group_law(py55, state, 4)
    drop = sum(p for o, p in law.items() if o.s == 0 and o.old_increments[2] == 0)
    assert vals[2] - strict == pytest.approx(drop, abs=1e-14)
    with pytest.raises(ValueError):
        prob_avoid_tables(py55, state, 4, 4)


def test_deletion_eppf(py55):
    total = math.fsum(
        deletion_conditional_eppf(py55, S21, (1, 0), block_sizes(rgs)) for rgs in enumerate_partitions(4)
    )
    assert total == pytest.approx(1.0, abs=1e-13)
    a = deletion_conditional_eppf(py55, S21, (2, 0), (2, 1))
    b = deletion_conditional_eppf(py55, S21, (1, 1), (2, 1))
    assert a == pytest.approx(b, rel=1e-14)
    with pytest.raises(ValueError):
        deletion_conditional_eppf(py55, S21, (1,), (2,))
    with pytest.raises(ValueError):
        deletion_conditional_eppf(py55, S21, (1, 0), ())


def recursion_table(seed, alpha=0.4, size=45):
    rng = np.random.default_rng(seed)
    return ExplicitTable.from_boundary(alpha, rng.uniform(0.5, 2.0, size))


@pytest.mark.parametrize(
    "model", [PitmanYor(0.5, 0.5), DirichletProcess(2.0), recursion_table(1)], ids=["py", "dp", "table"]
)
def test_mean_identity(model):
    for sizes in [(1,), (3, 1), (5, 2, 2, 1)]:
        for m in (1, 5, 20):
            rep = check_conjecture8(model, PartitionState(sizes), m)
            assert rep.passed, rep


def test_conjecture8_report_fields(py55):
    rep = check_conjecture8(py55, S21, 6)
    assert rep.polya_mean == pytest.approx(rep.target, rel=1e-10)
    assert math.isfinite(rep.pmf_gap_exact_polya)
    quiet = check_conjecture8(py55, S21, 6, explore=False)
    assert math.isnan(quiet.pmf_gap_exact_shifted)
    assert quiet.rel_gap == rep.rel_gap


def test_sample_next(py55):
    rng = np.random.default_rng(0)
    state = sample_next(py55, PartitionState(), rng)
    assert state.sizes == (1,)
    for _ in range(20):
        state = sample_next(py55, state, rng)
    assert state.n == 21


def test_sampler_matches_kstar_law(py55):
    rng = np.random.default_rng(12345)
    draws = sample_groups(py55, S21, 3, 20_000, rng)
    freq = np.bincount([o.kstar for o in draws], minlength=4) / len(draws)
    exact = np.array(pmf_kstar(py55, S21, 3).probs)
    assert 0.5 * np.abs(freq - exact).sum() < 0.02


def test_sampler_is_seeded(py55):
    a = [sample_group(py55, S21, 5, np.random.default_rng(7)) for _ in range(3)]
    b = [sample_group(py55, S21, 5, np.random.default_rng(7)) for _ in range(3)]
    assert a == b
    assert all(o.m == 5 for o in a)


@given(
    st.floats(0.0, 0.9),
    st.floats(0.1, 5.0),
    st.lists(st.integers(1, 6), min_size=1, max_size=5),
    st.integers(0, 25),
)
def test_laws_normalize(alpha, theta, sizes, m):
    model = PitmanYor(alpha, theta)
    state = PartitionState(tuple(sizes))
    assert joint_kstar_s(model, state, m).total == pytest.approx(1.0, abs=1e-11)
    assert pmf_kstar(model, state, m).total == pytest.approx(1.0, abs=1e-11)
    ps = pmf_s(model, state, m)
    if m:
        assert ps[m] == pytest.approx(prob_all_new(model, state, m), rel=1e-11, abs=1e-300)
    assert ps[0] == pytest.approx(prob_all_old(model, state, m), rel=1e-11, abs=1e-300)

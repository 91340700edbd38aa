"""Acceptance criteria 1-10.

Each test prints one ``[PASS]``/``[FAIL]`` line with the measured residual
and the tolerance it was held to. Run with ``pytest tests/test_acceptance.py``
(lines are printed even under capture) or directly with ``python3``.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpk import crp
from gpk.cli import main as cli_main, sample_rows
from gpk.gibbs import DirichletProcess, ExplicitTable, PartitionState, PitmanYor
from gpk.numerics import rising_factorial
from gpk.oracle import (
    bell_by_enumeration,
    bell_by_multiplicities,
    connection_coefficients,
    enumerate_compositions,
    total_probability,
    unsigned_stirling_first,
)
from gpk.stirling import StirlingTable, noncentral_row
from gpk.verify import rel_err, suite_conjecture8, suite_deletion, suite_group

PY55 = PitmanYor(0.5, 0.5)
DP1 = DirichletProcess(1.0)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}  ({detail})")
        assert ok, detail

    return emit


def test_criterion_01_normalization(report):
    t0 = time.perf_counter()
    worst = max(
        abs(total_probability(model, n) - 1.0)
        for model in (PY55, PitmanYor(0.25, 1.0), DP1)
        for n in range(1, 11)
    )
    elapsed = time.perf_counter() - t0
    report(1, "EPPF sums to one over all set partitions, n <= 10", worst <= 1e-10 and elapsed < 10,
           f"max abs err {worst:.2e} <= 1e-10, {elapsed:.1f}s < 10s")


def test_criterion_02_stirling_connection(report):
    conn = 0.0
    for alpha in (0.1, 0.5, 0.9):
        table = StirlingTable(alpha, 25)
        for x in (0.3, 1.0, 2.7):
            for n in range(26):
                lhs = float(rising_factorial(x, n))
                rhs = math.fsum(float(table.get(n, k) * rising_factorial(x, k, alpha)) for k in range(n + 1))
                conn = max(conn, rel_err(rhs, lhs))
    bell = 0.0
    for alpha in (0.1, 0.5, 0.9):
        table = StirlingTable(alpha, 12)
        a = Fraction(alpha)
        # weights (1 - alpha)_{j-1}, exact in the binary value of alpha
        w = [math.prod((1 - a + i for i in range(j - 1)), start=Fraction(1)) for j in range(1, 13)]
        for n in range(1, 13):
            for k in range(1, n + 1):
                bell = max(bell, rel_err(float(table.get(n, k)), float(bell_by_multiplicities(n, k, w))))
        wf = [float(x) for x in w]
        for n in range(1, 10):
            for k in range(1, n + 1):
                bell = max(bell, rel_err(float(table.get(n, k)), bell_by_enumeration(n, k, wf)))
    report(2, "connection identity n <= 25 and recurrence vs Bell sum n <= 12", conn <= 1e-9 and bell <= 1e-10,
           f"identity rel err {conn:.2e} <= 1e-9, Bell rel err {bell:.2e} <= 1e-10")


def test_criterion_03_noncentral(report):
    alpha = 0.5
    ident, conv = 0.0, 0.0
    for gamma in (-3.0, -0.7, 0.4):
        for n in range(16):
            row = noncentral_row(alpha, gamma, n)
            for y in (1.0, 2.5):
                lhs = float(rising_factorial(y * alpha - gamma, n))
                rhs = math.fsum(float(row[k] * rising_factorial(y * alpha, k, alpha)) for k in range(n + 1))
                ident = max(ident, rel_err(rhs, lhs))
            exact = connection_coefficients(alpha, gamma, n)
            for k in range(n + 1):
                conv = max(conv, rel_err(float(row[k]), float(exact[k])))
    report(3, "non-central identity n <= 15 and convolution vs connection coefficients",
           ident <= 1e-9 and conv <= 1e-9, f"identity rel err {ident:.2e}, convolution rel err {conv:.2e}, tol 1e-9")


def test_criterion_04_group_vs_sequential(report):
    t0 = time.perf_counter()
    checks = suite_group(PY55, n=5, m=4) + suite_group(DP1, n=5, m=4)
    elapsed = time.perf_counter() - t0
    worst = max(c.residual for c in checks)
    names = sorted({c.name.split()[0] for c in checks})
    report(4, f"{len(names)} closed forms vs enumerated sequential seating, n <= 5, m <= 4",
           worst <= 1e-12 and elapsed < 60, f"max abs diff {worst:.2e} <= 1e-12, {elapsed:.1f}s < 60s")


def _py_closed_form(alpha, theta, state, m):
    """Exact pmf of S and its mean from rising factorials in rational arithmetic."""
    a, t = Fraction(alpha), Fraction(theta)
    n, k = state.n, state.k

    def rise(x, r):
        return math.prod((x + i for i in range(r)), start=Fraction(1))

    denom = rise(t + n, m)
    pmf = [math.comb(m, s) * rise(n - k * a, m - s) * rise(t + k * a, s) / denom for s in range(m + 1)]
    return pmf, m * (t + k * a) / (t + n)


def test_criterion_05_pitman_yor_closed_forms(report):
    rng = np.random.default_rng(20240605)
    worst = 0.0
    for _ in range(20):
        alpha = float(rng.uniform(0.0, 0.95))
        theta = float(rng.uniform(-alpha + 0.05, 10.0))
        k = int(rng.integers(1, 6))
        state = PartitionState(tuple(int(x) for x in rng.integers(1, 8, size=k)))
        m = int(rng.integers(1, 31))
        model = PitmanYor(alpha, theta)
        exact, mean = _py_closed_form(alpha, theta, state, m)
        got = crp.pmf_s(model, state, m)
        for s in range(m + 1):
            worst = max(worst, rel_err(got[s], float(exact[s])))
        worst = max(worst, rel_err(crp.expected_s(model, state, m), float(mean)))
    report(5, "Pitman-Yor law and mean of S, 20 random cases, m <= 30", worst <= 1e-11,
           f"max rel err {worst:.2e} <= 1e-11")


def test_criterion_06_mean_identity(report):
    rng = np.random.default_rng(8)
    models = {"PY(0.5,0.5)": PY55, "DP(1)": DP1}
    for i in range(5):
        alpha = float(rng.uniform(0.0, 0.9))
        boundary = rng.lognormal(0.0, 1.0, size=41)
        models[f"table{i}(alpha={alpha:.3f})"] = ExplicitTable.from_boundary(alpha, boundary)
    worst = 0.0
    for model in models.values():
        (check,) = suite_conjecture8(model, n=20, m=20)
        worst = max(worst, check.residual)
    report(6, f"E(S) = m V[n+1,k+1]/V[n,k] for {len(models)} models, n <= 20, m <= 20", worst <= 1e-10,
           f"max rel gap {worst:.2e} <= 1e-10")


def test_criterion_07_deletion(report):
    norm, inv = 0.0, 0.0
    for model in (PY55, DP1, PitmanYor(0.25, 1.0)):
        normalize, invariance = suite_deletion(model, n=4, s=6)
        norm, inv = max(norm, normalize.residual), max(inv, invariance.residual)
    report(7, "deletion EPPF normalizes for s <= 6 and ignores old-table increments",
           norm <= 1e-12 and inv <= 1e-12, f"norm err {norm:.2e}, spread {inv:.2e}, tol 1e-12")


def test_criterion_08_alpha_zero(report):
    table = StirlingTable(0.0, 12)
    ints = unsigned_stirling_first(12)
    bad = [(n, k) for n in range(13) for k in range(n + 1) if round(float(table.get(n, k))) != ints[n][k]]
    report(8, "alpha = 0 table equals unsigned Stirling numbers of the first kind, n <= 12", not bad,
           f"{len(bad)} mismatches")


def test_criterion_09_sampler(report, tmp_path):
    state, m, reps, seed = PartitionState((2, 1)), 3, 100_000, 2024
    counts = np.zeros(m + 1)
    for _, _, outcome in sample_rows(PY55, state, m, seed, reps):
        counts[outcome.kstar] += 1
    exact = np.array(crp.pmf_kstar(PY55, state, m).probs)
    tv = 0.5 * float(np.abs(counts / reps - exact).sum())
    paths = [tmp_path / f"run{i}.csv" for i in range(3)]
    argv = ["sample", "--sizes", "2,1", "--m", "3", "--seed", str(seed), "--reps", str(reps)]
    for i, path in enumerate(paths):
        workers = ["--workers", "4"] if i == 2 else []
        assert cli_main(argv + workers + ["--output", str(path)]) == 0
    blobs = [p.read_bytes() for p in paths]
    same = blobs[0] == blobs[1] == blobs[2]
    report(9, "10^5 seeded group draws at state (2,1), m = 3", tv <= 0.01 and same,
           f"TV {tv:.4f} <= 0.01, reruns byte-identical: {same}")


# Property suites for the rising-factorial identities.
N_EXAMPLES = 1000
pos = st.floats(0.05, 5.0)
# Signed real arguments can put a factor x + i h within rounding of zero, where
# two algebraically equal evaluation orders disagree in every digit. Signed
# cases therefore use dyadic values (every factor exact) and reals stay
# positive and at least 1e-3, which also keeps results inside double range.
scaled = st.floats(1e-3, 5.0)
dyadic = st.integers(-320, 320).map(lambda i: i / 64)
pair = st.one_of(st.tuples(scaled, scaled), st.tuples(dyadic, dyadic))
point = st.one_of(scaled, st.floats(-5.0, -1e-3), dyadic)


def _run_property(body, strategy_args):
    seen = []
    worst = [0.0]

    @settings(max_examples=N_EXAMPLES, deadline=None, database=None)
    @given(st.tuples(*strategy_args))
    def prop(args):
        seen.append(1)
        err = body(*args)
        worst[0] = max(worst[0], err)

    prop()
    return len(seen), worst[0]


def _multiplicative(xh, n, r):
    x, h = xh
    lhs = rising_factorial(x, n + r, h)
    rhs = rising_factorial(x, n, h) * rising_factorial(x + n * h, r, h)
    if lhs.is_zero or rhs.is_zero:
        return 0.0 if lhs.is_zero and rhs.is_zero else math.inf
    return abs(math.expm1(lhs.log_mag - rhs.log_mag)) + (lhs.sign != rhs.sign)


def _binomial(x, y, h, n):
    lhs = float(rising_factorial(x + y, n, h))
    rhs = math.fsum(
        math.comb(n, k) * float(rising_factorial(x, k, h) * rising_factorial(y, n - k, h)) for k in range(n + 1)
    )
    return rel_err(rhs, lhs)


def _multinomial(xs, h, n):
    lhs = float(rising_factorial(math.fsum(xs), n, h))
    terms = []
    for comp in enumerate_compositions(n, len(xs), allow_zero=True):
        coef = math.factorial(n) // math.prod(math.factorial(c) for c in comp)
        terms.append(coef * float(math.prod((rising_factorial(x, c, h) for x, c in zip(xs, comp)),
                                            start=rising_factorial(1.0, 0))))
    return rel_err(math.fsum(terms), lhs)


def _shift(z, n, m):
    lhs = rising_factorial(z, n + m - 1)
    rhs = rising_factorial(z, m - 1) * rising_factorial(z + (m - 1), n)
    if lhs.is_zero or rhs.is_zero:
        return 0.0 if lhs.is_zero and rhs.is_zero else math.inf
    return abs(math.expm1(lhs.log_mag - rhs.log_mag)) + (lhs.sign != rhs.sign)


def _mean_identity(x, y, m):
    denom = rising_factorial(x + y, m)
    mean = math.fsum(
        s * math.comb(m, s) * float(rising_factorial(x, s) * rising_factorial(y, m - s) / denom)
        for s in range(m + 1)
    )
    return rel_err(mean, m * x / (x + y))


def test_criterion_10_numerics_properties(report):
    ints30 = st.integers(0, 30)
    suites = {
        "multiplicative law": (_multiplicative, (pair, ints30, ints30), 1e-12),
        "binomial formula": (_binomial, (pos, pos, pos, st.integers(0, 20)), 1e-10),
        "multinomial theorem": (_multinomial, (st.lists(pos, min_size=1, max_size=4), pos, st.integers(0, 10)), 1e-10),
        "shift law": (_shift, (point, st.integers(0, 40), st.integers(1, 40)), 1e-12),
        "mean identity": (_mean_identity, (pos, pos, st.integers(1, 15)), 1e-10),
    }
    rows, ok = [], True
    for name, (body, strategies, tol) in suites.items():
        count, worst = _run_property(body, strategies)
        ok &= count >= N_EXAMPLES and worst <= tol
        rows.append(f"{name}: {count} cases, {worst:.1e} <= {tol:.0e}")
    report(10, "rising-factorial identities under randomized property suites", ok, "; ".join(rows))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))

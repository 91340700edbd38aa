"""Named invariant suites run by ``gpk verify``.

Each suite returns a list of :class:`Check` rows; a suite passes when every
row does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import crp
from .gibbs import GibbsModel, PartitionState, validate_backward_recursion
from .numerics import rising_factorial
from .oracle import (
    block_sizes,
    brute_group_law,
    connection_coefficients,
    enumerate_compositions,
    enumerate_partitions,
    labelled_multiplicity,
    ordered_partition_count,
    total_probability,
)
from .stirling import StirlingTable, noncentral_row


@dataclass
class Check:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<48} residual={self.residual:.3e}  tol={self.tol:.0e}"


def all_states(n_max: int):
    """Every block-size sequence (composition) with ``1 <= n <= n_max``."""
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            for sizes in enumerate_compositions(n, k):
                yield PartitionState(sizes)


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b else abs(a)


def suite_normalization(model: GibbsModel, n: int = 8, tol: float = 1e-10, **_):
    return [
        Check(f"sum of eppf over partitions of [{j}]", abs(total_probability(model, j) - 1.0), tol)
        for j in range(1, n + 1)
    ]


def suite_stirling(model: GibbsModel, nmax: int = 25, tol: float = 1e-9, **_):
    checks = []
    for alpha in sorted({0.1, 0.5, 0.9, model.alpha}):
        table = StirlingTable(alpha, nmax)
        worst = 0.0
        for x in (0.3, 1.0, 2.7):
            for n in range(nmax + 1):
                lhs = float(rising_factorial(x, n))
                rhs = math.fsum(float(table.get(n, k) * rising_factorial(x, k, alpha)) for k in range(n + 1))
                worst = max(worst, rel_err(rhs, lhs))
        checks.append(Check(f"connection identity alpha={alpha}", worst, tol))
        if alpha != 0:
            worst = 0.0
            for n in range(min(nmax, 12) + 1):
                exact = connection_coefficients(alpha, 0, n)
                for k in range(n + 1):
                    worst = max(worst, rel_err(float(table.get(n, k)), float(exact[k])))
            checks.append(Check(f"recurrence vs exact coefficients alpha={alpha}", worst, 1e-10))
    return checks


def suite_noncentral(model: GibbsModel, nmax: int = 15, tol: float = 1e-9, **_):
    checks = []
    alpha = model.alpha if model.alpha != 0 else 0.5
    for gamma in (-3.0, -0.7, 0.4):
        worst = 0.0
        for y in (1.0, 2.5):
            for n in range(nmax + 1):
                row = noncentral_row(alpha, gamma, n)
                lhs = float(rising_factorial(y * alpha - gamma, n))
                rhs = math.fsum(float(row[k] * rising_factorial(y * alpha, k, alpha)) for k in range(n + 1))
                worst = max(worst, rel_err(rhs, lhs))
        checks.append(Check(f"non-central identity gamma={gamma}", worst, tol))
    return checks


def _group_checks(model, state, m):
    """Max abs differences between every closed form and the enumerated group law."""
    law = brute_group_law(model, state, m)
    joint_b, s_b, k_b, sizes_b = {}, {}, {}, {}
    for o, p in law.items():
        joint_b[(o.kstar, o.s)] = joint_b.get((o.kstar, o.s), 0.0) + p
        s_b[o.s] = s_b.get(o.s, 0.0) + p
        k_b[o.kstar] = k_b.get(o.kstar, 0.0) + p
        sizes_b[o.new_block_sizes] = sizes_b.get(o.new_block_sizes, 0.0) + p
    out = {}
    out["group_outcome_prob"] = max(
        abs(labelled_multiplicity(o) * crp.group_outcome_prob(model, state, o) - p) for o, p in law.items()
    )
    joint = crp.joint_kstar_s(model, state, m).as_dict()
    out["joint_kstar_s"] = max(abs(joint.get(key, 0.0) - joint_b.get(key, 0.0)) for key in set(joint) | set(joint_b))
    ps = crp.pmf_s(model, state, m).as_dict()
    out["pmf_s"] = max(abs(ps.get(s, 0.0) - s_b.get(s, 0.0)) for s in range(m + 1))
    pk = crp.pmf_kstar(model, state, m).as_dict()
    out["pmf_kstar"] = max(abs(pk.get(s, 0.0) - k_b.get(s, 0.0)) for s in range(m + 1))
    out["new_sizes_marginal"] = max(
        abs(ordered_partition_count(sz) * crp.new_sizes_marginal(model, state, m, sz) - p)
        for sz, p in sizes_b.items()
    )
    if m:
        all_new = sum(p for o, p in law.items() if o.s == m)
        out["prob_all_new"] = abs(crp.prob_all_new(model, state, m) - all_new)
    all_old = sum(p for o, p in law.items() if o.s == 0)
    out["prob_all_old"] = abs(crp.prob_all_old(model, state, m) - all_old)
    worst = 0.0
    for r in range(state.k + 1):
        avoid = sum(p for o, p in law.items() if not any(o.old_increments[r:]))
        worst = max(worst, abs(crp.prob_avoid_tables(model, state, m, r) - avoid))
    out["prob_avoid_tables"] = worst
    return out


def suite_group(model: GibbsModel, n: int = 5, m: int = 4, tol: float = 1e-12, **_):
    worst = {}
    for state in all_states(n):
        for mm in range(m + 1):
            for name, val in _group_checks(model, state, mm).items():
                worst[name] = max(worst.get(name, 0.0), val)
    return [Check(f"{name} vs enumeration", val, tol) for name, val in worst.items()]


def suite_avoidance(model: GibbsModel, n: int = 5, m: int = 4, tol: float = 1e-12, **_):
    worst = 0.0
    for state in all_states(n):
        for mm in range(1, m + 1):
            law = brute_group_law(model, state, mm)
            for r in range(state.k + 1):
                kept = sum(p for o, p in law.items() if not any(o.old_increments[r:]))
                worst = max(worst, abs(crp.prob_avoid_tables(model, state, mm, r) - kept))
                strict = sum(p for o, p in law.items() if not any(o.old_increments[r:]) and o.kstar)
                worst = max(
                    worst, abs(crp.prob_avoid_tables(model, state, mm, r, include_all_old=False) - strict)
                )
    return [Check("avoidance probability vs enumeration", worst, tol)]


def suite_conjecture8(model: GibbsModel, n: int = 20, m: int = 20, tol: float = 1e-10, **_):
    worst = 0.0
    for nn in range(1, n + 1):
        for k in range(1, nn + 1):
            sizes = [1] * k
            sizes[0] += nn - k
            state = PartitionState(tuple(sizes))
            for mm in range(0, m + 1):
                if model.n_max is not None and nn + mm + 1 > model.n_max:
                    continue
                worst = max(worst, crp.check_conjecture8(model, state, mm, tol, explore=False).rel_gap)
    return [Check("E(S) = m V[n+1,k+1] / V[n,k]", worst, tol)]


def suite_deletion(model: GibbsModel, n: int = 4, s: int = 6, tol: float = 1e-12, **_):
    norm, invariance = 0.0, 0.0
    for state in all_states(n):
        for ss in range(1, s + 1):
            for extra in range(0, 3):
                incs = list(enumerate_compositions(extra, state.k, allow_zero=True))
                total = math.fsum(
                    crp.deletion_conditional_eppf(model, state, incs[0], block_sizes(rgs))
                    for rgs in enumerate_partitions(ss)
                )
                norm = max(norm, abs(total - 1.0))
                vals = [crp.deletion_conditional_eppf(model, state, inc, (ss,)) for inc in incs]
                invariance = max(invariance, max(vals) - min(vals))
    return [
        Check("deletion EPPF normalizes over partitions of [s]", norm, tol),
        Check("deletion EPPF invariant to old-table increments", invariance, tol),
    ]


def suite_recursion(model: GibbsModel, nmax: int = 30, tol: float = 1e-9, **_):
    size = nmax if model.n_max is None else min(nmax, model.n_max)
    report = validate_backward_recursion(model, size, tol)
    return [Check(f"backward recursion up to n={size}", report.max_residual, tol)]


SUITES = {
    "normalization": suite_normalization,
    "stirling": suite_stirling,
    "stirling-identities": suite_stirling,
    "noncentral": suite_noncentral,
    "group": suite_group,
    "group-vs-sequential": suite_group,
    "avoidance": suite_avoidance,
    "conjecture8": suite_conjecture8,
    "deletion": suite_deletion,
    "recursion": suite_recursion,
}


def run_suite(name: str, model: GibbsModel, **params) -> list[Check]:
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}") from None
    return fn(model, **{k: v for k, v in params.items() if v is not None})

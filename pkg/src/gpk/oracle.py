"""Exhaustive small-case enumeration used as ground truth by the test suite.

Nothing in here uses Stirling numbers or the group-law closed forms: group
probabilities come from chaining single-customer EPPF ratios, and Stirling
numbers come from partition enumeration or exact rational arithmetic.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from fractions import Fraction
from typing import Iterator, Sequence

from .gibbs import GibbsModel, PartitionState, eppf

MAX_PARTITION_N = 13
MAX_GROUP_N = 6
MAX_GROUP_M = 5


def enumerate_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Set partitions of ``[n]`` as restricted-growth strings, in lexicographic order."""
    if not 1 <= n <= MAX_PARTITION_N:
        raise ValueError(f"partition enumeration needs 1 <= n <= {MAX_PARTITION_N}, got {n}")
    a = [0] * n
    # prefix_max[i] = max(a[0..i])
    prefix_max = [0] * n
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] > prefix_max[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        prefix_max[i] = max(prefix_max[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            prefix_max[j] = prefix_max[i]


def block_sizes(rgs: Sequence[int]) -> tuple[int, ...]:
    """Block sizes in order of appearance (blocks are numbered by first appearance)."""
    sizes = [0] * (max(rgs) + 1 if rgs else 0)
    for b in rgs:
        sizes[b] += 1
    return tuple(sizes)


def enumerate_compositions(n: int, k: int, allow_zero: bool = False) -> Iterator[tuple[int, ...]]:
    """Ordered ``k``-vectors of positive (or non-negative) integers summing to ``n``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    low = 0 if allow_zero else 1
    if k == 1:
        if n >= low:
            yield (n,)
        return
    for first in range(low, n - low * (k - 1) + 1):
        for rest in enumerate_compositions(n - first, k - 1, allow_zero):
            yield (first,) + rest


def bell_by_enumeration(n: int, k: int, w: Sequence[float]) -> float:
    """``B_{n,k}(w)`` summed literally over the partitions of ``[n]`` with ``k`` blocks."""
    total = []
    for rgs in enumerate_partitions(n):
        sizes = block_sizes(rgs)
        if len(sizes) == k:
            total.append(math.prod(w[s - 1] for s in sizes))
    return math.fsum(total)


def integer_partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of the integer ``n`` as non-increasing tuples."""
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in integer_partitions(n - first, first):
            yield (first,) + rest


def bell_by_multiplicities(n: int, k: int, w: Sequence) -> Fraction:
    """Exact ``B_{n,k}(w)`` from the explicit multiplicity formula.

    Each integer partition of ``n`` into ``k`` parts contributes
    ``n! / prod(j!^c_j c_j!) * prod(w_j^c_j)``, where ``c_j`` counts parts equal to ``j``.
    """
    w = [Fraction(x) for x in w]
    total = Fraction(0)
    for parts in integer_partitions(n):
        if len(parts) != k:
            continue
        counts = Counter(parts)
        ways = math.factorial(n)
        term = Fraction(1)
        for j, c in counts.items():
            ways //= math.factorial(j) ** c * math.factorial(c)
            term *= w[j - 1] ** c
        total += ways * term
    return total


def unsigned_stirling_first(n_max: int) -> list[list[int]]:
    """Integer table ``c(n, k)`` from ``c(n+1, k) = c(n, k-1) + n c(n, k)``."""
    c = [[1]]
    for n in range(n_max):
        prev = c[-1] + [0]
        c.append([0] + [prev[k - 1] + n * prev[k] for k in range(1, n + 2)])
    return c


def _poly_mul_linear(poly, a, b):
    """Multiply a coefficient list (ascending powers of y) by ``a*y + b``."""
    out = [Fraction(0)] * (len(poly) + 1)
    for i, c in enumerate(poly):
        out[i] += b * c
        out[i + 1] += a * c
    return out


def connection_coefficients(alpha, gamma, n: int) -> list[Fraction]:
    """Exact coefficients ``c_k`` with ``(y alpha - gamma)_n = sum_k c_k (y alpha)_{k, alpha}``.

    ``alpha`` and ``gamma`` are converted to exact fractions (floats keep
    their binary value). Both sides are expanded as polynomials in ``y``;
    the basis ``(y alpha)_{k, alpha} = alpha^k (y)_k`` is triangular, so the
    coefficients are peeled off from the top degree. With ``gamma = 0`` these
    are the central numbers ``S(n, k; alpha)``.
    """
    alpha, gamma = Fraction(alpha), Fraction(gamma)
    if alpha == 0:
        raise ValueError("alpha must be non-zero for the polynomial route")
    target = [Fraction(1)]
    for i in range(n):
        target = _poly_mul_linear(target, alpha, -gamma + i)
    basis = [[Fraction(1)]]
    for k in range(n):
        basis.append(_poly_mul_linear(basis[-1], alpha, alpha * k))
    coeffs = [Fraction(0)] * (n + 1)
    rem = target[:]
    for k in range(n, -1, -1):
        c = rem[k] / basis[k][k]
        coeffs[k] = c
        for i, b in enumerate(basis[k]):
            rem[i] -= c * b
    if any(rem):
        raise ArithmeticError("connection expansion left a remainder")
    return coeffs


def total_probability(model: GibbsModel, n: int) -> float:
    """Sum of the EPPF over every set partition of ``[n]``.

    The EPPF is symmetric, so values are cached by sorted block sizes; the
    sum itself still visits every partition.
    """
    cache = {}
    terms = []
    for rgs in enumerate_partitions(n):
        key = tuple(sorted(block_sizes(rgs)))
        p = cache.get(key)
        if p is None:
            p = cache[key] = eppf(model, key)
        terms.append(p)
    return math.fsum(terms)


def _seatings(model, sizes, m, prob):
    """Yield ``(final sizes, probability)`` for every labelled seating of ``m`` customers."""
    if m == 0:
        yield sizes, prob
        return
    base = eppf(model, sizes)
    for j in range(len(sizes) + 1):
        if j < len(sizes):
            nxt = sizes[:j] + (sizes[j] + 1,) + sizes[j + 1 :]
        else:
            nxt = sizes + (1,)
        step = eppf(model, nxt) / base
        yield from _seatings(model, nxt, m - 1, prob * step)


def brute_group_law(model: GibbsModel, state: PartitionState, m: int) -> dict:
    """Exact law of the group outcome, by enumerating all sequential seatings.

    Each path multiplies the single-customer ratios ``p(n^{j+}) / p(n)`` and
    is aggregated by its ``GroupOutcome``.
    """
    from .crp import GroupOutcome

    if state.n > MAX_GROUP_N or m > MAX_GROUP_M or m < 0:
        raise ValueError(
            f"group enumeration limited to n <= {MAX_GROUP_N}, 0 <= m <= {MAX_GROUP_M}"
        )
    k = state.k
    law = defaultdict(list)
    for final, prob in _seatings(model, state.sizes, m, 1.0):
        inc = tuple(final[j] - state.sizes[j] for j in range(k))
        law[GroupOutcome(inc, final[k:])].append(prob)
    return {outcome: math.fsum(ps) for outcome, ps in law.items()}


def ordered_partition_count(sizes: Sequence[int]) -> int:
    """Number of set partitions of ``[sum(sizes)]`` whose blocks, in order of
    least element, have exactly these sizes."""
    count, remaining = 1, sum(sizes)
    for s in sizes:
        count *= math.comb(remaining - 1, s - 1)
        remaining -= s
    return count


def labelled_multiplicity(outcome) -> int:
    """How many labelled seatings of the group share this aggregate outcome."""
    m, s = outcome.m, outcome.s
    ways = math.factorial(m) // math.factorial(s)
    for mj in outcome.old_increments:
        ways //= math.factorial(mj)
    return ways * ordered_partition_count(outcome.new_block_sizes)

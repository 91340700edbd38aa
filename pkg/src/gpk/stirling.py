"""Partial Bell polynomials and generalized Stirling numbers ``S(n, k; alpha)``.

``S(n, k; alpha)`` are the connection coefficients in

    (x)_{n, 1} = sum_k S(n, k; alpha) (x)_{k, alpha}

and coincide with the partial Bell polynomial ``B_{n,k}`` evaluated at the
weights ``w_j = (1 - alpha)_{j - 1, 1}``.
"""

from __future__ import annotations

import math
import threading
from typing import Sequence

import numpy as np

from .numerics import SignedLogValue, log_sum, rising_factorial


def bell_polynomial(n: int, k: int, w: Sequence[float]) -> SignedLogValue:
    """Partial Bell polynomial ``B_{n,k}(w_1, ..., w_{n-k+1})``.

    ``w[0]`` is ``w_1``. Evaluated by conditioning on the block that holds
    element 1, ``B_{n,k} = sum_i C(n-1, i-1) w_i B_{n-i,k-1}``, which is the
    set-partition sum regrouped and needs no enumeration.
    """
    if k <= 0 or k > n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    if len(w) < n - k + 1:
        raise ValueError(f"need at least {n - k + 1} weights, got {len(w)}")
    # row[j] holds B_{j, kk} for the current number of blocks kk
    row = [1.0] + [0.0] * n
    for kk in range(1, k + 1):
        new = [0.0] * (n + 1)
        for j in range(kk, n + 1):
            new[j] = math.fsum(
                math.comb(j - 1, i - 1) * w[i - 1] * row[j - i]
                for i in range(1, j - kk + 2)
            )
        row = new
    return SignedLogValue.of(row[n])


class StirlingTable:
    """Triangular table of ``log S(n, k; alpha)`` for ``0 <= k <= n <= n_max``.

    Built eagerly by ``S(n+1, k) = S(n, k-1) + (n - k alpha) S(n, k)`` in the
    log domain. Every term is positive for ``alpha < 1``, so the recurrence
    never cancels. Read-only after construction.
    """

    def __init__(self, alpha: float, n_max: int):
        if not alpha < 1:
            raise ValueError(f"alpha must be < 1, got {alpha}")
        if n_max < 0:
            raise ValueError("n_max must be non-negative")
        self.alpha = float(alpha)
        self.n_max = int(n_max)
        logs = np.full((n_max + 1, n_max + 1), -np.inf)
        logs[0, 0] = 0.0
        for n in range(n_max):
            k = np.arange(1, n + 1)
            logs[n + 1, 1 : n + 1] = np.logaddexp(
                logs[n, 0:n], np.log(n - k * self.alpha) + logs[n, 1 : n + 1]
            )
            logs[n + 1, n + 1] = 0.0
        logs.setflags(write=False)
        self._logs = logs

    def __repr__(self):
        return f"StirlingTable(alpha={self.alpha!r}, n_max={self.n_max})"

    def log(self, n: int, k: int) -> float:
        self._check(n)
        if k < 0 or k > n:
            return -math.inf
        return float(self._logs[n, k])

    def get(self, n: int, k: int) -> SignedLogValue:
        return SignedLogValue.from_log(self.log(n, k))

    def row(self, n: int) -> np.ndarray:
        """``log S(n, k)`` for ``k = 0..n``."""
        self._check(n)
        return self._logs[n, : n + 1]

    def block(self, n: int) -> np.ndarray:
        """``log S(s, j)`` for ``0 <= s, j <= n``, indexed ``[s, j]``."""
        self._check(n)
        return self._logs[: n + 1, : n + 1]

    def _check(self, n):
        if n < 0 or n > self.n_max:
            raise IndexError(f"n={n} outside table range [0, {self.n_max}]")


_tables: dict[str, StirlingTable] = {}
_tables_lock = threading.Lock()


def stirling_table(alpha: float, n_max: int) -> StirlingTable:
    """Shared table for ``alpha`` covering at least ``n_max`` rows.

    Keyed on the exact bit pattern of ``alpha``; a larger table replaces a
    smaller one when more rows are requested.
    """
    key = float(alpha).hex()
    with _tables_lock:
        table = _tables.get(key)
        if table is None or table.n_max < n_max:
            size = max(n_max, 2 * table.n_max if table else 64)
            table = StirlingTable(alpha, size)
            _tables[key] = table
        return table


def stirling(table: StirlingTable, n: int, k: int) -> SignedLogValue:
    """``S(n, k; table.alpha)``; zero outside ``0 <= k <= n``."""
    return table.get(n, k)


def noncentral_row(alpha: float, gamma: float, n: int) -> list[SignedLogValue]:
    """Non-central numbers ``S(n, k; alpha, gamma)`` for ``k = 0..n``.

    ``S(n, k; alpha, gamma) = sum_{s=k}^{n} C(n, s) S(s, k; alpha) (-gamma)_{n-s, 1}``.
    """
    table = stirling_table(alpha, n)
    shifts = [math.comb(n, s) * rising_factorial(-gamma, n - s) for s in range(n + 1)]
    return [
        log_sum(shifts[s] * table.get(s, k) for s in range(k, n + 1))
        for k in range(n + 1)
    ]


def noncentral_stirling(alpha: float, gamma: float, n: int, k: int) -> SignedLogValue:
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    table = stirling_table(alpha, n)
    return log_sum(
        math.comb(n, s) * table.get(s, k) * rising_factorial(-gamma, n - s)
        for s in range(k, n + 1)
    )


def factorial_coefficient(alpha: float, n: int, k: int) -> SignedLogValue:
    """Generalized factorial coefficient ``C(n, k; alpha) = alpha^k S(n, k; alpha)``."""
    if alpha == 0:
        raise ValueError("factorial coefficients are undefined at alpha = 0")
    s = stirling_table(alpha, n).get(n, k)
    return SignedLogValue.of(alpha) ** k * s


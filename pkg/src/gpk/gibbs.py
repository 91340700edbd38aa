"""Gibbs-type exchangeable partition models of type ``alpha``.

The EPPF has the product form

    p(n_1, ..., n_k) = V[n, k] * prod_j (1 - alpha)_{n_j - 1}

with weights solving ``V[n, k] = (n - alpha k) V[n+1, k] + V[n+1, k+1]`` and
``V[1, 1] = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from pathlib import Path
from typing import Sequence

import numpy as np

from .numerics import ONE, Pmf, SignedLogValue, log_sum, rising_factorial
from .stirling import StirlingTable, stirling_table


class InvalidTableError(ValueError):
    """An explicit V table failed positivity or backward-recursion checks."""


@dataclass(frozen=True)
class PartitionState:
    """Block sizes of the seated customers, in order of appearance."""

    sizes: tuple[int, ...] = ()

    def __post_init__(self):
        sizes = tuple(int(x) for x in self.sizes)
        if any(x < 1 for x in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def parse(cls, text: str) -> "PartitionState":
        """Parse a comma list such as ``"3,2,1"``; the empty string is the empty state."""
        text = text.strip()
        if not text:
            return cls(())
        try:
            return cls(tuple(int(tok) for tok in text.split(",")))
        except ValueError as e:
            raise ValueError(f"bad sizes {text!r}: {e}") from None

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def k(self) -> int:
        return len(self.sizes)

    def seat(self, table: int) -> "PartitionState":
        """Seat one customer at ``table`` (1-based), or at a new table if ``table == 0``."""
        if table == 0:
            return PartitionState(self.sizes + (1,))
        sizes = list(self.sizes)
        sizes[table - 1] += 1
        return PartitionState(tuple(sizes))

    def __str__(self):
        return ",".join(map(str, self.sizes))


class GibbsModel:
    """Base class: a type ``alpha`` plus a provider of ``V[n, k]``."""

    alpha: float
    n_max: int | None = None

    def v(self, n: int, k: int) -> SignedLogValue:
        raise NotImplementedError

    def stirling(self, n_max: int) -> StirlingTable:
        return stirling_table(self.alpha, n_max)

    def _check_index(self, n, k):
        if not 1 <= k <= n:
            raise IndexError(f"V[n, k] needs 1 <= k <= n, got ({n}, {k})")
        if self.n_max is not None and n > self.n_max:
            raise IndexError(f"n={n} exceeds table size n_max={self.n_max}")


@dataclass(frozen=True)
class PitmanYor(GibbsModel):
    """Two-parameter model, ``V[n, k] = (theta + alpha)_{k-1, alpha} / (theta + 1)_{n-1}``."""

    alpha: float
    theta: float

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"Pitman-Yor needs 0 <= alpha < 1, got {self.alpha}")
        if not self.theta > -self.alpha:
            raise ValueError(f"Pitman-Yor needs theta > -alpha, got theta={self.theta}")

    def v(self, n: int, k: int) -> SignedLogValue:
        self._check_index(n, k)
        return rising_factorial(self.theta + self.alpha, k - 1, self.alpha) / rising_factorial(
            self.theta + 1, n - 1
        )


class DirichletProcess(PitmanYor):
    """``PitmanYor(0, theta)``; ``V[n, k] = theta^k / (theta)_n``."""

    def __init__(self, theta: float):
        if not theta > 0:
            raise ValueError(f"Dirichlet process needs theta > 0, got {theta}")
        super().__init__(0.0, theta)


@dataclass(frozen=True)
class RecursionReport:
    n_max: int
    tol: float
    max_residual: float
    first_failure: tuple[int, int] | None
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.first_failure is None


@dataclass(frozen=True, eq=False)
class ExplicitTable(GibbsModel):
    """User-supplied weights ``V[n, k]`` for ``1 <= k <= n <= n_max``.

    ``log_v[n - 1][k - 1]`` is ``log V[n, k]``. Construction rejects tables
    that are not positive, do not have ``V[1, 1] = 1``, or break the backward
    recursion by more than ``tol`` (relative).
    """

    alpha: float
    log_v: tuple
    tol: float = 1e-10
    validate: bool = True

    def __post_init__(self):
        if not self.alpha < 1:
            raise InvalidTableError(f"alpha must be < 1, got {self.alpha}")
        rows = tuple(tuple(float(x) for x in row) for row in self.log_v)
        object.__setattr__(self, "log_v", rows)
        for i, row in enumerate(rows, start=1):
            if len(row) != i:
                raise InvalidTableError(f"row n={i} has {len(row)} entries, expected {i}")
        if not self.validate:
            return
        if not rows:
            raise InvalidTableError("empty table")
        for n, row in enumerate(rows, start=1):
            for k, lv in enumerate(row, start=1):
                if not math.isfinite(lv):
                    raise InvalidTableError(f"V[{n}, {k}] is not a positive finite number")
        if abs(rows[0][0]) > self.tol:
            raise InvalidTableError(f"V[1, 1] must be 1, got {math.exp(rows[0][0])!r}")
        report = validate_backward_recursion(self, self.n_max, self.tol)
        if not report.passed:
            n, k = report.first_failure
            raise InvalidTableError(
                f"backward recursion fails at (n={n}, k={k}); "
                f"max relative residual {report.max_residual:.3e}"
            )

    @property
    def n_max(self) -> int:
        return len(self.log_v)

    @classmethod
    def from_values(cls, alpha: float, values: Sequence[Sequence], **kwargs) -> "ExplicitTable":
        """Build from positive values (float, int, ``Decimal`` or decimal strings)."""
        return cls(alpha, tuple(tuple(_log_of(x) for x in row) for row in values), **kwargs)

    @classmethod
    def from_boundary(cls, alpha: float, last_row: Sequence[float]) -> "ExplicitTable":
        """Solve the backward recursion down from a positive row ``V[N, 1..N]``.

        The result is rescaled so that ``V[1, 1] = 1``.
        """
        size = len(last_row)
        if size < 1 or any(not x > 0 for x in last_row):
            raise InvalidTableError("boundary row must be non-empty and positive")
        logs = [None] * size
        logs[size - 1] = [math.log(x) for x in last_row]
        for n in range(size - 1, 0, -1):
            above = logs[n]
            logs[n - 1] = [
                float(np.logaddexp(math.log(n - alpha * k) + above[k - 1], above[k]))
                for k in range(1, n + 1)
            ]
        shift = logs[0][0]
        return cls(alpha, tuple(tuple(x - shift for x in row) for row in logs))

    def v(self, n: int, k: int) -> SignedLogValue:
        self._check_index(n, k)
        return SignedLogValue(1, self.log_v[n - 1][k - 1])

    def to_json(self) -> dict:
        with localcontext() as ctx:
            ctx.prec = 34
            rows = [[str(Decimal(lv).exp()) for lv in row] for row in self.log_v]
        return {"alpha": self.alpha, "n_max": self.n_max, "V": rows}


def _log_of(x) -> float:
    if isinstance(x, str):
        x = Decimal(x)
    if isinstance(x, Decimal):
        if not x > 0:
            raise InvalidTableError(f"V entries must be positive, got {x}")
        with localcontext() as ctx:
            ctx.prec = 40
            return float(x.ln())
    if not x > 0:
        raise InvalidTableError(f"V entries must be positive, got {x}")
    return math.log(x)


def load_table(path: str | Path, tol: float = 1e-10) -> ExplicitTable:
    """Read the JSON table format ``{"alpha": .., "n_max": .., "V": [[..], ..]}``."""
    doc = json.loads(Path(path).read_text())
    try:
        alpha, n_max, rows = float(doc["alpha"]), int(doc["n_max"]), doc["V"]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidTableError(f"malformed table file: {e}") from None
    if len(rows) != n_max:
        raise InvalidTableError(f"n_max={n_max} but {len(rows)} rows given")
    return ExplicitTable.from_values(alpha, [[str(x) for x in row] for row in rows], tol=tol)


def save_table(table: ExplicitTable, path: str | Path) -> None:
    Path(path).write_text(json.dumps(table.to_json(), indent=1))


def v_weight(model: GibbsModel, n: int, k: int) -> SignedLogValue:
    return model.v(n, k)


def log_eppf(model: GibbsModel, state: PartitionState) -> SignedLogValue:
    if state.k == 0:
        return ONE
    out = model.v(state.n, state.k)
    for nj in state.sizes:
        out = out * rising_factorial(1 - model.alpha, nj - 1)
    return out


def eppf(model: GibbsModel, state: PartitionState | Sequence[int]) -> float:
    """Probability that a partition of ``[n]`` equals one fixed partition with these block sizes."""
    if not isinstance(state, PartitionState):
        state = PartitionState(tuple(state))
    return float(log_eppf(model, state))


def predictive(model: GibbsModel, state: PartitionState) -> Pmf:
    """Seating law of the next customer.

    Support is ``(0, 1, ..., k)``: label ``0`` is a new table, ``j >= 1`` is
    existing table ``j``.
    """
    if state.k == 0:
        return Pmf((0,), (1.0,))
    n, k = state.n, state.k
    base = model.v(n, k)
    if base.is_zero:
        raise ValueError(f"state {state.sizes} has zero probability")
    old = model.v(n + 1, k) / base
    probs = [float(model.v(n + 1, k + 1) / base)]
    probs += [float(old * (nj - model.alpha)) for nj in state.sizes]
    return Pmf(tuple(range(k + 1)), probs)


def validate_backward_recursion(model: GibbsModel, n_max: int, tol: float = 1e-9) -> RecursionReport:
    """Check ``V[n, k] = (n - alpha k) V[n+1, k] + V[n+1, k+1]`` for ``1 <= k <= n < n_max``."""
    alpha = model.alpha
    worst, first, failures = 0.0, None, []
    for n in range(1, n_max):
        for k in range(1, n + 1):
            lhs = model.v(n, k)
            rhs = log_sum((model.v(n + 1, k) * (n - alpha * k), model.v(n + 1, k + 1)))
            if lhs.is_zero or rhs.is_zero:
                resid = math.inf
            else:
                resid = abs(math.expm1(rhs.log_mag - lhs.log_mag))
            worst = max(worst, resid)
            if resid > tol:
                failures.append((n, k))
                if first is None:
                    first = (n, k)
    return RecursionReport(n_max, tol, worst, first, failures)

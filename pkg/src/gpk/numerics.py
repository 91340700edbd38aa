"""Signed log-domain scalars and generalized rising factorials.

Everything probability-scale in the package is carried as a
:class:`SignedLogValue` so that weights such as ``V[n + m, k]`` with
``n + m`` in the hundreds neither overflow nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as ``sign * exp(log_mag)``.

    ``sign == 0`` is exact zero, in which case ``log_mag`` is ``-inf``.
    """

    sign: int
    log_mag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")
        if self.sign == 0:
            object.__setattr__(self, "log_mag", -math.inf)
        elif not math.isfinite(self.log_mag):
            raise ValueError("non-zero SignedLogValue needs a finite log magnitude")

    @classmethod
    def of(cls, x) -> "SignedLogValue":
        """Convert an int, float or Fraction. Big ints are handled exactly by ``math.log``."""
        if isinstance(x, SignedLogValue):
            return x
        if x == 0:
            return ZERO
        sign = 1 if x > 0 else -1
        return cls(sign, math.log(abs(x)))

    @classmethod
    def from_log(cls, log_mag: float, sign: int = 1) -> "SignedLogValue":
        if log_mag == -math.inf:
            return ZERO
        return cls(sign, log_mag)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_mag)

    def __neg__(self) -> "SignedLogValue":
        return SignedLogValue(-self.sign, self.log_mag)

    def __abs__(self) -> "SignedLogValue":
        return SignedLogValue(abs(self.sign), self.log_mag)

    def __mul__(self, other) -> "SignedLogValue":
        other = SignedLogValue.of(other)
        sign = self.sign * other.sign
        if sign == 0:
            return ZERO
        return SignedLogValue(sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SignedLogValue":
        other = SignedLogValue.of(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLogValue")
        if self.sign == 0:
            return ZERO
        return SignedLogValue(self.sign * other.sign, self.log_mag - other.log_mag)

    def __rtruediv__(self, other) -> "SignedLogValue":
        return SignedLogValue.of(other) / self

    def __pow__(self, p: int) -> "SignedLogValue":
        if not isinstance(p, int):
            raise TypeError("only integer powers are supported")
        if p == 0:
            return ONE
        if self.sign == 0:
            if p < 0:
                raise ZeroDivisionError("negative power of zero")
            return ZERO
        sign = self.sign if p % 2 else 1
        return SignedLogValue(sign, p * self.log_mag)

    def __add__(self, other) -> "SignedLogValue":
        return log_sum((self, SignedLogValue.of(other)))

    __radd__ = __add__

    def __sub__(self, other) -> "SignedLogValue":
        return log_sum((self, -SignedLogValue.of(other)))

    def __rsub__(self, other) -> "SignedLogValue":
        return log_sum((SignedLogValue.of(other), -self))


ZERO = SignedLogValue(0, -math.inf)
ONE = SignedLogValue(1, 0.0)


def log_sum(values: Iterable[SignedLogValue]) -> SignedLogValue:
    """Signed sum of log-domain values.

    Terms are shifted by the largest log magnitude and accumulated with
    ``math.fsum``, so the shifted sum is correctly rounded and exact
    cancellation gives exact zero.
    """
    terms = [v for v in values if v.sign != 0]
    if not terms:
        return ZERO
    top = max(v.log_mag for v in terms)
    total = math.fsum(v.sign * math.exp(v.log_mag - top) for v in terms)
    if total == 0.0:
        return ZERO
    return SignedLogValue(1 if total > 0 else -1, top + math.log(abs(total)))


def rising_factorial(x: float, n: int, h: float = 1.0) -> SignedLogValue:
    """``(x)_{n, h} = x (x + h) ... (x + (n - 1) h)``; the empty product is 1.

    The running product is renormalized with ``frexp`` after every factor,
    so the result is accurate to roughly ``n`` ulps for any ``n``.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    mant, expo = 1.0, 0
    for i in range(n):
        factor = x + i * h
        if factor == 0.0:
            return ZERO
        # split the factor too, so subnormal factors keep full precision
        fm, fe = math.frexp(factor)
        mant, e = math.frexp(mant * fm)
        expo += e + fe
    sign = 1 if mant > 0 else -1
    return SignedLogValue(sign, math.log(abs(mant)) + expo * LN2)


def log_rising_factorials(x: float, n: int, h: float = 1.0) -> tuple[list[int], list[float]]:
    """Signs and log magnitudes of ``(x)_{r, h}`` for every ``r = 0..n``."""
    signs, logs = [1], [0.0]
    mant, expo = 1.0, 0
    for i in range(n):
        fm, fe = math.frexp(x + i * h)
        mant, e = math.frexp(mant * fm)
        expo += e + fe
        if mant == 0.0:
            signs += [0] * (n - i)
            logs += [-math.inf] * (n - i)
            break
        signs.append(1 if mant > 0 else -1)
        logs.append(math.log(abs(mant)) + expo * LN2)
    return signs, logs


def binomial(n: int, k: int) -> SignedLogValue:
    return SignedLogValue.of(math.comb(n, k))


@dataclass(frozen=True)
class Pmf:
    """Finite probability mass function with labelled support."""

    support: tuple
    probs: tuple

    # pmfs built from validated V tables may carry recursion residuals
    tol = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs must have the same length")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability in pmf")
        if abs(self.total - 1.0) > self.tol:
            raise ValueError(f"pmf sums to {self.total!r}, not 1")

    @property
    def total(self) -> float:
        return math.fsum(self.probs)

    def __getitem__(self, label: Hashable) -> float:
        try:
            return self.probs[self.support.index(label)]
        except ValueError:
            return 0.0

    def __len__(self) -> int:
        return len(self.support)

    def items(self):
        return zip(self.support, self.probs)

    def as_dict(self) -> dict:
        return dict(self.items())

    def mean(self) -> float:
        return math.fsum(x * p for x, p in self.items())


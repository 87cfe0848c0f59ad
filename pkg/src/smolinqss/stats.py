"""Finite-sample estimates for +/-1 valued correlators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError

CHSH_SIGNS = (1, 1, 1, -1)


@dataclass(frozen=True)
class SampleAccumulator:
    """Running count, sum and sum of squares. Mergeable in any order."""

    count: int = 0
    sum: float = 0.0
    sum_of_squares: float = 0.0

    def accumulate(self, x: int) -> "SampleAccumulator":
        if x not in (1, -1):
            raise InvalidParameterError(f"samples must be +1 or -1, got {x!r}")
        return SampleAccumulator(self.count + 1, self.sum + x, self.sum_of_squares + 1.0)

    def extend(self, xs) -> "SampleAccumulator":
        xs = np.asarray(xs)
        if xs.size and not np.all((xs == 1) | (xs == -1)):
            raise InvalidParameterError("samples must be +1 or -1")
        return self.merge(SampleAccumulator(int(xs.size), float(xs.sum()), float(xs.size)))

    def merge(self, other: "SampleAccumulator") -> "SampleAccumulator":
        return SampleAccumulator(
            self.count + other.count,
            self.sum + other.sum,
            self.sum_of_squares + other.sum_of_squares,
        )

    @property
    def mean(self) -> float:
        return self.sum / self.count if self.count else math.nan

    @property
    def variance(self) -> float:
        """Per-sample variance of a +/-1 variate, ``1 - mean**2``."""
        if not self.count:
            return math.nan
        m = self.mean
        return max(self.sum_of_squares / self.count - m * m, 0.0)

    @property
    def stderr(self) -> float:
        if not self.count:
            return math.nan
        return math.sqrt(self.variance / self.count)


def combine_terms(
    means: Sequence[float],
    stderrs: Sequence[float],
    signs: Sequence[int] = CHSH_SIGNS,
) -> tuple[float, float]:
    """Signed sum of independent estimates and its standard error in quadrature."""
    if not len(means) == len(stderrs) == len(signs):
        raise InvalidParameterError("means, stderrs and signs must have equal length")
    value = float(sum(s * m for s, m in zip(signs, means)))
    err = math.sqrt(sum(e * e for e in stderrs))
    return value, err

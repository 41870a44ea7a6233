"""Binomial-mechanism privacy calculus.

Adding ``Binomial(n_b, 1/2)`` noise to a counting query is
``(epsilon, delta)``-DP with ``epsilon = 10 * sqrt(ln(2/delta) / n_b)`` for
``n_b > 30``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_COINS = 31


class PrivacyParamError(ValueError):
    pass


class ResultTooSmall(PrivacyParamError):
    """The requested privacy level needs no more than 30 coins."""


class InvalidDelta(PrivacyParamError):
    pass


class FieldTooSmall(PrivacyParamError):
    """n + K * n_b is too close to q for the noisy sum to be lifted unambiguously."""


def _check_delta(delta: float):
    if not 0.0 < delta < 1.0:
        raise InvalidDelta(f"delta must lie in (0, 1), got {delta}")


def coins_for_privacy(epsilon: float, delta: float) -> int:
    if not epsilon > 0:
        raise PrivacyParamError(f"epsilon must be positive, got {epsilon}")
    _check_delta(delta)
    exact = 100.0 * math.log(2.0 / delta) / epsilon ** 2
    n_b = math.ceil(exact)
    # guard against ceil() landing one above an exact integer because of rounding
    if n_b - 1 > 0 and math.isclose(n_b - 1, exact, rel_tol=1e-12):
        n_b -= 1
    if n_b < MIN_COINS:
        raise ResultTooSmall(f"epsilon={epsilon} needs only {n_b} coins; the binomial mechanism requires n_b > 30")
    return n_b


def privacy_for_coins(n_b: int, delta: float) -> float:
    if n_b < MIN_COINS:
        raise ResultTooSmall(f"n_b={n_b}: the binomial mechanism requires n_b > 30")
    _check_delta(delta)
    return 10.0 * math.sqrt(math.log(2.0 / delta) / n_b)


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float
    n_b: int

    def __post_init__(self):
        if self.n_b < MIN_COINS:
            raise ResultTooSmall(f"n_b={self.n_b}: the binomial mechanism requires n_b > 30")
        _check_delta(self.delta)

    @classmethod
    def from_epsilon(cls, epsilon: float, delta: float) -> "PrivacyParams":
        return cls(epsilon, delta, coins_for_privacy(epsilon, delta))

    @classmethod
    def from_coins(cls, n_b: int, delta: float) -> "PrivacyParams":
        return cls(privacy_for_coins(n_b, delta), delta, n_b)

    def expected_abs_noise(self, K: int = 1) -> float:
        """E|Z - K n_b / 2| for Z ~ Binomial(K n_b, 1/2) (normal approximation)."""
        return math.sqrt(K * self.n_b / 4.0) * math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class IdealOutput:
    y: int
    deltas: tuple


def ideal_mechanism(inputs, n_b: int, rng=None, q: int | None = None) -> IdealOutput:
    """The functionality the protocol must realise: each prover adds its own binomial draw.

    ``inputs`` holds one value per prover (its share of the count).
    """
    if n_b < MIN_COINS:
        raise ResultTooSmall(f"n_b={n_b}: the binomial mechanism requires n_b > 30")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    deltas = tuple(int(d) for d in rng.binomial(n_b, 0.5, size=len(inputs)))
    y = sum(inputs) + sum(deltas)
    return IdealOutput(y % q if q else y, deltas)


def check_field_size(n: int, K: int, n_b: int, q: int):
    if 2 * (n + K * n_b) >= q:
        raise FieldTooSmall(f"n + K*n_b = {n + K * n_b} must stay below q/2 = {q / 2:.3g}")


def lift(y: int, q: int) -> int:
    """Signed representative of ``y`` mod q in (-q/2, q/2]."""
    y %= q
    return y - q if y > q // 2 else y


def debiased_estimate(y: int, K: int, n_b: int, q: int | None = None) -> float:
    """Noisy count with the mean K n_b / 2 of the noise removed.

    Integral when K * n_b is even, a half-integer otherwise.
    """
    value = lift(y, q) if q else y
    half, odd = divmod(K * n_b, 2)
    return float(value - half) - (0.5 if odd else 0.0)

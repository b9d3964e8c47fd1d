"""Asymptotic B92 key rate as a function of the tolerated error budget."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError


def binary_entropy(p: float) -> float:
    """Shannon binary entropy in bits, with ``H(0) = H(1) = 0``."""
    if not (0.0 <= p <= 1.0):
        raise InvalidInputError(f"probability {p!r} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


@dataclass(frozen=True)
class KeyRateInput:
    """``n_sifted`` counts already-sifted same-basis signals; error fractions lie in [0, 1/2]."""

    n_sifted: float
    f_inconclusive: float
    e_b: float
    e_p: float

    def __post_init__(self):
        if self.n_sifted < 0:
            raise InvalidInputError("n_sifted must be non-negative")
        for name, top in (("f_inconclusive", 1.0), ("e_b", 0.5), ("e_p", 0.5)):
            v = getattr(self, name)
            if not (0.0 <= v <= top):
                raise InvalidInputError(f"{name}={v!r} outside [0, {top}]")


def b92_key_rate(k: KeyRateInput) -> float:
    """``N (1 - f) (1 - H(e_b) - H(e_p))``, floored at zero."""
    rate = k.n_sifted * (1.0 - k.f_inconclusive) * (1.0 - binary_entropy(k.e_b) - binary_entropy(k.e_p))
    return max(0.0, rate)


@dataclass(frozen=True)
class KeyRateSweep:
    epsilons: np.ndarray
    f_inconclusive: np.ndarray
    rates: np.ndarray
    best_epsilon: float
    best_rate: float

    @property
    def table(self) -> list:
        return [(float(e), float(r)) for e, r in zip(self.epsilons, self.rates)]


def b92_rate_vs_error(n_sifted: float, e_b: float, e_p: float, curve) -> KeyRateSweep:
    """Key rate along a tradeoff curve, where the inconclusive fraction is read from the curve.

    ``curve`` is a :class:`~discrim.core.TradeoffCurve` or an iterable of
    ``(epsilon, p_in)`` pairs. Ties for the best rate go to the smallest epsilon.
    """
    if hasattr(curve, "epsilons"):
        pairs = list(zip(curve.epsilons, curve.inconclusive))
    else:
        pairs = [(float(a), float(b)) for a, b in curve]
    if not pairs:
        raise InvalidInputError("empty tradeoff curve")
    eps = np.array([p[0] for p in pairs], dtype=float)
    f = np.clip(np.array([p[1] for p in pairs], dtype=float), 0.0, 1.0)
    rates = np.array([b92_key_rate(KeyRateInput(n_sifted, fi, e_b, e_p)) for fi in f])
    best = int(np.argmax(rates))
    return KeyRateSweep(eps, f, rates, float(eps[best]), float(rates[best]))

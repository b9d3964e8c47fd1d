"""Send-measure-respond simulation of a discrimination strategy.

Trials are grouped in fixed blocks of ``BLOCK`` consecutive indices and each
block draws from a generator keyed by ``(seed, block)``, so counts over any
partition of the trial range merge to the same totals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Ensemble, InvalidInputError, PovmStrategy, PvmStrategy, RatePoint, Strategy

BLOCK = 1 << 16


@dataclass(frozen=True)
class Counts:
    correct: int = 0
    error: int = 0
    inconclusive: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.correct + other.correct, self.error + other.error, self.inconclusive + other.inconclusive)

    @property
    def trials(self) -> int:
        return self.correct + self.error + self.inconclusive


@dataclass(frozen=True)
class SimulationReport:
    empirical: RatePoint
    standard_errors: dict
    trials: int
    seed: int
    counts: Counts


def outcome_probabilities(ensemble: Ensemble, strategy: Strategy) -> np.ndarray:
    """``probs[j, k]``: probability of outcome ``k`` given state ``j``.

    PVM outcomes are the basis vectors; POVM outcome 0 is the inconclusive
    element and outcome ``k`` is ``Pi_k``.
    """
    psi = ensemble.matrix
    if isinstance(strategy, PvmStrategy):
        if strategy.n != ensemble.n:
            raise InvalidInputError("strategy and ensemble sizes differ")
        probs = np.abs(psi @ strategy.basis.conj().T) ** 2
    elif isinstance(strategy, PovmStrategy):
        if strategy.n != ensemble.n:
            raise InvalidInputError("strategy and ensemble sizes differ")
        probs = np.array(
            [[np.real(np.vdot(v, op @ v)) for op in strategy.all_elements] for v in psi]
        )
        probs = np.clip(probs, 0.0, None)
    else:
        raise InvalidInputError(f"unknown strategy type {type(strategy).__name__}")
    sums = probs.sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > 1e-9:
        raise InvalidInputError(f"outcome probabilities sum to {sums}, expected 1 (completeness)")
    return probs / sums[:, None]


def _block_uniforms(seed: int, block: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(block)]))
    return rng.random((BLOCK, 3))


def _tally(ensemble, strategy, probs, u) -> Counts:
    sent = np.searchsorted(np.cumsum(ensemble.priors), u[:, 0], side="right")
    sent = np.minimum(sent, ensemble.n - 1)
    cum = np.cumsum(probs, axis=1)[sent]
    outcome = np.minimum((u[:, 1:2] >= cum).sum(axis=1), probs.shape[1] - 1)
    if isinstance(strategy, PvmStrategy):
        answered = u[:, 2] < strategy.weights[outcome]
        guess = outcome
    else:
        answered = outcome > 0
        guess = outcome - 1
    correct = int(np.sum(answered & (guess == sent)))
    error = int(np.sum(answered & (guess != sent)))
    return Counts(correct, error, int(u.shape[0] - correct - error))


def simulate_counts(ensemble: Ensemble, strategy: Strategy, start: int, stop: int, seed: int) -> Counts:
    """Tallies for trial indices ``start <= t < stop``."""
    if not (0 <= start <= stop):
        raise InvalidInputError("need 0 <= start <= stop")
    probs = outcome_probabilities(ensemble, strategy)
    total = Counts()
    for block in range(start // BLOCK, (stop - 1) // BLOCK + 1 if stop > start else start // BLOCK):
        lo, hi = max(start, block * BLOCK), min(stop, (block + 1) * BLOCK)
        u = _block_uniforms(seed, block)[lo - block * BLOCK : hi - block * BLOCK]
        total = total + _tally(ensemble, strategy, probs, u)
    return total


def simulate_strategy(ensemble: Ensemble, strategy: Strategy, trials: int, seed: int = 0) -> SimulationReport:
    if trials < 1:
        raise InvalidInputError("trials must be at least 1")
    counts = simulate_counts(ensemble, strategy, 0, trials, seed)
    rates = {
        "correct": counts.correct / trials,
        "error": counts.error / trials,
        "inconclusive": counts.inconclusive / trials,
    }
    empirical = RatePoint(**rates)
    se = {k: float(np.sqrt(r * (1.0 - r) / trials)) for k, r in rates.items()}
    return SimulationReport(empirical, se, trials, int(seed), counts)

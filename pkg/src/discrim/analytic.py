"""Closed-form bounds, the two-state rotation curve and the strategy transforms.

These are the ground truth the numerical optimizers are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Ensemble,
    InvalidInputError,
    PvmStrategy,
    RatePoint,
    UDImpossibleError,
    orthocomplement,
)


def _check_prob(x, name):
    if not (0.0 <= x <= 1.0):
        raise InvalidInputError(f"{name}={x!r} must lie in [0, 1]")


def _ordered_priors(eta1, eta2):
    _check_prob(eta1, "eta1")
    _check_prob(eta2, "eta2")
    if abs(eta1 + eta2 - 1.0) > 1e-9:
        raise InvalidInputError(f"priors {eta1}, {eta2} do not sum to 1")
    return (eta1, eta2) if eta1 >= eta2 else (eta2, eta1)


@dataclass(frozen=True)
class TwoStateGeometry:
    """Real two-state problem: separation angle ``theta`` and priors ``eta1 >= eta2``."""

    theta: float
    eta1: float = 0.5
    eta2: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.theta <= np.pi / 2 + 1e-12):
            raise InvalidInputError(f"theta={self.theta!r} must lie in (0, pi/2]")
        if abs(self.eta1 + self.eta2 - 1.0) > 1e-9 or self.eta2 < 0:
            raise InvalidInputError("priors must be non-negative and sum to 1")
        if self.eta1 < self.eta2:
            raise InvalidInputError("convention requires eta1 >= eta2")

    @classmethod
    def from_ensemble(cls, ensemble: Ensemble) -> "TwoStateGeometry":
        """Geometry of a two-state ensemble; the larger prior becomes ``eta1``."""
        if ensemble.n != 2:
            raise InvalidInputError("two-state geometry needs exactly two states")
        s = abs(complex(np.vdot(ensemble.states[0].amplitudes, ensemble.states[1].amplitudes)))
        eta1, eta2 = _ordered_priors(*map(float, ensemble.priors))
        return cls(float(np.arccos(min(s, 1.0))), eta1, eta2)

    @property
    def overlap(self) -> float:
        return float(np.cos(self.theta))

    @property
    def ud_rate(self) -> float:
        return self.eta1 * np.sin(self.theta) ** 2


def helstrom_bound(eta1: float, eta2: float, s: float) -> float:
    """Minimum two-state error rate for overlap magnitude ``s``."""
    _ordered_priors(eta1, eta2)
    _check_prob(s, "s")
    return 0.5 * (1.0 - np.sqrt(max(0.0, 1.0 - 4.0 * eta1 * eta2 * s * s)))


def helstrom_projectors(ensemble: Ensemble) -> PvmStrategy:
    """Minimum-error PVM for two states: eigenbasis of ``eta1 rho1 - eta2 rho2``."""
    if ensemble.n != 2:
        raise InvalidInputError("Helstrom projectors are defined for two states")
    rho1, rho2 = ensemble.density_matrices()
    gamma = ensemble.priors[0] * rho1 - ensemble.priors[1] * rho2
    _, vecs = np.linalg.eigh(gamma)
    # eigh sorts ascending: the positive eigenvector is read as psi1
    return PvmStrategy(np.array([vecs[:, 1], vecs[:, 0]]), [1.0, 1.0])


def ud_vectors(ensemble: Ensemble) -> np.ndarray:
    """Row ``i`` is the unit vector orthogonal to every state except ``psi_i``."""
    gram = ensemble.gram()
    if abs(np.linalg.det(gram)) <= 1e-12:
        raise UDImpossibleError("states are linearly dependent; unambiguous discrimination is impossible")
    psi = ensemble.matrix
    rows = []
    for i in range(ensemble.n):
        comp = orthocomplement(np.delete(psi, i, axis=0))
        rows.append(comp[0])
    return np.array(rows)


def ud_pvm_rate(ensemble: Ensemble):
    """Best zero-error PVM: ``(rate, discriminated index, discriminating vector)``.

    A PVM can unambiguously identify only one state; the candidate for state
    ``i`` is the vector orthogonal to all the others. Ties go to the lowest
    index.
    """
    vecs = ud_vectors(ensemble)
    psi = ensemble.matrix
    rates = ensemble.priors * np.abs(np.einsum("ia,ia->i", vecs.conj(), psi)) ** 2
    best = int(np.argmax(rates))
    return float(rates[best]), best, vecs[best]


def ud_povm_rate_two_state(eta1: float, eta2: float, s: float) -> float:
    """Optimal two-state unambiguous conclusive rate.

    Falls back to the projective value when the generalized measurement is
    not optimal (``sqrt(eta2/eta1) s < s^2``).
    """
    eta1, eta2 = _ordered_priors(eta1, eta2)
    _check_prob(s, "s")
    if eta1 == 0:
        return 0.0
    if np.sqrt(eta2 / eta1) * s >= s * s:
        return 1.0 - 2.0 * np.sqrt(eta1 * eta2) * s
    return eta1 * (1.0 - s * s)


def two_state_rates_from_angle(g: TwoStateGeometry, phi: float):
    """``(P_C, P_E)`` after rotating the UD measurement by ``phi`` with weights (1, 0)."""
    if not (-1e-12 <= phi <= np.pi / 2 - g.theta + 1e-12):
        raise InvalidInputError(f"phi={phi!r} outside [0, pi/2 - theta]")
    return g.eta1 * np.sin(phi + g.theta) ** 2, g.eta2 * np.sin(phi) ** 2


def two_state_correct_curve(g: TwoStateGeometry, p_e: float) -> float:
    """Correct rate of the rotated UD strategy as a function of its error rate."""
    if not (0.0 <= p_e <= g.eta2 + 1e-15):
        raise InvalidInputError(f"p_e={p_e!r} outside [0, eta2]")
    if p_e == 0.0:
        return g.ud_rate
    root = np.sqrt(max(g.eta2 / p_e - 1.0, 0.0))
    return g.ud_rate + (g.eta1 / g.eta2) * p_e * (np.cos(2 * g.theta) + root * np.sin(2 * g.theta))


def guess_transform(r: RatePoint, n: int, g: float, priors=None) -> RatePoint:
    """Replace a fraction ``g`` of inconclusive results with a guess.

    With equal priors a blind guess is right with probability ``1/n``. Passing
    ``priors`` switches to always guessing the most likely state, right with
    probability ``max(priors)``.
    """
    if n < 2:
        raise InvalidInputError("guessing needs n >= 2")
    _check_prob(g, "g")
    hit = 1.0 / n if priors is None else float(np.max(priors))
    moved = g * r.inconclusive
    return RatePoint(
        error=r.error + moved * (1.0 - hit),
        inconclusive=r.inconclusive - moved,
        correct=r.correct + moved * hit,
    )


def abstain_transform(r: RatePoint, a: float) -> RatePoint:
    """Call a fraction ``a`` of all conclusive answers inconclusive."""
    _check_prob(a, "a")
    return RatePoint(
        error=(1.0 - a) * r.error,
        inconclusive=r.inconclusive + a * (r.error + r.correct),
        correct=(1.0 - a) * r.correct,
    )


def abstain_line(p_me: float, eps):
    """P_In on the segment from (0, 1) to (P_ME, 0)."""
    eps = np.asarray(eps, dtype=float)
    return np.clip(1.0 - eps / p_me, 0.0, 1.0) if p_me > 0 else np.zeros_like(eps)


def guess_line(p_in_ud: float, n: int, eps):
    """P_In on the slope ``-n/(n-1)`` segment starting at (0, P_In of UD)."""
    eps = np.asarray(eps, dtype=float)
    return np.clip(p_in_ud - n / (n - 1.0) * eps, 0.0, 1.0)


def reference_lines(p_me: float, p_in_ud: float, n: int) -> dict:
    """Endpoints ``((P_E, P_In), (P_E, P_In))`` of both reference lines."""
    return {
        "abstain": ((0.0, 1.0), (p_me, 0.0)),
        "guess": ((0.0, p_in_ud), ((n - 1.0) / n * p_in_ud, 0.0)),
    }

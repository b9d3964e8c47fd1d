"""Domain types and exact strategy evaluation.

Every rate in the package flows through :func:`evaluate_pvm` or
:func:`evaluate_povm`; the optimizers only search, they never report rates
computed any other way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-9
RENORMALIZE_TOL = 1e-6
ORTHO_TOL = 1e-9
HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-8
COMPLETENESS_TOL = 1e-8
SUM_TOL = 1e-9


class InvalidInputError(ValueError):
    """Raised when an input violates a documented invariant."""


class UDImpossibleError(InvalidInputError):
    """Raised when unambiguous discrimination is impossible (dependent states)."""


def _as_vector(amplitudes, name="state") -> np.ndarray:
    vec = np.asarray(amplitudes, dtype=complex)
    if vec.ndim != 1 or vec.size == 0:
        raise InvalidInputError(f"{name}: amplitudes must be a non-empty 1-D list")
    if not np.all(np.isfinite(vec)):
        raise InvalidInputError(f"{name}: amplitudes must be finite")
    return vec


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure state. Norm deviations up to 1e-6 are renormalized away."""

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = _as_vector(self.amplitudes)
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > RENORMALIZE_TOL:
            raise InvalidInputError(f"state norm is {norm:.9g}, expected 1 (unit norm invariant)")
        vec = vec / norm
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.amplitudes.imag) <= 1e-15))

    def with_phase(self, alpha: float) -> "QuantumState":
        return QuantumState(np.exp(1j * alpha) * self.amplitudes)

    def __repr__(self):
        return f"QuantumState({np.array2string(np.asarray(self.amplitudes), precision=5)})"


def overlap(a: QuantumState, b: QuantumState) -> complex:
    """Inner product <a|b> (conjugate-linear in ``a``)."""
    if a.dimension != b.dimension:
        raise InvalidInputError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """``n`` pure states in dimension ``n`` with prior probabilities."""

    states: tuple
    priors: np.ndarray
    label: str = ""

    def __post_init__(self):
        states = tuple(s if isinstance(s, QuantumState) else QuantumState(s) for s in self.states)
        if not states:
            raise InvalidInputError("ensemble needs at least one state")
        dims = {s.dimension for s in states}
        if len(dims) != 1:
            raise InvalidInputError(f"states have mixed dimensions {sorted(dims)}")
        n = len(states)
        if self.priors is None:
            priors = np.full(n, 1.0 / n)
        else:
            priors = np.asarray(self.priors, dtype=float).ravel()
        if priors.size != n:
            raise InvalidInputError(f"got {priors.size} priors for {n} states")
        if np.any(priors < 0) or np.any(priors > 1):
            raise InvalidInputError("priors must lie in [0, 1]")
        if abs(priors.sum() - 1.0) > SUM_TOL:
            raise InvalidInputError(f"priors sum to {priors.sum():.12g}, expected 1")
        if states[0].dimension != n:
            raise InvalidInputError(
                f"state count {n} must equal dimension {states[0].dimension}"
            )
        priors = priors.copy()
        priors.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "priors", priors)

    @classmethod
    def from_vectors(cls, vectors, priors=None, label="") -> "Ensemble":
        return cls(tuple(QuantumState(v) for v in vectors), priors, label)

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def dimension(self) -> int:
        return self.states[0].dimension

    @property
    def matrix(self) -> np.ndarray:
        """States as rows, shape ``(n, dim)``."""
        return np.array([s.amplitudes for s in self.states])

    @property
    def is_real(self) -> bool:
        return all(s.is_real for s in self.states)

    def gram(self) -> np.ndarray:
        m = self.matrix
        return m.conj() @ m.T

    def density_matrices(self) -> list:
        return [np.outer(s.amplitudes, s.amplitudes.conj()) for s in self.states]


def _check_orthonormal(basis: np.ndarray, tol=ORTHO_TOL):
    gram = basis.conj() @ basis.T
    dev = np.abs(gram - np.eye(basis.shape[0]))
    if np.max(np.abs(np.diag(dev))) > tol:
        raise InvalidInputError("basis vectors must be unit norm (orthonormality invariant)")
    if np.max(dev) > tol:
        raise InvalidInputError("basis vectors must be mutually orthogonal (orthonormality invariant)")


@dataclass(frozen=True, eq=False)
class PvmStrategy:
    """Orthonormal basis ``p_i`` (rows) with discrimination weights ``w_i``.

    Outcome ``i`` is interpreted as state ``i`` with probability ``w_i`` and
    as inconclusive otherwise.
    """

    basis: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise InvalidInputError("basis must be n vectors of dimension n")
        _check_orthonormal(basis)
        weights = np.array(self.weights, dtype=float).ravel()
        if weights.size != basis.shape[0]:
            raise InvalidInputError(f"got {weights.size} weights for {basis.shape[0]} basis vectors")
        if np.any(weights < 0) or np.any(weights > 1):
            raise InvalidInputError("weights must lie in [0, 1]")
        basis.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_rounded(cls, vectors, weights) -> "PvmStrategy":
        """Snap nearly-orthonormal vectors (say, rounded to a few digits) to the closest orthonormal set."""
        m = np.asarray(vectors, dtype=complex)
        u, _, vh = np.linalg.svd(m)
        return cls(u @ vh, weights)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    def projectors(self) -> list:
        return [np.outer(p, p.conj()) for p in self.basis]

    def as_povm(self) -> "PovmStrategy":
        elements = [w * P for w, P in zip(self.weights, self.projectors())]
        return PovmStrategy(elements, np.eye(self.n) - sum(elements))


@dataclass(frozen=True, eq=False)
class PovmStrategy:
    """Discrimination operators ``Pi_1..Pi_n`` plus the inconclusive ``Pi_0``."""

    elements: tuple
    inconclusive_element: np.ndarray

    def __post_init__(self):
        elements = tuple(np.array(e, dtype=complex) for e in self.elements)
        pi0 = np.array(self.inconclusive_element, dtype=complex)
        dim = pi0.shape[0]
        for k, op in enumerate(elements + (pi0,)):
            name = "inconclusive element" if k == len(elements) else f"element {k + 1}"
            if op.shape != (dim, dim):
                raise InvalidInputError(f"{name}: expected a {dim}x{dim} matrix")
            if np.max(np.abs(op - op.conj().T)) > HERMITIAN_TOL:
                raise InvalidInputError(f"{name} is not Hermitian")
            if np.linalg.eigvalsh(op).min() < -PSD_TOL:
                raise InvalidInputError(f"{name} is not positive semidefinite")
        residual = np.max(np.abs(sum(elements) + pi0 - np.eye(dim)))
        if residual > COMPLETENESS_TOL:
            raise InvalidInputError(f"elements do not sum to identity (residual {residual:.3g})")
        for op in elements + (pi0,):
            op.setflags(write=False)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "inconclusive_element", pi0)

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def all_elements(self) -> tuple:
        """``(Pi_0, Pi_1, ..., Pi_n)``."""
        return (self.inconclusive_element,) + self.elements


Strategy = Union[PvmStrategy, PovmStrategy]


@dataclass(frozen=True)
class RatePoint:
    error: float
    inconclusive: float
    correct: float

    def __post_init__(self):
        for name in ("error", "inconclusive", "correct"):
            v = getattr(self, name)
            if not (-SUM_TOL <= v <= 1 + SUM_TOL):
                raise InvalidInputError(f"{name} rate {v!r} outside [0, 1]")
        total = self.error + self.inconclusive + self.correct
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidInputError(f"rates sum to {total:.12g}, expected 1")

    @classmethod
    def from_correct_error(cls, correct: float, error: float) -> "RatePoint":
        return cls(error=float(error), inconclusive=float(1.0 - correct - error), correct=float(correct))

    def as_tuple(self):
        """``(P_C, P_E, P_In)``."""
        return (self.correct, self.error, self.inconclusive)


@dataclass(frozen=True)
class CurvePoint:
    epsilon: float
    rates: RatePoint
    strategy: Strategy
    certified: bool = True


@dataclass
class TradeoffCurve:
    points: list = field(default_factory=list)
    measurement: str = "pvm"

    def __post_init__(self):
        eps = [p.epsilon for p in self.points]
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise InvalidInputError("curve epsilons must be strictly increasing")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([p.epsilon for p in self.points])

    @property
    def inconclusive(self) -> np.ndarray:
        return np.array([p.rates.inconclusive for p in self.points])

    @property
    def error(self) -> np.ndarray:
        return np.array([p.rates.error for p in self.points])

    @property
    def correct(self) -> np.ndarray:
        return np.array([p.rates.correct for p in self.points])

    @property
    def certified(self) -> bool:
        return all(p.certified for p in self.points)


def _clip_unit(x: float) -> float:
    return float(min(max(x, 0.0), 1.0))


def outcome_table(ensemble: Ensemble, basis: np.ndarray) -> np.ndarray:
    """``T[i, j] = eta_j |<p_i|psi_j>|^2`` for basis rows ``p_i``."""
    amp = np.asarray(basis).conj() @ ensemble.matrix.T
    return np.abs(amp) ** 2 * ensemble.priors[None, :]


def evaluate_pvm(ensemble: Ensemble, strategy: PvmStrategy) -> RatePoint:
    if strategy.n != ensemble.n or strategy.basis.shape[1] != ensemble.dimension:
        raise InvalidInputError(
            f"strategy has {strategy.n} elements of dimension {strategy.basis.shape[1]}, "
            f"ensemble has {ensemble.n} states of dimension {ensemble.dimension}"
        )
    table = outcome_table(ensemble, strategy.basis)
    diag = np.diag(table)
    w = strategy.weights
    p_c = float(w @ diag)
    p_e = float(w @ (table.sum(axis=1) - diag))
    return RatePoint.from_correct_error(_clip_unit(p_c), _clip_unit(p_e))


def evaluate_povm(ensemble: Ensemble, strategy: PovmStrategy) -> RatePoint:
    if strategy.n != ensemble.n or strategy.inconclusive_element.shape[0] != ensemble.dimension:
        raise InvalidInputError(
            f"strategy has {strategy.n} elements, ensemble has {ensemble.n} states"
        )
    psi = ensemble.matrix
    eta = ensemble.priors
    # probs[i, j] = <psi_j|Pi_i|psi_j>
    probs = np.array([np.real(np.einsum("ja,ab,jb->j", psi.conj(), op, psi)) for op in strategy.elements])
    weighted = probs * eta[None, :]
    p_c = float(np.trace(weighted))
    p_e = float(weighted.sum() - p_c)
    return RatePoint.from_correct_error(_clip_unit(p_c), _clip_unit(p_e))


def evaluate(ensemble: Ensemble, strategy: Strategy) -> RatePoint:
    if isinstance(strategy, PvmStrategy):
        return evaluate_pvm(ensemble, strategy)
    if isinstance(strategy, PovmStrategy):
        return evaluate_povm(ensemble, strategy)
    raise InvalidInputError(f"unknown strategy type {type(strategy).__name__}")


def orthocomplement(vectors: np.ndarray) -> np.ndarray:
    """Orthonormal rows spanning the complement of the row span of ``vectors``."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    # <r|v> = conj(r) . v, so the complement is the null space of conj(vectors)
    _, s, vh = np.linalg.svd(vectors.conj())
    rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
    return vh[rank:].conj()


def complete_basis(vectors: Sequence) -> np.ndarray:
    """Extend orthonormal rows to a full orthonormal basis (new rows appended)."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    rest = orthocomplement(vectors)
    return np.vstack([vectors, rest])

"""Bounded-error projective measurements.

The search is split in two. For a fixed basis the best discrimination weights
solve a fractional knapsack exactly (:func:`optimal_weights_for_basis`), so the
error budget is never a penalty term. The basis orientation is searched with
multi-start Nelder-Mead over the off-diagonal entries of a Lie-algebra
generator, around a set of anchor bases (UD constructions, the square-root
measurement, the ME projectors for two states, and seeded Haar-random bases).

Outcome-to-state association is enumerated over all permutations inside the
objective, so the local search never has to rotate one assignment into
another; returned strategies are re-ordered so that row ``i`` is read as
state ``i``.
"""

from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import ortho_group, unitary_group

from . import analytic
from .core import (
    CurvePoint,
    Ensemble,
    InvalidInputError,
    PvmStrategy,
    RatePoint,
    TradeoffCurve,
    UDImpossibleError,
    complete_basis,
    evaluate_pvm,
    outcome_table,
)
from .presets import square_root_pvm

log = logging.getLogger(__name__)

ZERO_ERROR = 1e-15
FEASIBILITY_SLACK = 1e-7
MAX_PERMUTATION_N = 5
MAX_SUBSET_N = 8


@dataclass
class PvmSolution:
    strategy: PvmStrategy
    rates: RatePoint
    epsilon: float
    restarts_used: int
    objective_history: list = field(default_factory=list)
    certified: bool = True


@dataclass
class CmFamily:
    m: int
    subset: tuple
    min_error: float
    strategy: Optional[PvmStrategy] = None


# -- inner problem -----------------------------------------------------------


def greedy_weights(c, e, eps: float) -> np.ndarray:
    """Fractional-knapsack weights maximizing ``sum w (c + e)`` s.t. ``sum w e <= eps``."""
    c = np.asarray(c, dtype=float)
    e = np.asarray(e, dtype=float)
    w = np.zeros(c.size)
    free = e <= ZERO_ERROR
    w[free & (c > 0)] = 1.0
    budget = float(eps)
    ratio = np.where(free, np.inf, c / np.where(free, 1.0, e))
    for i in np.argsort(-ratio, kind="stable"):
        if free[i]:
            continue
        if budget <= 0:
            break
        w[i] = min(1.0, budget / e[i])
        budget -= w[i] * e[i]
    return w


def _lp_values(C: np.ndarray, E: np.ndarray, eps: float) -> np.ndarray:
    """Row-wise optimum of the weight LP, via its dual.

    ``max sum w v  s.t. sum w e <= eps, 0 <= w <= 1`` equals
    ``min_{lam >= 0} lam eps + sum max(0, v - lam e)``, whose minimum sits at
    ``lam = 0`` or a breakpoint ``v_i / e_i``. Same value as
    :func:`greedy_weights` without sorting.
    """
    E0 = np.where(E <= ZERO_ERROR, 0.0, E)
    V = C + E0
    lam = np.where(E0 > 0, V / np.where(E0 > 0, E0, 1.0), 0.0)
    lam = np.concatenate([np.zeros((lam.shape[0], 1)), lam], axis=1)
    slack = np.maximum(V[:, None, :] - lam[:, :, None] * E0[:, None, :], 0.0)
    return np.min(lam * eps + slack.sum(axis=2), axis=1)


def _item_rates(table: np.ndarray, perm=None):
    """Per-element correct and error contributions ``(c, e)`` for an association."""
    n = table.shape[0]
    perm = np.arange(n) if perm is None else np.asarray(perm)
    c = table[np.arange(n), perm]
    return c, table.sum(axis=1) - c


def optimal_weights_for_basis(ensemble: Ensemble, basis, eps: float):
    """Exact optimal weights for a fixed basis with row ``i`` read as state ``i``.

    Returns ``(weights, RatePoint)``.
    """
    if eps < 0:
        raise InvalidInputError("error budget must be non-negative")
    basis = np.asarray(basis, dtype=complex)
    c, e = _item_rates(outcome_table(ensemble, basis))
    w = greedy_weights(c, e, eps)
    return w, evaluate_pvm(ensemble, PvmStrategy(basis, w))


# -- orientation parametrisation --------------------------------------------


def n_parameters(dim: int, field: str = "real") -> int:
    if field == "real":
        return dim * (dim - 1) // 2
    if field == "complex":
        return dim * dim - dim
    raise InvalidInputError(f"field must be 'real' or 'complex', got {field!r}")


@functools.lru_cache(maxsize=None)
def _upper(dim):
    return np.triu_indices(dim, 1)


def generator(params, dim: int, field: str = "real") -> np.ndarray:
    """Antisymmetric (real) or zero-diagonal skew-Hermitian (complex) generator."""
    params = np.asarray(params, dtype=float).ravel()
    need = n_parameters(dim, field)
    if params.size != need:
        raise InvalidInputError(f"expected {need} parameters for dim={dim} ({field}), got {params.size}")
    iu = _upper(dim)
    k = iu[0].size
    if field == "real":
        g = np.zeros((dim, dim))
        g[iu] = params
        return g - g.T
    g = np.zeros((dim, dim), dtype=complex)
    g[iu] = params[:k] + 1j * params[k:]
    return g - g.conj().T


def expm_skew(g: np.ndarray) -> np.ndarray:
    """``exp(g)`` for skew-Hermitian ``g`` via the eigenbasis of the Hermitian ``i g``."""
    if np.isrealobj(g) and g.shape[0] in (2, 3):
        return _rotation(g)
    lam, vecs = np.linalg.eigh(1j * g)
    out = (vecs * np.exp(-1j * lam)) @ vecs.conj().T
    return out.real if np.isrealobj(g) else out


def _rotation(g):
    if g.shape[0] == 2:
        c, s = np.cos(g[1, 0]), np.sin(g[1, 0])
        return np.array([[c, -s], [s, c]])
    theta = np.sqrt(g[0, 1] ** 2 + g[0, 2] ** 2 + g[1, 2] ** 2)
    if theta < 1e-12:
        return np.eye(3) + g + 0.5 * g @ g
    g2 = g @ g
    return np.eye(3) + (np.sin(theta) / theta) * g + ((1.0 - np.cos(theta)) / theta ** 2) * g2


def basis_from_parameters(params, dim: int, field: str = "real") -> np.ndarray:
    """Orthonormal basis (rows) given by the columns of ``exp(G(params))``."""
    return expm_skew(generator(params, dim, field)).T


# -- outer search ------------------------------------------------------------


class _Objective:
    """P_In (or P_E for C_m searches) of the best association at a basis."""

    def __init__(self, ensemble: Ensemble, eps: float, field: str, pattern=None, mode="inconclusive"):
        self.ensemble = ensemble
        self.eps = float(eps)
        self.field = field
        self.dim = ensemble.dimension
        n = ensemble.n
        if n <= MAX_PERMUTATION_N:
            self.perms = np.array(list(itertools.permutations(range(n))))
        else:
            self.perms = np.arange(n)[None, :]
        self.pattern = None if pattern is None else np.asarray(pattern, dtype=float)
        self.mode = mode
        self._slots = np.arange(n)[None, :]
        self.psi_t = ensemble.matrix.T
        self.priors = ensemble.priors

    def table(self, basis):
        return np.abs(basis.conj() @ self.psi_t) ** 2 * self.priors[None, :]

    def _CE(self, table):
        C = table[self._slots, self.perms]
        E = table.sum(axis=1)[None, :] - C
        return C, E

    def scores(self, basis):
        """Objective per association, lower is better."""
        C, E = self._CE(self.table(basis))
        if self.mode == "error":
            W = self.pattern[self.perms]
            return np.sum(W * E, axis=1)
        if self.pattern is None:
            return 1.0 - _lp_values(C, E, self.eps)
        W = self.pattern[self.perms]
        pe = np.sum(W * E, axis=1)
        p_in = 1.0 - np.sum(W * (C + E), axis=1)
        return np.where(pe <= self.eps + 1e-12, p_in, 1.0 + 1e3 * (pe - self.eps))

    def __call__(self, basis):
        return float(np.min(self.scores(basis)))

    def at(self, anchor, params):
        rot = expm_skew(generator(params, self.dim, self.field))
        return anchor @ rot

    def strategy(self, mbasis) -> PvmStrategy:
        """Best-association strategy for a basis given as matrix columns."""
        basis = mbasis.T
        k = int(np.argmin(self.scores(basis)))
        perm = self.perms[k]
        rows = np.empty_like(basis)
        rows[perm] = basis
        if self.mode == "error" or self.pattern is not None:
            return PvmStrategy(rows, self.pattern)
        w, _ = optimal_weights_for_basis(self.ensemble, rows, self.eps)
        return PvmStrategy(rows, w)


def _local_search(obj: _Objective, anchor: np.ndarray, step: float, tol: float, max_rounds=6):
    """Nelder-Mead around ``anchor`` with re-anchoring until the value stalls."""
    k = n_parameters(obj.dim, obj.field)
    best_m = anchor
    best_f = obj(anchor.T)
    converged = True
    if k == 0:
        return best_m, best_f, converged
    for round_ in range(max_rounds):
        x0 = np.zeros(k)
        simplex = np.vstack([x0, step * np.eye(k)])
        res = minimize(
            lambda x: obj(obj.at(best_m, x).T),
            x0,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": 1e-7, "fatol": tol, "maxfev": 600 * k},
        )
        converged = bool(res.success)
        gain = best_f - res.fun
        if res.fun < best_f:
            best_m = obj.at(best_m, res.x)
            best_f = float(res.fun)
        if gain <= tol:
            break
        step = max(step * 0.3, 1e-4)
    return best_m, best_f, converged


def _resolve_field(ensemble: Ensemble, field):
    if field in (None, "auto"):
        return "real" if ensemble.is_real else "complex"
    n_parameters(ensemble.dimension, field)
    return field


def _structured_anchors(ensemble: Ensemble, field: str) -> list:
    anchors = []
    try:
        for v in analytic.ud_vectors(ensemble):
            anchors.append(complete_basis([v]))
    except UDImpossibleError:
        pass
    try:
        anchors.append(square_root_pvm(ensemble).basis)
    except ValueError:
        pass
    if ensemble.n == 2:
        anchors.append(analytic.helstrom_projectors(ensemble).basis)
    anchors.append(np.eye(ensemble.dimension, dtype=complex))
    if field == "real":
        anchors = [a.real for a in anchors]
    return [a.T for a in anchors]


def _random_anchor(dim: int, field: str, seed: int, k: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
    if dim == 1:
        return np.eye(1)
    if field == "real":
        return ortho_group.rvs(dim, random_state=rng)
    return unitary_group.rvs(dim, random_state=rng)


def _search(obj: _Objective, anchors: list, restarts: int, seed: int, tol: float, step: float = 0.15):
    """Min-reduction over anchored local searches; ties keep the earliest run."""
    runs = list(anchors) + [_random_anchor(obj.dim, obj.field, seed, k) for k in range(restarts)]
    best = None
    history = []
    for idx, anchor in enumerate(runs):
        anchor = np.asarray(anchor, dtype=float if obj.field == "real" else complex)
        m, f, ok = _local_search(obj, anchor, step, tol)
        if best is None or f < best[1] - 1e-15:
            best = (m, f, ok)
        history.append(best[1])
    return best, len(runs), history


def optimize_pvm(
    ensemble: Ensemble,
    eps: float,
    restarts: int = 32,
    seed: int = 0,
    tol: float = 1e-10,
    fixed_weight_pattern: Optional[Sequence[float]] = None,
    field: str = "auto",
    initial: Sequence = (),
    structured: bool = True,
) -> PvmSolution:
    """Minimize P_In subject to P_E <= eps over weights and PVM orientation.

    ``fixed_weight_pattern`` freezes the weights (indexed by state); the
    orientation alone must then meet the budget. ``initial`` adds warm-start
    bases (rows, or :class:`PvmStrategy`). ``field='auto'`` searches real
    rotations for real ensembles and unitaries otherwise.
    """
    if not (0.0 <= eps <= 0.5):
        raise InvalidInputError(f"error budget {eps!r} outside [0, 1/2]")
    field = _resolve_field(ensemble, field)
    pattern = None
    if fixed_weight_pattern is not None:
        pattern = np.asarray(fixed_weight_pattern, dtype=float)
        if pattern.size != ensemble.n or np.any(pattern < 0) or np.any(pattern > 1):
            raise InvalidInputError("fixed_weight_pattern needs one weight in [0, 1] per state")
    obj = _Objective(ensemble, eps, field, pattern)
    anchors = [np.asarray(getattr(b, "basis", b)).T for b in initial]
    if field == "real":
        anchors = [a.real for a in anchors]
    if structured:
        anchors += _structured_anchors(ensemble, field)
    (m, f, ok), used, history = _search(obj, anchors, restarts, seed, tol)
    strategy = obj.strategy(m)
    rates = evaluate_pvm(ensemble, strategy)
    certified = ok and rates.error <= eps + FEASIBILITY_SLACK
    if not certified:
        log.warning("optimize_pvm(eps=%g): best run not certified", eps)
    return PvmSolution(strategy, rates, float(eps), used, [float(h) for h in history], certified)


def pvm_tradeoff_curve(
    ensemble: Ensemble,
    eps_grid: Sequence[float],
    restarts: int = 32,
    seed: int = 0,
    tol: float = 1e-10,
    field: str = "auto",
) -> TradeoffCurve:
    """Optimal projective P_In over an ascending grid of error budgets.

    Each grid point gets a fresh multi-start solve; sweeps low-to-high and
    high-to-low then re-solve from the neighbour's basis, and the pointwise
    best is kept. A final pass carries a lower-budget basis forward whenever
    it beats the current point, so P_In is non-increasing.
    """
    eps_grid = [float(x) for x in eps_grid]
    if not eps_grid:
        raise InvalidInputError("empty epsilon grid")
    if any(b <= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise InvalidInputError("epsilon grid must be strictly increasing")
    best = [optimize_pvm(ensemble, e, restarts, seed, tol, field=field) for e in eps_grid]

    def warm(k, src):
        sol = optimize_pvm(
            ensemble, eps_grid[k], 0, seed, tol, field=field, initial=[best[src].strategy], structured=False
        )
        if sol.rates.inconclusive < best[k].rates.inconclusive - 1e-13:
            sol.restarts_used += best[k].restarts_used
            sol.certified = sol.certified or best[k].certified
            best[k] = sol

    for k in range(1, len(eps_grid)):
        warm(k, k - 1)
    for k in range(len(eps_grid) - 2, -1, -1):
        warm(k, k + 1)

    points = []
    for k, eps in enumerate(eps_grid):
        sol = best[k]
        strategy, rates = sol.strategy, sol.rates
        if points:
            prev = points[-1].strategy
            w, carried = optimal_weights_for_basis(ensemble, prev.basis, eps)
            if carried.inconclusive < rates.inconclusive:
                strategy, rates = PvmStrategy(prev.basis, w), carried
        points.append(CurvePoint(eps, rates, strategy, sol.certified))
    return TradeoffCurve(points, "pvm")


def cm_min_error(
    ensemble: Ensemble, m: int, restarts: int = 16, seed: int = 0, tol: float = 1e-12
) -> CmFamily:
    """Smallest error of any PVM that always answers for exactly ``m`` states.

    Weights are 1 on the chosen subset and 0 elsewhere; every size-``m``
    subset is tried.
    """
    n = ensemble.n
    if not (1 <= m <= n):
        raise InvalidInputError(f"m={m} outside [1, {n}]")
    if n > MAX_SUBSET_N:
        raise InvalidInputError(f"subset enumeration supports n <= {MAX_SUBSET_N}")
    field = _resolve_field(ensemble, "auto")
    anchors = _structured_anchors(ensemble, field)
    best = None
    for subset in itertools.combinations(range(n), m):
        pattern = np.zeros(n)
        pattern[list(subset)] = 1.0
        obj = _Objective(ensemble, 0.0, field, pattern, mode="error")
        (mb, f, _), _, _ = _search(obj, anchors, restarts, seed, tol)
        if best is None or f < best.min_error - 1e-15:
            strategy = obj.strategy(mb)
            err = evaluate_pvm(ensemble, strategy).error
            best = CmFamily(m, subset, float(err), strategy)
    return best


def cm_families(ensemble: Ensemble, **kw) -> list:
    return [cm_min_error(ensemble, m, **kw) for m in range(1, ensemble.n + 1)]

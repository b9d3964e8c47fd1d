"""Bounded-error generalized measurements.

Two solvers for the same problem (minimize P_In subject to P_E <= eps over
POVMs with one element per state plus an inconclusive element):

``method="sdp"``
    The convex semidefinite program, handed to cvxpy (Clarabel, then CVXOPT
    and SCS). This is the default.
``method="penalty"``
    Square-root factors ``Pi_i = A_i^dag A_i`` with quadratic penalties on
    ``Pi_0 >= 0`` and the error budget, continued x10 per stage, solved with
    L-BFGS-B from seeded random starts.

Either way the raw solution is projected onto the feasible set before it is
evaluated, so reported rates are those of a genuine measurement.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import (
    CurvePoint,
    Ensemble,
    InvalidInputError,
    PovmStrategy,
    RatePoint,
    TradeoffCurve,
    evaluate_povm,
)

log = logging.getLogger(__name__)

FEAS_TOL = 1e-6
SDP_SOLVERS = ("CLARABEL", "CVXOPT", "SCS")


class Feasibility(NamedTuple):
    min_eigenvalue: float
    completeness_residual: float


@dataclass
class PovmSolution:
    strategy: PovmStrategy
    rates: RatePoint
    epsilon: float
    feasibility: Feasibility
    certified: bool = True
    method: str = "sdp"


def feasibility(strategy: PovmStrategy) -> Feasibility:
    ops = strategy.all_elements
    dim = ops[0].shape[0]
    min_eig = min(float(np.linalg.eigvalsh(op).min()) for op in ops)
    residual = float(np.max(np.abs(sum(ops) - np.eye(dim))))
    return Feasibility(min_eig, residual)


def project_povm(elements: Sequence[np.ndarray]) -> PovmStrategy:
    """Nearest-feasible POVM: clip negative eigenvalues, then shrink if ``sum > I``."""
    clipped = []
    for op in elements:
        op = 0.5 * (np.asarray(op, dtype=complex) + np.asarray(op, dtype=complex).conj().T)
        lam, vecs = np.linalg.eigh(op)
        clipped.append((vecs * np.clip(lam, 0.0, None)) @ vecs.conj().T)
    total = sum(clipped)
    top = float(np.linalg.eigvalsh(total).max())
    if top > 1.0:
        clipped = [op / top for op in clipped]
        total = total / top
    dim = total.shape[0]
    pi0 = np.eye(dim) - total
    pi0 = 0.5 * (pi0 + pi0.conj().T)
    return PovmStrategy(tuple(clipped), pi0)


def _check_eps(eps):
    if not (0.0 <= eps <= 0.5):
        raise InvalidInputError(f"error budget {eps!r} outside [0, 1/2]")


def _operators(ensemble: Ensemble):
    """Average state and per-element error operators ``E_i = sum_{j != i} eta_j rho_j``."""
    rhos = [eta * rho for eta, rho in zip(ensemble.priors, ensemble.density_matrices())]
    avg = sum(rhos)
    return avg, [avg - r for r in rhos]


# -- SDP ----------------------------------------------------------------------


def _solve_sdp(ensemble: Ensemble, eps: Optional[float], minimize_error=False):
    import cvxpy as cp

    n, dim = ensemble.n, ensemble.dimension
    real = ensemble.is_real
    avg, errs = _operators(ensemble)
    if real:
        avg, errs = avg.real, [e.real for e in errs]
        pis = [cp.Variable((dim, dim), symmetric=True) for _ in range(n)]
    else:
        pis = [cp.Variable((dim, dim), hermitian=True) for _ in range(n)]
    total = sum(pis)

    def re_tr(x):
        return cp.trace(x) if real else cp.real(cp.trace(x))

    p_e = sum(re_tr(e @ p) for e, p in zip(errs, pis))
    p_con = re_tr(avg @ total)
    cons = [p >> 0 for p in pis]
    if minimize_error:
        cons.append(total == np.eye(dim))
        problem = cp.Problem(cp.Minimize(p_e), cons)
    else:
        cons += [np.eye(dim) - total >> 0, p_e <= eps]
        problem = cp.Problem(cp.Maximize(p_con), cons)
    # an inaccurate status moves on to the next solver but is kept as a fallback
    fallback = None
    for solver in SDP_SOLVERS:
        if solver not in cp.installed_solvers():
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                problem.solve(solver=solver)
        except (cp.error.SolverError, cp.error.DCPError) as exc:
            log.debug("solver %s failed: %s", solver, exc)
            continue
        if pis[0].value is None:
            continue
        values = [np.asarray(p.value, dtype=complex) for p in pis]
        if problem.status == "optimal":
            return values, True
        if problem.status == "optimal_inaccurate" and fallback is None:
            fallback = values
        log.debug("solver %s returned status %s", solver, problem.status)
    if fallback is None:
        return [np.zeros((dim, dim)) for _ in range(n)], False
    return fallback, False


# -- penalty continuation ------------------------------------------------------


class _Penalty:
    """Penalised P_In over stacked real/imag parts of the factors ``A_i``."""

    def __init__(self, ensemble: Ensemble, eps: float):
        self.n, self.dim = ensemble.n, ensemble.dimension
        self.real = ensemble.is_real
        self.avg, self.errs = _operators(ensemble)
        self.eps = eps
        self.mu = 1.0

    def unpack(self, x):
        d, n = self.dim, self.n
        if self.real:
            return x.reshape(n, d, d).astype(complex)
        half = n * d * d
        return (x[:half] + 1j * x[half:]).reshape(n, d, d)

    def pack_grad(self, g):
        if self.real:
            return g.real.ravel()
        return np.concatenate([g.real.ravel(), g.imag.ravel()])

    def elements(self, x):
        return [a.conj().T @ a for a in self.unpack(x)]

    def __call__(self, x):
        A = self.unpack(x)
        pis = [a.conj().T @ a for a in A]
        total = sum(pis)
        lam, vecs = np.linalg.eigh(np.eye(self.dim) - total)
        neg = np.minimum(lam, 0.0)
        p_e = sum(np.real(np.trace(e @ p)) for e, p in zip(self.errs, pis))
        over = max(0.0, p_e - self.eps)
        f = 1.0 - np.real(np.trace(self.avg @ total)) + self.mu * (np.sum(neg ** 2) + over ** 2)
        # dL/dPi_i, Hermitian
        d_total = -(vecs * (2.0 * neg)) @ vecs.conj().T
        grads = []
        for a, e in zip(A, self.errs):
            m = -self.avg + self.mu * (d_total + 2.0 * over * e)
            # d Re tr(M A^dag A) = 2 Re tr(M A^dag dA): gradient w.r.t. (Re A, Im A)
            b = 2.0 * m @ a.conj().T
            grads.append(b.T.conj())
        return float(f), self.pack_grad(np.array(grads))


def _solve_penalty(ensemble: Ensemble, eps: float, restarts: int, seed: int, stages: int, tol: float):
    pen = _Penalty(ensemble, eps)
    n, d = ensemble.n, ensemble.dimension
    size = n * d * d * (1 if pen.real else 2)
    best, best_val = None, np.inf
    for k in range(max(restarts, 1)):
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        x = rng.normal(size=size) / np.sqrt(2.0 * n * d)
        pen.mu = 10.0
        stage = 0
        while True:
            res = minimize(pen, x, jac=True, method="L-BFGS-B", options={"gtol": tol, "ftol": tol, "maxiter": 5000})
            x = res.x
            stage += 1
            strat = project_povm(pen.elements(x))
            rates = evaluate_povm(ensemble, strat)
            raw = pen.elements(x)
            viol = max(
                -float(np.linalg.eigvalsh(np.eye(d) - sum(raw)).min()),
                rates.error - eps,
            )
            if stage >= stages and viol <= 0.1 * FEAS_TOL:
                break
            if stage >= stages + 4:
                break
            pen.mu *= 10.0
        val = rates.inconclusive if rates.error <= eps + FEAS_TOL else 1.0 + rates.error
        if val < best_val - 1e-15:
            best, best_val = raw, val
    return best, best_val <= 1.0


# -- public API ---------------------------------------------------------------


def optimize_povm(
    ensemble: Ensemble,
    eps: float,
    method: str = "sdp",
    restarts: int = 32,
    seed: int = 0,
    stages: int = 6,
    tol: float = 1e-10,
) -> PovmSolution:
    """Minimize P_In subject to P_E <= eps over POVMs.

    ``restarts``, ``seed``, ``stages`` and ``tol`` only matter for
    ``method="penalty"``; the SDP is convex and needs a single solve.
    """
    _check_eps(eps)
    if method == "sdp":
        raw, ok = _solve_sdp(ensemble, eps)
    elif method == "penalty":
        raw, ok = _solve_penalty(ensemble, eps, restarts, seed, stages, tol)
    else:
        raise InvalidInputError(f"unknown POVM method {method!r}")
    strategy = project_povm(raw)
    rates = evaluate_povm(ensemble, strategy)
    feas = feasibility(strategy)
    certified = (
        ok
        and feas.min_eigenvalue >= -FEAS_TOL
        and feas.completeness_residual <= FEAS_TOL
        and rates.error <= eps + FEAS_TOL
    )
    if not certified:
        log.warning("optimize_povm(eps=%g, %s): feasibility certificate missing", eps, method)
    return PovmSolution(strategy, rates, float(eps), feas, certified, method)


def minimum_error(ensemble: Ensemble) -> float:
    """Minimum-error rate over all POVMs with no inconclusive outcome."""
    raw, ok = _solve_sdp(ensemble, None, minimize_error=True)
    if not ok:
        log.warning("minimum-error SDP did not report an optimal status")
    return evaluate_povm(ensemble, project_povm(raw)).error


def mix(a: PovmStrategy, b: PovmStrategy, lam: float) -> PovmStrategy:
    """Run ``a`` with probability ``lam`` and ``b`` otherwise."""
    return PovmStrategy(
        tuple(lam * x + (1 - lam) * y for x, y in zip(a.elements, b.elements)),
        lam * a.inconclusive_element + (1 - lam) * b.inconclusive_element,
    )


def povm_tradeoff_curve(ensemble: Ensemble, eps_grid: Sequence[float], **opts) -> TradeoffCurve:
    """Optimal POVM P_In over an ascending grid of budgets.

    Post-processing keeps the curve non-increasing (a lower-budget solution is
    feasible at a higher budget) and below every chord between grid points
    (the mixture of two POVMs is a POVM).
    """
    eps_grid = [float(x) for x in eps_grid]
    if not eps_grid:
        raise InvalidInputError("empty epsilon grid")
    if any(b <= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise InvalidInputError("epsilon grid must be strictly increasing")
    sols = [optimize_povm(ensemble, e, **opts) for e in eps_grid]
    strategies = [s.strategy for s in sols]
    rates = [s.rates for s in sols]
    certified = [s.certified for s in sols]
    for k in range(1, len(eps_grid)):
        if rates[k - 1].inconclusive < rates[k].inconclusive:
            strategies[k], rates[k] = strategies[k - 1], rates[k - 1]
    for k in range(1, len(eps_grid) - 1):
        for a in range(k):
            for b in range(k + 1, len(eps_grid)):
                lam = (eps_grid[b] - eps_grid[k]) / (eps_grid[b] - eps_grid[a])
                chord = lam * rates[a].inconclusive + (1 - lam) * rates[b].inconclusive
                if chord < rates[k].inconclusive - 1e-12:
                    cand = mix(strategies[a], strategies[b], lam)
                    cand_rates = evaluate_povm(ensemble, cand)
                    if cand_rates.error <= eps_grid[k] + FEAS_TOL and cand_rates.inconclusive < rates[k].inconclusive:
                        strategies[k], rates[k] = cand, cand_rates
    points = [CurvePoint(e, r, s, c) for e, r, s, c in zip(eps_grid, rates, strategies, certified)]
    return TradeoffCurve(points, "povm")


def idp_povm(ensemble: Ensemble) -> PovmStrategy:
    """Optimal two-state unambiguous POVM (requires the generalized regime)."""
    if ensemble.n != 2:
        raise InvalidInputError("the IDP construction needs exactly two states")
    psi1, psi2 = ensemble.matrix
    eta1, eta2 = ensemble.priors
    s = abs(np.vdot(psi1, psi2))
    if s >= 1 - 1e-12:
        raise InvalidInputError("identical states cannot be discriminated unambiguously")
    if eta1 == 0 or eta2 == 0:
        raise InvalidInputError("IDP construction needs both priors positive")
    fail1, fail2 = np.sqrt(eta2 / eta1) * s, np.sqrt(eta1 / eta2) * s
    if fail1 > 1 or fail2 > 1:
        raise InvalidInputError("priors outside the regime where the POVM is optimal")
    elements = []
    for fail, other in ((fail1, psi2), (fail2, psi1)):
        perp = np.array([-other[1].conj(), other[0].conj()])
        perp /= np.linalg.norm(perp)
        elements.append((1 - fail) / (1 - s * s) * np.outer(perp, perp.conj()))
    return PovmStrategy(tuple(elements), np.eye(2) - sum(elements))


def zlg_inequality_check(ensemble: Ensemble, strategy: PovmStrategy, tol: float = 1e-9):
    """Two-state trade-off inequality between per-state rates.

    ``sqrt(P_In1 P_In2) >= |<psi1|psi2>| - sqrt(P_C1 P_E2) - sqrt(P_C2 P_E1)``
    with rates conditional on the sent state, compared squared with the
    right side floored at zero. Returns ``(lhs, rhs, holds)``.
    """
    if ensemble.n != 2 or strategy.n != 2:
        raise InvalidInputError("the inequality applies to two states only")
    psi1, psi2 = ensemble.matrix
    pi1, pi2 = strategy.elements
    pi0 = strategy.inconclusive_element

    def expect(op, v):
        return max(float(np.real(np.vdot(v, op @ v))), 0.0)

    p_in1, p_in2 = expect(pi0, psi1), expect(pi0, psi2)
    p_c1, p_c2 = expect(pi1, psi1), expect(pi2, psi2)
    p_e1, p_e2 = expect(pi2, psi1), expect(pi1, psi2)
    s = abs(np.vdot(psi1, psi2))
    lhs = p_in1 * p_in2
    rhs = max(0.0, s - np.sqrt(p_c1 * p_e2) - np.sqrt(p_c2 * p_e1)) ** 2
    return lhs, rhs, bool(lhs >= rhs - tol)

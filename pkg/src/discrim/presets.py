"""Worked-example ensembles and strategies."""

import numpy as np

from .core import Ensemble, PvmStrategy, complete_basis


def two_state(theta=np.pi / 4, priors=(0.5, 0.5), label=None) -> Ensemble:
    """Real two-state ensemble: psi1 = (1, 0), psi2 = (cos theta, sin theta)."""
    vectors = [(1.0, 0.0), (np.cos(theta), np.sin(theta))]
    return Ensemble.from_vectors(vectors, priors, label or f"two-state theta={theta:.6g}")


def three_state(priors=None) -> Ensemble:
    """The three-state triplet; psi3 is the mirror image of psi2 in the second axis."""
    a, b = np.sqrt(2.0 / 3.0), 1.0 / np.sqrt(3.0)
    vectors = [(a, 0.0, b), (0.0, b, a), (0.0, -b, a)]
    return Ensemble.from_vectors(vectors, priors, "three-state triplet")


def c2_construction(ensemble=None) -> PvmStrategy:
    """Two-discriminated-state PVM for :func:`three_state`.

    ``q1`` is orthogonal to psi1 and psi3 (so it errs on nothing and is read as
    psi2), ``q2`` is orthogonal to q1 and psi1 (read as psi3), and the last
    vector is read as psi1 with weight 0. Rows are ordered by associated state.
    """
    e = ensemble or three_state()
    psi = e.matrix.real
    q1 = np.cross(psi[0], psi[2])
    q1 /= np.linalg.norm(q1)
    q2 = np.cross(q1, psi[0])
    q2 /= np.linalg.norm(q2)
    q = complete_basis([q1, q2])
    return PvmStrategy(np.array([q[2], q[0], q[1]]), [0.0, 1.0, 1.0])


def square_root_pvm(ensemble: Ensemble) -> PvmStrategy:
    """Square-root (pretty-good) measurement with all weights 1.

    Rows are ``p_i = sum_k (G^-1/2)_ki psi_k`` for Gram matrix ``G``.
    """
    psi = ensemble.matrix
    w, v = np.linalg.eigh(ensemble.gram())
    if w.min() <= 1e-12:
        raise ValueError("square-root measurement needs linearly independent states")
    inv_sqrt = v @ np.diag(w ** -0.5) @ v.conj().T
    return PvmStrategy(inv_sqrt.T @ psi, np.ones(ensemble.n))

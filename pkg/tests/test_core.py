import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from discrim import presets
from discrim.analytic import helstrom_projectors
from discrim.core import (
    Ensemble,
    InvalidInputError,
    PovmStrategy,
    PvmStrategy,
    QuantumState,
    RatePoint,
    TradeoffCurve,
    CurvePoint,
    complete_basis,
    evaluate,
    evaluate_povm,
    evaluate_pvm,
    orthocomplement,
    overlap,
)
from discrim.povm_opt import idp_povm

S = 1 / np.sqrt(2)


def random_ensemble(rng, n, complex_=True):
    m = rng.normal(size=(n, n)) + (1j * rng.normal(size=(n, n)) if complex_ else 0)
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    priors = rng.dirichlet(np.ones(n))
    return Ensemble.from_vectors(m, priors)


def random_pvm(rng, n):
    u = unitary_group.rvs(n, random_state=rng)
    return PvmStrategy(u, rng.uniform(size=n))


class TestStates:
    def test_overlap_examples(self):
        psi = QuantumState([1, 0])
        assert overlap(psi, psi) == pytest.approx(1)
        assert overlap(QuantumState([1, 0]), QuantumState([0, 1])) == 0
        assert abs(overlap(psi, QuantumState([np.cos(np.pi / 4), np.sin(np.pi / 4)]))) == pytest.approx(0.70711, abs=1e-5)

    def test_overlap_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            overlap(QuantumState([1, 0]), QuantumState([1, 0, 0]))

    def test_small_norm_error_is_renormalized(self):
        s = QuantumState([0.7071068, 0.7071068])
        assert np.linalg.norm(s.amplitudes) == pytest.approx(1, abs=1e-12)

    def test_large_norm_error_is_rejected(self):
        with pytest.raises(InvalidInputError, match="norm"):
            QuantumState([1.0, 0.01])

    def test_dimension(self):
        assert QuantumState([1, 0, 0]).dimension == 3


class TestEnsemble:
    def test_default_priors_equal(self):
        e = Ensemble.from_vectors([[1, 0], [0, 1]])
        assert np.allclose(e.priors, 0.5)

    def test_priors_must_sum_to_one(self):
        with pytest.raises(InvalidInputError, match="sum"):
            Ensemble.from_vectors([[1, 0], [0, 1]], [0.6, 0.6])

    def test_prior_count(self):
        with pytest.raises(InvalidInputError):
            Ensemble.from_vectors([[1, 0], [0, 1]], [1.0])

    def test_state_count_equals_dimension(self):
        with pytest.raises(InvalidInputError, match="dimension"):
            Ensemble.from_vectors([[1, 0, 0], [0, 1, 0]])

    def test_negative_prior(self):
        with pytest.raises(InvalidInputError):
            Ensemble.from_vectors([[1, 0], [0, 1]], [1.2, -0.2])


class TestStrategies:
    def test_non_orthogonal_basis_rejected(self):
        with pytest.raises(InvalidInputError, match="orthogonal"):
            PvmStrategy([[1, 0], [S, S]], [1, 1])

    def test_weight_range(self):
        with pytest.raises(InvalidInputError, match="weights"):
            PvmStrategy(np.eye(2), [1.5, 0])

    def test_from_rounded_snaps_to_orthonormal(self):
        s = PvmStrategy.from_rounded([[0.71, -0.71], [0.71, 0.71]], [1, 0])
        assert np.allclose(s.basis @ s.basis.conj().T, np.eye(2), atol=1e-12)

    def test_povm_rejects_negative_element(self):
        with pytest.raises(InvalidInputError, match="positive semidefinite"):
            PovmStrategy([np.diag([1.2, 0]), np.diag([-0.2, 0])], np.diag([0, 1]))

    def test_povm_rejects_incomplete(self):
        with pytest.raises(InvalidInputError, match="identity"):
            PovmStrategy([np.diag([0.5, 0]), np.zeros((2, 2))], np.zeros((2, 2)))

    def test_povm_rejects_non_hermitian(self):
        with pytest.raises(InvalidInputError, match="Hermitian"):
            PovmStrategy([np.array([[0, 0.1], [0, 0]]), np.zeros((2, 2))], np.eye(2) - np.array([[0, 0.1], [0, 0]]))

    def test_ratepoint_sum(self):
        with pytest.raises(InvalidInputError):
            RatePoint(0.5, 0.5, 0.5)

    def test_curve_requires_increasing_eps(self):
        r = RatePoint(0, 1, 0)
        s = PvmStrategy(np.eye(2), [0, 0])
        with pytest.raises(InvalidInputError):
            TradeoffCurve([CurvePoint(0.1, r, s), CurvePoint(0.1, r, s)])


class TestEvaluation:
    def test_two_state_ud_pvm(self, two):
        s = PvmStrategy([[S, -S], [S, S]], [1, 0])
        assert evaluate_pvm(two, s).as_tuple() == pytest.approx((0.25, 0, 0.75), abs=1e-12)

    def test_zero_weights(self, three):
        s = PvmStrategy(np.eye(3), [0, 0, 0])
        assert evaluate_pvm(three, s).as_tuple() == (0, 0, 1)

    def test_c2_five_digit_basis(self, three):
        p1 = [0.37798, -0.75593, -0.53452]
        p2 = [-0.43644, -0.65468, 0.61722]
        p3 = np.cross(p1, p2)
        # rows ordered by associated state: psi1 <- p3, psi2 <- p1, psi3 <- p2
        s = PvmStrategy.from_rounded([p3, p1, p2], [0, 1, 1])
        r = evaluate_pvm(three, s)
        assert r.correct == pytest.approx(0.5132, abs=1e-3)
        assert r.error == pytest.approx(0.00529, abs=1e-3)

    def test_c2_construction_exact(self, three):
        r = evaluate_pvm(three, presets.c2_construction())
        assert r.correct == pytest.approx(97 / 189, abs=1e-12)
        assert r.error == pytest.approx(1 / 189, abs=1e-12)

    def test_idp_povm(self, two):
        r = evaluate_povm(two, idp_povm(two))
        assert r.as_tuple() == pytest.approx((1 - S, 0, S), abs=1e-9)

    def test_trivial_povm(self, two):
        s = PovmStrategy([np.zeros((2, 2))] * 2, np.eye(2))
        assert evaluate_povm(two, s).as_tuple() == (0, 0, 1)

    def test_helstrom_as_povm(self, two):
        r = evaluate_povm(two, helstrom_projectors(two).as_povm())
        assert r.error == pytest.approx(0.14645, abs=1e-5)
        assert r.inconclusive == pytest.approx(0, abs=1e-12)

    def test_mismatched_sizes(self, two):
        with pytest.raises(InvalidInputError):
            evaluate(two, PvmStrategy(np.eye(3), [1, 1, 1]))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 5))
def test_rates_are_probabilities(seed, n):
    rng = np.random.default_rng(seed)
    e, s = random_ensemble(rng, n), random_pvm(rng, n)
    for r in (evaluate_pvm(e, s), evaluate_povm(e, s.as_povm())):
        assert all(-1e-12 <= x <= 1 + 1e-12 for x in r.as_tuple())
        assert sum(r.as_tuple()) == pytest.approx(1, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 5))
def test_pvm_as_povm_consistency(seed, n):
    rng = np.random.default_rng(seed)
    e, s = random_ensemble(rng, n), random_pvm(rng, n)
    s = PvmStrategy(s.basis, np.ones(n)) if seed % 2 else s
    assert evaluate_pvm(e, s).as_tuple() == pytest.approx(evaluate_povm(e, s.as_povm()).as_tuple(), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4), alpha=st.floats(0, 2 * np.pi))
def test_global_phase_invariance(seed, n, alpha):
    rng = np.random.default_rng(seed)
    e, s = random_ensemble(rng, n), random_pvm(rng, n)
    k = seed % n
    states = list(e.states)
    states[k] = states[k].with_phase(alpha)
    basis = s.basis.copy()
    basis[(k + 1) % n] *= np.exp(1j * alpha)
    e2 = Ensemble(tuple(states), e.priors)
    s2 = PvmStrategy(basis, s.weights)
    assert evaluate_pvm(e2, s2).as_tuple() == pytest.approx(evaluate_pvm(e, s).as_tuple(), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 5))
def test_weight_linearity(seed, n):
    rng = np.random.default_rng(seed)
    e, s = random_ensemble(rng, n), random_pvm(rng, n)
    i = seed % n

    def at(w):
        weights = s.weights.copy()
        weights[i] = w
        return np.array(evaluate_pvm(e, PvmStrategy(s.basis, weights)).as_tuple())

    assert at(0.5) == pytest.approx(0.5 * (at(0) + at(1)), abs=1e-12)


def test_orthocomplement_complex():
    rng = np.random.default_rng(3)
    v = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    c = orthocomplement(v)
    assert c.shape == (1, 3)
    assert np.allclose(v.conj() @ c.T, 0, atol=1e-12)
    b = complete_basis(v[:1] / np.linalg.norm(v[0]))
    assert np.allclose(b.conj() @ b.T, np.eye(3), atol=1e-12)

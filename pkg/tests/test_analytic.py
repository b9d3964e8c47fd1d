import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discrim import presets
from discrim.analytic import (
    TwoStateGeometry,
    abstain_line,
    abstain_transform,
    guess_line,
    guess_transform,
    helstrom_bound,
    helstrom_projectors,
    reference_lines,
    two_state_correct_curve,
    two_state_rates_from_angle,
    ud_povm_rate_two_state,
    ud_pvm_rate,
    ud_vectors,
)
from discrim.core import Ensemble, InvalidInputError, RatePoint, UDImpossibleError, evaluate_pvm

S = 1 / np.sqrt(2)
PI4 = TwoStateGeometry(np.pi / 4)


@pytest.mark.parametrize("s, expected", [(0, 0), (1, 0.5), (S, 0.146447)])
def test_helstrom_examples(s, expected):
    assert helstrom_bound(0.5, 0.5, s) == pytest.approx(expected, abs=1e-6)


def test_helstrom_at_rounded_overlap():
    # the five-digit overlap shifts the bound by about 1.6e-6
    assert helstrom_bound(0.5, 0.5, 0.70711) == pytest.approx(0.146447, abs=1e-5)


def test_helstrom_projectors_attain_bound(two):
    r = evaluate_pvm(two, helstrom_projectors(two))
    assert r.error == pytest.approx(helstrom_bound(0.5, 0.5, S), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(s1=st.floats(0, 1), s2=st.floats(0, 1), eta=st.floats(0.5, 1))
def test_helstrom_monotone_and_max_at_equal_priors(s1, s2, eta):
    lo, hi = sorted((s1, s2))
    assert helstrom_bound(0.5, 0.5, lo) <= helstrom_bound(0.5, 0.5, hi) + 1e-15
    assert helstrom_bound(eta, 1 - eta, hi) <= helstrom_bound(0.5, 0.5, hi) + 1e-15


def test_ud_pvm_two_state(two):
    rate, idx, vec = ud_pvm_rate(two)
    assert rate == pytest.approx(0.25, abs=1e-12)
    assert idx == 0
    assert abs(np.vdot(vec, two.matrix[1])) < 1e-12


def test_ud_pvm_three_state(three):
    rate, idx, _ = ud_pvm_rate(three)
    assert rate == pytest.approx(16 / 63, abs=1e-12)
    assert round(rate, 3) == 0.254
    assert idx == 1  # psi2 and psi3 tie; lowest index wins


def test_ud_pvm_orthogonal_unequal_priors():
    e = Ensemble.from_vectors([[1, 0], [0, 1]], [0.7, 0.3])
    assert ud_pvm_rate(e)[0] == pytest.approx(0.7)


def test_ud_impossible_for_dependent_states():
    e = Ensemble.from_vectors([[1, 0, 0], [0, 1, 0], [S, S, 0]])
    with pytest.raises(UDImpossibleError):
        ud_vectors(e)


@pytest.mark.parametrize(
    "args, expected", [((0.5, 0.5, 0.70711), 0.29289), ((0.5, 0.5, 0), 1.0), ((0.9, 0.1, 0.5), 0.675)]
)
def test_ud_povm_rate_examples(args, expected):
    assert ud_povm_rate_two_state(*args) == pytest.approx(expected, abs=1e-5)


def test_ud_pvm_matches_povm_fallback():
    e = presets.two_state(np.arccos(0.5), priors=(0.9, 0.1))
    assert ud_pvm_rate(e)[0] == pytest.approx(ud_povm_rate_two_state(0.9, 0.1, 0.5), abs=1e-12)


@pytest.mark.parametrize(
    "phi, expected", [(0, (0.25, 0)), (np.pi / 8, (0.42678, 0.07322)), (np.pi / 4, (0.5, 0.25))]
)
def test_rates_from_angle(phi, expected):
    assert two_state_rates_from_angle(PI4, phi) == pytest.approx(expected, abs=1e-5)


def test_rates_from_angle_domain():
    with pytest.raises(InvalidInputError):
        two_state_rates_from_angle(PI4, np.pi / 3)


@pytest.mark.parametrize("p_e, expected", [(0, 0.25), (0.0732233, 0.426777), (0.05, 0.40)])
def test_correct_curve_examples(p_e, expected):
    assert two_state_correct_curve(PI4, p_e) == pytest.approx(expected, abs=1e-6)


def test_correct_curve_matches_angle_form():
    rng = np.random.default_rng(11)
    for _ in range(100):
        theta = rng.uniform(0.05, np.pi / 2 - 0.05)
        eta1 = rng.uniform(0.5, 0.95)
        g = TwoStateGeometry(theta, eta1, 1 - eta1)
        p_max = g.eta2 * np.sin(np.pi / 2 - theta) ** 2
        p_e = rng.uniform(0, p_max)
        phi = np.arcsin(np.sqrt(p_e / g.eta2))
        p_c, err = two_state_rates_from_angle(g, phi)
        assert err == pytest.approx(p_e, abs=1e-12)
        assert two_state_correct_curve(g, p_e) == pytest.approx(p_c, abs=1e-10)


def test_square_root_scaling_of_curve():
    p_e = np.geomspace(1e-8, 1e-4, 30)
    gain = np.array([two_state_correct_curve(PI4, x) for x in p_e]) - PI4.ud_rate
    slope = np.polyfit(np.log(p_e), np.log(gain), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.01)


def test_geometry_from_ensemble(two):
    g = TwoStateGeometry.from_ensemble(two)
    assert g.theta == pytest.approx(np.pi / 4)
    assert g.ud_rate == pytest.approx(0.25)


class TestTransforms:
    def test_guess_from_povm_ud(self):
        r = guess_transform(RatePoint(0, 0.70711, 0.29289), 2, 1)
        assert r.as_tuple() == pytest.approx((0.64645, 0.35355, 0), abs=1e-5)

    def test_pure_guessing(self):
        r = guess_transform(RatePoint(0, 1, 0), 4, 1)
        assert r.as_tuple() == pytest.approx((0.25, 0.75, 0))

    def test_identities(self):
        r = RatePoint(0.1, 0.3, 0.6)
        assert guess_transform(r, 3, 0) == r
        assert abstain_transform(r, 0) == r

    def test_abstain_examples(self):
        r = RatePoint(0.14645, 0, 0.85355)
        assert abstain_transform(r, 1).as_tuple() == pytest.approx((0, 0, 1))
        assert abstain_transform(r, 0.5).as_tuple() == pytest.approx((0.426775, 0.073225, 0.5), abs=1e-6)

    def test_best_prior_guessing(self):
        r = guess_transform(RatePoint(0, 1, 0), 2, 1, priors=[0.8, 0.2])
        assert r.correct == pytest.approx(0.8)

    @settings(max_examples=50, deadline=None)
    @given(
        c=st.floats(0, 1), e=st.floats(0, 1), n=st.integers(2, 6), g=st.floats(0, 1), a=st.floats(0, 1)
    )
    def test_composition_stays_valid(self, c, e, n, g, a):
        if c + e > 1:
            c, e = c / (c + e), e / (c + e)
        r = RatePoint(e, 1 - c - e, c)
        out = abstain_transform(guess_transform(r, n, g), a)
        assert sum(out.as_tuple()) == pytest.approx(1, abs=1e-12)
        assert min(out.as_tuple()) >= -1e-12

    def test_guess_slope(self):
        r = RatePoint(0, 0.75, 0.25)
        a, b = guess_transform(r, 3, 0.2), guess_transform(r, 3, 0.6)
        slope = (b.inconclusive - a.inconclusive) / (b.error - a.error)
        assert slope == pytest.approx(-3 / 2)


def test_reference_lines():
    lines = reference_lines(0.146447, 0.75, 2)
    assert lines["abstain"] == ((0, 1), (0.146447, 0))
    assert lines["guess"][1] == pytest.approx((0.375, 0))
    assert guess_line(0.75, 2, 0.375) == pytest.approx(0)
    assert abstain_line(0.146447, 0.146447 / 2) == pytest.approx(0.5)

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvsbm.errors import (
    BadLength,
    BadModelSpec,
    InvalidNodeCount,
    InvalidProbability,
    NegativeMass,
    NotNormalized,
    ViewsOutOfRange,
)
from mvsbm.model import (
    DistributionOnHypercube,
    MvsbmParams,
    check_assumptions,
    make_bernoulli_sbm,
    make_identical_views,
    make_independent_views,
    params_from_json,
    product_mass,
    validate_distribution,
)


class TestValidateDistribution:
    def test_bernoulli_half(self):
        d = validate_distribution([0.5, 0.5], 1)
        assert d.num_views == 1
        assert d.marginal(0) == 0.5

    def test_uniform_two_views(self):
        d = validate_distribution([0.25] * 4, 2)
        assert np.flatnonzero(d.support).tolist() == [0, 1, 2, 3]

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            validate_distribution([0.5, 0.6], 1)

    def test_negative(self):
        with pytest.raises(NegativeMass):
            validate_distribution([1.5, -0.5], 1)

    def test_bad_length(self):
        with pytest.raises(BadLength):
            validate_distribution([0.5, 0.25, 0.25], 2)

    @pytest.mark.parametrize("D", [0, 17])
    def test_views_out_of_range(self, D):
        with pytest.raises(ViewsOutOfRange):
            validate_distribution([1.0], D)

    def test_mass_is_read_only(self):
        d = validate_distribution([0.5, 0.5], 1)
        with pytest.raises(ValueError):
            d.mass[0] = 1.0

    def test_not_renormalized(self):
        # within tolerance is accepted as given, never rescaled
        m = [0.5, 0.5 + 5e-13]
        assert validate_distribution(m, 1).mass[1] == m[1]


class TestParams:
    @pytest.mark.parametrize("n", [2, 5, 0])
    def test_bad_n(self, n):
        with pytest.raises(InvalidNodeCount):
            make_bernoulli_sbm(0.5, 0.5, n)

    def test_view_mismatch(self):
        a = validate_distribution([0.5, 0.5], 1)
        b = validate_distribution([0.25] * 4, 2)
        with pytest.raises(Exception):
            MvsbmParams(4, a, b)


class TestAssumptions:
    def test_hand_values(self):
        a = check_assumptions(make_bernoulli_sbm(0.8, 0.2, 20))
        assert a.rho == pytest.approx(4.0, rel=1e-12)
        assert a.p_bar == pytest.approx(0.8)
        assert a.separation == pytest.approx(0.5625, rel=1e-12)
        assert a.a1_holds and a.a2_value_positive

    @pytest.mark.parametrize("D", [1, 3])
    def test_equal_laws(self, D):
        a = check_assumptions(make_identical_views(0.3, 0.3, D, 10))
        assert a.rho == 1.0
        assert a.separation == 0.0
        assert not a.a2_value_positive

    def test_one_sided_zero(self):
        p = validate_distribution([0.5, 0.5], 1)
        q = validate_distribution([1.0, 0.0], 1)
        a = check_assumptions(MvsbmParams(10, p, q))
        assert a.rho == math.inf
        assert not a.a1_holds

    def test_all_empty(self):
        a = check_assumptions(make_identical_views(0.0, 0.0, 2, 10))
        assert a.p_bar == 0.0 and a.separation == 0.0


class TestConstructors:
    def test_bernoulli(self):
        m = make_bernoulli_sbm(0.8, 0.2, 20)
        assert m.num_views == 1
        np.testing.assert_allclose(m.within.mass, [0.2, 0.8])
        np.testing.assert_allclose(m.across.mass, [0.8, 0.2])

    def test_bernoulli_null(self):
        m = make_bernoulli_sbm(0.5, 0.5, 10)
        assert m.within == m.across

    def test_bernoulli_out_of_range(self):
        with pytest.raises(InvalidProbability):
            make_bernoulli_sbm(1.2, 0.2, 10)

    def test_identical_two_atoms(self):
        m = make_identical_views(0.8, 0.2, 3, 20)
        assert np.flatnonzero(m.within.support).tolist() == [0, 7]
        assert np.flatnonzero(m.across.support).tolist() == [0, 7]
        assert m.within.mass[7] == pytest.approx(0.8)

    def test_identical_empty(self):
        m = make_identical_views(0.0, 0.0, 2, 10)
        assert m.within.mass.tolist() == [1.0, 0.0, 0.0, 0.0]
        assert m.across == m.within

    @pytest.mark.parametrize("a,b", [(0.8, 0.2), (0.1, 0.6), (0.0, 1.0)])
    def test_identical_d1_is_bernoulli(self, a, b):
        assert make_identical_views(a, b, 1, 10) == make_bernoulli_sbm(a, b, 10)

    def test_independent_d1_is_bernoulli(self):
        assert make_independent_views([0.8], [0.2], 12) == make_bernoulli_sbm(0.8, 0.2, 12)

    def test_independent_fair_coins(self):
        m = make_independent_views([0.5, 0.5], [0.5, 0.5], 8)
        np.testing.assert_allclose(m.within.mass, 0.25, atol=0)

    def test_independent_bit_order(self):
        # bit 0 carries view 0: 0b01 = edge in view 0 only
        m = make_independent_views([0.8, 0.3], [0.2, 0.3], 8)
        assert m.within.mass[0b01] == pytest.approx(0.56, abs=1e-15)
        assert m.within.marginal(0) == pytest.approx(0.8)
        assert m.within.marginal(1) == pytest.approx(0.3)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=6))
    def test_product_marginals(self, probs):
        mass = product_mass(probs)
        assert math.fsum(mass) == pytest.approx(1.0, abs=1e-12)
        d = validate_distribution(mass, len(probs))
        for i, p in enumerate(probs):
            assert d.marginal(i) == pytest.approx(p, abs=1e-12)


class TestJson:
    @pytest.mark.parametrize(
        "spec",
        [
            {"kind": "bernoulli", "n": 10, "p1": 0.7, "q1": 0.1},
            {"kind": "identical", "n": 10, "D": 3, "alpha": 0.7, "beta": 0.1},
            {"kind": "independent", "n": 10, "p_list": [0.7, 0.4], "q_list": [0.1, 0.2]},
        ],
    )
    def test_round_trip(self, spec):
        m = params_from_json(spec)
        again = params_from_json(json.loads(json.dumps(m.to_json())))
        assert again == m

    def test_explicit(self):
        m = params_from_json({"kind": "explicit", "n": 6, "D": 1, "p_mass": [0.2, 0.8], "q_mass": [0.8, 0.2]})
        ref = make_bernoulli_sbm(0.8, 0.2, 6)
        np.testing.assert_allclose(m.within.mass, ref.within.mass, atol=1e-15)
        np.testing.assert_allclose(m.across.mass, ref.across.mass, atol=1e-15)

    @pytest.mark.parametrize(
        "spec",
        [
            {"kind": "nope", "n": 10},
            {"kind": "bernoulli", "n": 10},
            {"kind": "bernoulli", "n": 10, "D": 2, "p1": 0.5, "q1": 0.5},
            [1, 2],
        ],
    )
    def test_malformed(self, spec):
        with pytest.raises(BadModelSpec):
            params_from_json(spec)

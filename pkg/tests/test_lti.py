import math

import numpy as np
import pytest

from resetfreq.lti import (
    FrfRangeError,
    FrfTable,
    ImproperSystemError,
    LtiError,
    PoleOnAxisError,
    RationalTf,
    StateSpaceModel,
    UnsupportedVariantError,
    evaluate,
    gain,
    hurwitz_check,
    poles,
    series,
    to_state_space,
    unit,
)
from resetfreq.presets import make_shaping_filter, motion_stage_plant

PI = math.pi


class TestRationalTf:
    def test_plant_dc_value(self):
        # hand substitution s=0 into the stage model
        val = evaluate(motion_stage_plant(), 0.0)
        assert val == pytest.approx(6.615e5 / 5.837e5, rel=1e-12)
        assert val.imag == 0.0

    def test_integrator_at_one(self):
        assert evaluate(RationalTf([1], [1, 0]), 1.0) == pytest.approx(-1j)

    def test_shaping_filter_value(self):
        # hand evaluation of (jw/(660 pi)+1)/(jw/(237.6 pi)+1) at w = 660 pi
        w = 660 * PI
        expected = (1 + 1j) / (1 + 1j * 660.0 / 237.6)
        val = evaluate(make_shaping_filter(), w)
        assert val == pytest.approx(expected, rel=1e-12)
        # pole below zero makes this a lag: negative phase at the zero corner
        assert np.angle(val) < 0.0

    def test_leading_zero_coefficients_trimmed(self):
        tf = RationalTf([0.0, 2.0], [0.0, 1.0, 3.0])
        assert tf.num == (2.0,)
        assert tf.den == (1.0, 3.0)

    def test_improper_by_more_than_one_rejected(self):
        with pytest.raises(ImproperSystemError):
            RationalTf([1, 0, 0], [1])
        # a single lead s/w is allowed
        RationalTf([1 / (150 * PI), 0], [1])

    def test_zero_denominator_rejected(self):
        with pytest.raises(LtiError):
            RationalTf([1], [])

    def test_pole_on_axis(self):
        with pytest.raises(PoleOnAxisError):
            evaluate(RationalTf([1], [1, 0]), 0.0)

    def test_conjugate_symmetry(self, rng):
        # real coefficients: H(-jw) = conj(H(jw))
        for _ in range(20):
            num = rng.normal(size=3)
            den = np.concatenate([[1.0], rng.normal(size=3)])
            tf = RationalTf(num, den)
            for w in rng.uniform(0.1, 1e4, size=5):
                s_pos = np.polyval(tf.num, 1j * w) / np.polyval(tf.den, 1j * w)
                s_neg = np.polyval(tf.num, -1j * w) / np.polyval(tf.den, -1j * w)
                assert s_neg == pytest.approx(np.conj(s_pos), rel=1e-12)

    def test_vectorized_evaluation(self):
        tf = RationalTf([1], [1, 1])
        w = np.array([0.0, 1.0, 2.0])
        vals = evaluate(tf, w)
        assert vals.shape == (3,)
        assert vals[1] == pytest.approx(1 / (1 + 1j))


class TestToStateSpace:
    def test_integrator_canonical(self):
        ss = to_state_space(RationalTf([1], [1, 0]))
        np.testing.assert_allclose(ss.a, [[0.0]])
        np.testing.assert_allclose(ss.b, [1.0])
        np.testing.assert_allclose(ss.c, [1.0])
        assert ss.d == 0.0

    def test_first_order_lag_matches_evaluate(self):
        wr = 244.8 * PI
        tf = RationalTf([1], [1 / wr, 1])
        ss = to_state_space(tf)
        for w in np.geomspace(1e-2, 1e5, 50):
            assert evaluate(ss, w) == pytest.approx(evaluate(tf, w), rel=1e-9)

    def test_pure_gain_dummy_state(self):
        ss = to_state_space(gain(3.5))
        assert ss.order == 1
        assert ss.d == 3.5
        for w in (0.0, 1.0, 1e4):
            assert evaluate(ss, w) == pytest.approx(3.5)

    def test_improper_rejected(self):
        with pytest.raises(ImproperSystemError):
            to_state_space(RationalTf([1, 0], [1]))

    def test_random_biproper_grid_agreement(self, rng):
        # realization agrees with direct rational evaluation on a log grid
        for _ in range(10):
            den = np.concatenate([[1.0], rng.normal(size=4)])
            if not hurwitz_check(RationalTf([1], den)):
                den = np.polymul([1, 2, 2], [1, 3, 5])  # stable fallback
            num = rng.normal(size=len(den))
            tf = RationalTf(num, den)
            ss = to_state_space(tf)
            for w in np.geomspace(1e-2, 1e5, 50):
                ref = evaluate(tf, w)
                assert evaluate(ss, w) == pytest.approx(ref, rel=1e-9, abs=1e-12)


class TestSeriesAndPoles:
    def test_series_is_product_of_evaluations(self, rng):
        a = RationalTf([1, 2], [1, 3, 4])
        b = RationalTf([5], [1, 7])
        c = series(a, b)
        for w in rng.uniform(0.01, 1e3, size=12):
            prod = evaluate(a, w) * evaluate(b, w)
            assert evaluate(c, w) == pytest.approx(prod, rel=1e-12)

    def test_hurwitz_examples(self):
        assert hurwitz_check(RationalTf([1], [1, 1]))
        assert not hurwitz_check(RationalTf([1], [1, -1]))
        # pole at the origin is not strictly Hurwitz
        assert not hurwitz_check(RationalTf([1], [1, 0]))

    def test_hurwitz_tolerance(self):
        # a marginal pole at -1e-6 fails a tolerance of 1e-3
        tf = RationalTf([1], [1, 1e-6])
        assert hurwitz_check(tf)
        assert not hurwitz_check(tf, tol=1e-3)

    def test_hurwitz_state_space_and_frf(self):
        assert hurwitz_check(StateSpaceModel([[-2.0]], [1.0], [1.0], 0.0))
        table = FrfTable([1.0, 2.0], [1 + 0j, 2 + 0j])
        with pytest.raises(UnsupportedVariantError):
            hurwitz_check(table)

    def test_poles_of_gain(self):
        assert poles(gain(2.0)).size == 0


class TestFrfTable:
    def _table_from(self, block, n=400):
        w = np.geomspace(1.0, 1e5, n)
        return FrfTable(w, evaluate(block, w))

    def test_interpolation_matches_smooth_response(self):
        plant = motion_stage_plant()
        table = self._table_from(plant, n=1500)
        # the lightly damped resonance bounds the achievable accuracy
        for w in np.geomspace(2.0, 9e4, 37):
            ref = evaluate(plant, w)
            val = evaluate(table, w)
            assert abs(val - ref) / abs(ref) < 2e-2
        # away from the peak the Bode-domain interpolation is much tighter
        for w in np.geomspace(2e3, 9e4, 19):
            ref = evaluate(plant, w)
            val = evaluate(table, w)
            assert abs(val - ref) / abs(ref) < 1e-5

    def test_range_error(self):
        table = self._table_from(unit())
        with pytest.raises(FrfRangeError):
            evaluate(table, 0.5)
        with pytest.raises(FrfRangeError):
            evaluate(table, 2e5)

    def test_requires_increasing_positive_frequencies(self):
        with pytest.raises(LtiError):
            FrfTable([2.0, 1.0], [1 + 0j, 1 + 0j])
        with pytest.raises(LtiError):
            FrfTable([0.0, 1.0], [1 + 0j, 1 + 0j])
        with pytest.raises(LtiError):
            FrfTable([1.0], [1 + 0j])

    def test_csv_round_trip(self, tmp_path):
        plant = motion_stage_plant()
        w = np.geomspace(2 * PI, 2e4, 50)
        vals = evaluate(plant, w)
        path = tmp_path / "frf.csv"
        lines = ["freq_hz,re,im"]
        lines += [
            f"{wi / (2 * PI):.12g},{v.real:.12g},{v.imag:.12g}"
            for wi, v in zip(w, vals)
        ]
        path.write_text("\n".join(lines))
        table = FrfTable.from_csv(path)
        mid = math.sqrt(w[3] * w[4])
        assert abs(evaluate(table, mid) - evaluate(plant, mid)) / abs(
            evaluate(plant, mid)
        ) < 1e-3

    def test_csv_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("freq,mag\n1,2\n")
        with pytest.raises(LtiError):
            FrfTable.from_csv(path)

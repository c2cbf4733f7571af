import math

import numpy as np
import pytest

from resetfreq.lti import RationalTf, evaluate, gain, unit, zero
from resetfreq.open_loop import (
    OpenLoopConfig,
    cr_grid,
    cr_hosidf,
    ln_hosidf,
    odd_harmonics,
    open_loop_grid,
    reconstruct_open_loop_output,
)
from resetfreq.reset_controller import ResetController

PI = math.pi


def clegg_chain(gamma=0.0, cs=None):
    return OpenLoopConfig(
        c1=unit(), c2=zero(), c3=unit(),
        cs=cs if cs is not None else unit(),
        cr=ResetController.from_tf(RationalTf([1], [1, 0]), gamma),
        plant=gain(1.0),
    )


class TestCrHosidf:
    def test_clegg_fundamental(self):
        cfg = clegg_chain()
        for w in (0.5, 1.0, 4.0):
            assert cr_hosidf(cfg, 1, w) == pytest.approx((4 / PI - 1j) / w, rel=1e-12)

    def test_even_orders_vanish(self, demo_closed):
        cfg = demo_closed.open_loop()
        for n in (2, 4, 10):
            assert cr_hosidf(cfg, n, 10.0) == 0.0
            assert ln_hosidf(cfg, n, 10.0) == 0.0

    def test_unit_gamma_higher_orders_vanish(self):
        cfg = clegg_chain(gamma=1.0)
        assert cr_hosidf(cfg, 3, 2.0) == pytest.approx(0.0, abs=1e-14)

    def test_order_validation(self):
        with pytest.raises(ValueError):
            cr_hosidf(clegg_chain(), 0, 1.0)


class TestLnHosidf:
    def test_unit_gamma_is_pure_linear_loop(self, demo_closed):
        cfg = demo_closed.open_loop()
        linear = OpenLoopConfig(
            c1=cfg.c1, c2=cfg.c2, c3=cfg.c3, cs=cfg.cs,
            cr=ResetController(cfg.cr.base, 1.0), plant=cfg.plant,
        )
        for w in (3.0, 80.0, 900.0):
            expected = (
                evaluate(cfg.c1, w)
                * (evaluate(cfg.cr.base, w) + evaluate(cfg.c2, w))
                * evaluate(cfg.c3, w)
                * evaluate(cfg.plant, w)
            )
            assert ln_hosidf(linear, 1, w) == pytest.approx(expected, rel=1e-12)
            assert ln_hosidf(linear, 3, w) == pytest.approx(0.0, abs=1e-14)

    def test_downstream_blocks_evaluated_at_harmonic_frequency(self):
        # with a pure-delay-free chain the third-order response carries the
        # post filter and plant at three times the excitation frequency
        c3 = RationalTf([1.0], [1 / 30.0, 1.0])
        plant = RationalTf([2.0], [1 / 10.0, 1.0])
        cfg = OpenLoopConfig(
            c1=unit(), c2=zero(), c3=c3, cs=unit(),
            cr=ResetController.from_tf(RationalTf([1], [1, 0]), 0.0),
            plant=plant,
        )
        w = 5.0
        expected = (
            cr_hosidf(cfg, 3, w)
            * evaluate(c3, 3 * w)
            * evaluate(plant, 3 * w)
        )
        assert ln_hosidf(cfg, 3, w) == pytest.approx(expected, rel=1e-12)

    def test_front_phase_replication(self):
        # a front block with phase phi contributes e^{j n phi} in total
        phi = -0.7
        mag = 2.0
        # realize a pure phase at one frequency with an all-pass-like lead
        w = 10.0
        c1 = RationalTf([1.0, 5.0], [1 / 40.0, 1.0])
        cfg_front = OpenLoopConfig(
            c1=c1, c2=zero(), c3=unit(), cs=unit(),
            cr=ResetController.from_tf(RationalTf([1], [1, 0]), 0.0),
            plant=unit(),
        )
        cfg_plain = clegg_chain()
        c1_val = evaluate(c1, w)
        n = 3
        expected = (
            abs(c1_val)
            * np.exp(1j * n * np.angle(c1_val))
            * cr_hosidf(cfg_plain, n, w)
        )
        assert ln_hosidf(cfg_front, n, w) == pytest.approx(expected, rel=1e-12)
        del phi, mag


class TestGrids:
    def test_single_point_grid(self, demo_closed):
        cfg = demo_closed.open_loop()
        grid = open_loop_grid(cfg, [40.0], 1)
        assert grid.harmonics == (1,)
        assert grid.values[0, 0] == ln_hosidf(cfg, 1, 40.0)

    def test_grid_is_pure_function_of_frequencies(self, demo_closed):
        cfg = demo_closed.open_loop()
        freqs = np.array([10.0, 10.0, 25.0])
        grid = open_loop_grid(cfg, freqs, 5)
        np.testing.assert_array_equal(grid.values[0], grid.values[1])

    def test_cr_grid_matches_pointwise(self, demo_closed):
        cfg = demo_closed.open_loop()
        freqs = np.geomspace(2 * PI, 200 * PI, 7)
        grid = cr_grid(cfg, freqs, 5)
        for i, w in enumerate(freqs):
            for j, n in enumerate(grid.harmonics):
                assert grid.values[i, j] == pytest.approx(
                    cr_hosidf(cfg, n, w), rel=1e-12
                )

    def test_odd_harmonics_helper(self):
        assert odd_harmonics(1) == [1]
        assert odd_harmonics(2) == [1]
        assert odd_harmonics(7) == [1, 3, 5, 7]
        with pytest.raises(ValueError):
            odd_harmonics(0)

    def test_frf_range_failure_collected(self, demo_closed):
        from resetfreq.lti import FrfTable

        cfg = demo_closed.open_loop()
        w_tab = np.geomspace(1.0, 300.0, 40)
        frf_plant = FrfTable(w_tab, evaluate(demo_closed.plant, w_tab))
        cfg_frf = OpenLoopConfig(
            c1=cfg.c1, c2=cfg.c2, c3=cfg.c3, cs=cfg.cs, cr=cfg.cr,
            plant=frf_plant,
        )
        # third harmonic of 150 rad/s exceeds the table span
        grid = open_loop_grid(cfg_frf, [150.0], 3)
        assert np.isfinite(grid.values[0, 0])
        assert np.isnan(grid.values[0, 1].real)
        assert grid.failures and grid.failures[0][1] == 3


class TestReconstruction:
    def test_unit_gamma_reduces_to_linear_sinusoid(self, demo_closed):
        cfg = demo_closed.open_loop()
        linear = OpenLoopConfig(
            c1=cfg.c1, c2=cfg.c2, c3=cfg.c3, cs=cfg.cs,
            cr=ResetController(cfg.cr.base, 1.0), plant=cfg.plant,
        )
        w = 8 * PI
        amp, phase = 0.7, 0.4
        t = np.linspace(0.0, 2 * PI / w, 400)
        y = reconstruct_open_loop_output(linear, amp, phase, w, 99, t)
        l1 = ln_hosidf(linear, 1, w)
        ref = amp * abs(l1) * np.sin(w * t + phase + np.angle(l1))
        assert np.max(np.abs(y - ref)) < 1e-9 * amp

    def test_output_is_real_and_phase_replicates(self, demo_open):
        cfg = demo_open.open_loop()
        w = 8 * PI
        t = np.linspace(0.0, 0.5, 300)
        base = reconstruct_open_loop_output(cfg, 1.0, 0.0, w, 19, t)
        assert base.dtype.kind == "f"
        # excitation phase shift phi advances harmonic n by n*phi
        phi = 0.37
        shifted = reconstruct_open_loop_output(cfg, 1.0, phi, w, 19, t)
        manual = np.zeros_like(t)
        for n in odd_harmonics(19):
            ln = ln_hosidf(cfg, n, w)
            manual += abs(ln) * np.sin(n * w * t + n * phi + np.angle(ln))
        assert np.max(np.abs(shifted - manual)) < 1e-12 * max(1.0, np.max(np.abs(manual)))

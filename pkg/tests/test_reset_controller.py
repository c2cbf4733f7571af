import math

import numpy as np
import pytest

from resetfreq.lti import (
    RationalTf,
    StateSpaceModel,
    evaluate,
    gain,
    series,
    unit,
    zero,
)
from resetfreq.open_loop import OpenLoopConfig, cr_hosidf
from resetfreq.reset_controller import (
    ResetController,
    ResetSingularityError,
    base_linear_tf,
    c_rho_n,
    delta_terms,
    open_loop_stability_check,
    reset_matrix,
)
from resetfreq.simulation import SimConfig, resets_per_cycle, simulate, steady_state_window

PI = math.pi


def clegg(gamma=0.0):
    return ResetController.from_tf(RationalTf([1], [1, 0]), gamma)


def fore(omega_r, gamma):
    return ResetController.from_tf(RationalTf([1], [1 / omega_r, 1]), gamma)


class TestStructure:
    def test_reset_matrix_single_state(self):
        np.testing.assert_allclose(reset_matrix(clegg(0.0)), [[0.0]])

    def test_reset_matrix_two_states(self):
        rc = ResetController.from_tf(
            RationalTf([1], [1.0, 2.0, 1.0]), 0.4
        )
        np.testing.assert_allclose(reset_matrix(rc), np.diag([0.4, 1.0]))

    def test_reset_matrix_identity_for_unit_gamma(self):
        rc = ResetController.from_tf(RationalTf([1], [1.0, 2.0, 1.0]), 1.0)
        np.testing.assert_allclose(reset_matrix(rc), np.eye(2))

    def test_gamma_domain(self):
        with pytest.raises(ValueError):
            clegg(-1.0)
        with pytest.raises(ValueError):
            clegg(1.5)
        clegg(1.0)

    def test_base_linear_tf_examples(self):
        assert evaluate(base_linear_tf(clegg()), 1.0) == pytest.approx(-1j)
        wr = 10.0
        val = evaluate(base_linear_tf(fore(wr, 0.0)), wr)
        assert val == pytest.approx((1 - 1j) / 2)

    def test_base_linear_ignores_gamma(self):
        for w in (0.5, 3.0, 40.0):
            a = evaluate(base_linear_tf(fore(7.0, 0.0)), w)
            b = evaluate(base_linear_tf(fore(7.0, 0.9)), w)
            assert a == b


class TestStabilityCheck:
    def test_fore_passes_any_gamma(self):
        for g in (-0.9, 0.0, 0.5, 0.99):
            scan = open_loop_stability_check(fore(100.0, g))
            assert scan.passed and not scan.marginal

    def test_clegg_spectral_radius_zero(self):
        scan = open_loop_stability_check(clegg(0.0))
        assert scan.passed
        assert scan.worst_radius == pytest.approx(0.0, abs=1e-15)

    def test_integrator_with_unit_gamma_is_marginal(self):
        scan = open_loop_stability_check(clegg(1.0))
        assert not scan.passed
        assert scan.marginal
        assert scan.worst_radius == pytest.approx(1.0)

    def test_gamma_monotone_for_fore(self):
        # scalar case: passing at |gamma| = g implies passing for smaller |g|
        radii = [
            open_loop_stability_check(fore(5.0, g)).worst_radius
            for g in (0.9, 0.6, 0.3, 0.0)
        ]
        assert all(r1 >= r2 for r1, r2 in zip(radii, radii[1:]))

    def test_unstable_flow_reported_not_raised(self):
        rc = ResetController(
            StateSpaceModel([[5.0]], [1.0], [1.0], 0.0), 0.5
        )
        scan = open_loop_stability_check(rc)
        assert not scan.passed
        assert scan.worst_radius > 1.0 or scan.failure is not None

    def test_delta_grid_validation(self):
        with pytest.raises(ValueError):
            open_loop_stability_check(clegg(), deltas=np.array([]))
        with pytest.raises(ValueError):
            open_loop_stability_check(clegg(), deltas=np.array([-1.0]))


class TestDeltaTerms:
    def test_clegg_hand_values(self):
        # unshaped trigger: delta_l = 1/(jw), delta_c = -1/w, delta_q = 2/w
        for w in (0.7, 1.0, 12.0):
            terms = delta_terms(clegg(), w, 1, 0.0)
            assert terms.delta_l[0] == pytest.approx(1 / (1j * w))
            assert terms.delta_c[0] == pytest.approx(-1 / w)
            assert terms.delta_q[0] == pytest.approx(2 / w)
            assert terms.delta_x[0] == pytest.approx(1.0)

    def test_delta_x_higher_order(self):
        w = 3.0
        terms = delta_terms(clegg(), w, 5, 0.0)
        assert terms.delta_x[0] == pytest.approx(1.0)  # (1/(j5w)) * j5w

    def test_unit_gamma_kills_delta_q(self):
        terms = delta_terms(fore(8.0, 1.0), 2.0, 1, 0.3)
        assert terms.delta_q == pytest.approx(np.zeros(1), abs=1e-15)

    def test_trigger_phase_shift_flips_delta_c(self):
        w = 4.0
        a = delta_terms(fore(8.0, 0.2), w, 1, 0.4).delta_c
        b = delta_terms(fore(8.0, 0.2), w, 1, 0.4 + PI).delta_c
        assert b == pytest.approx(-a, rel=1e-12)

    def test_odd_order_required(self):
        with pytest.raises(ValueError):
            delta_terms(clegg(), 1.0, 2, 0.0)
        with pytest.raises(ValueError):
            delta_terms(clegg(), -1.0, 1, 0.0)

    def test_singular_jump_flow_combination(self):
        # unstable flow with e^{A pi/w} = 2 and gamma = -0.5 makes the
        # half-period map singular
        w = 2.0
        a = math.log(2.0) * w / PI
        rc = ResetController(StateSpaceModel([[a]], [1.0], [1.0], 0.0), -0.5)
        with pytest.raises(ResetSingularityError):
            delta_terms(rc, w, 1, 0.0)


class TestCrhoN:
    def test_clegg_fundamental(self):
        for w in (0.5, 1.0, 9.0):
            assert c_rho_n(clegg(), w, 1, 1.0 + 0j) == pytest.approx(4 / (PI * w))

    def test_clegg_describing_function_lead(self):
        w = 1.0
        df = evaluate(base_linear_tf(clegg()), w) + c_rho_n(clegg(), w, 1, 1.0 + 0j)
        assert df == pytest.approx((4 / PI - 1j) / w, rel=1e-12)
        phase = math.degrees(np.angle(df))
        assert phase == pytest.approx(-38.15, abs=0.01)
        assert abs(df) == pytest.approx(math.hypot(4 / PI, 1.0) / w, rel=1e-12)

    def test_unit_gamma_vanishes(self):
        for n in (1, 3, 7):
            assert c_rho_n(fore(5.0, 1.0), 2.0, n, 1.0 + 0j) == pytest.approx(0.0, abs=1e-14)

    def test_pure_phase_scaling_law(self):
        # multiplying the trigger filter by e^{j phi} rotates the n-th
        # component by e^{j n phi} and changes delta_c by the sine law
        rc = fore(6.0, 0.25)
        w = 2.5
        for n in (1, 3, 5):
            for phi in (0.3, -1.1):
                base_val = c_rho_n(rc, w, n, 1.0 + 0j)
                shifted = c_rho_n(rc, w, n, np.exp(1j * phi))
                t0 = delta_terms(rc, w, n, 0.0)
                t1 = delta_terms(rc, w, n, phi)
                ratio = t1.delta_c[0] / t0.delta_c[0]
                assert shifted == pytest.approx(
                    base_val * np.exp(1j * n * phi) * ratio, rel=1e-12
                )
                # and the sine law itself
                dl = t0.delta_l[0]
                assert t1.delta_c[0] == pytest.approx(
                    abs(dl) * math.sin(np.angle(dl) - phi), rel=1e-12
                )


class TestMultiStateOracle:
    def test_two_state_harmonics_match_simulation(self):
        # single resetting state inside a two-state controller: the
        # element-wise magnitude/angle treatment must reproduce simulated
        # harmonic coefficients
        base = series(
            RationalTf([1.0], [1 / 50.0, 1.0]),
            RationalTf([1.0, 20.0], [1 / 300.0, 1.0]),
        )
        w = 40.0
        for gamma in (0.0, 0.3, -0.4):
            cr = ResetController.from_tf(base, gamma)
            cfg = OpenLoopConfig(
                c1=unit(), c2=zero(), c3=unit(),
                cs=RationalTf([1.0], [1 / 80.0, 1.0]),
                cr=cr, plant=gain(1.0),
            )
            sim = simulate(SimConfig(
                system=cfg, kind="eo", amplitude=1.0, omega=w,
                steps_per_cycle=8192, settle_cycles=30,
            ))
            assert resets_per_cycle(sim) == 2.0
            win = steady_state_window(sim)
            tw = sim.t[win.slice]
            seg = sim.y[win.slice]
            for n in (1, 3, 5):
                coeff = 2 / len(seg) * np.sum(seg * np.exp(-1j * n * w * tw)) / (-1j)
                pred = cr_hosidf(cfg, n, w)
                assert pred == pytest.approx(coeff, rel=2e-3, abs=1e-9)

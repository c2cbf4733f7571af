"""Factories for the bundled case-study controllers (PID, CgLp variants, the
trigger-shaping filter), the precision-stage plant model, demo systems for
validating the analysis against simulation, and open-loop margin metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_loop import ClosedLoopConfig
from .lti import RationalTf, gain, series, unit, zero
from .open_loop import HosidfGrid, ln_hosidf
from .reset_controller import ResetController

__all__ = [
    "PidParams",
    "CgLpParams",
    "Margins",
    "MarginError",
    "LoopFragment",
    "make_pid",
    "make_cglp",
    "make_shaping_filter",
    "make_fore",
    "motion_stage_plant",
    "margins",
    "pid_case_study",
    "cglp_pid_case_study",
    "shaped_cglp_pid_case_study",
    "open_loop_demo",
    "closed_loop_demo",
    "PRESETS",
]

_PI = math.pi

# design crossover shared by the case-study loops (rad/s); the reset-element
# branch gain is normalized so the fundamental loop response crosses 0 dB here
CASE_STUDY_CROSSOVER = 240.0 * _PI


@dataclass(frozen=True)
class PidParams:
    """Gains/corners of the series PID: proportional gain, integrator corner,
    tamed-derivative interval [omega_d, omega_t], output low-pass corner."""

    kp: float
    omega_i: float
    omega_d: float
    omega_t: float
    omega_f: float

    def __post_init__(self):
        if min(self.omega_i, self.omega_d, self.omega_t, self.omega_f) <= 0.0:
            raise ValueError("PID corner frequencies must be positive")
        if self.omega_d >= self.omega_t:
            raise ValueError("derivative interval needs omega_d < omega_t")


@dataclass(frozen=True)
class CgLpParams:
    """First-order reset element corner, lead-zero corner, reset value, and
    the series PID that completes the loop controller."""

    omega_r: float
    omega_rc: float
    gamma: float
    pid: PidParams

    def __post_init__(self):
        if self.omega_r <= 0.0 or self.omega_rc <= 0.0:
            raise ValueError("corner frequencies must be positive")
        if not (-1.0 < self.gamma <= 1.0):
            raise ValueError("gamma must lie in (-1, 1]")


def make_pid(p: PidParams) -> RationalTf:
    """kp (1 + w_i/s) ((s/w_d + 1)/(s/w_t + 1)) (1/(s/w_f + 1))."""
    return series(
        gain(p.kp),
        RationalTf([1.0, p.omega_i], [1.0, 0.0]),
        RationalTf([1.0 / p.omega_d, 1.0], [1.0 / p.omega_t, 1.0]),
        RationalTf([1.0], [1.0 / p.omega_f, 1.0]),
    )


def make_fore(omega_r: float, gamma: float) -> ResetController:
    """First-order reset element: resetting low-pass 1/(s/w_r + 1)."""
    return ResetController.from_tf(RationalTf([1.0], [1.0 / omega_r, 1.0]), gamma)


def make_shaping_filter() -> RationalTf:
    """Trigger-shaping lag (s/(660 pi) + 1)/(s/(237.6 pi) + 1): unity at DC,
    phase lag between the corners that retimes the reset instants."""
    return RationalTf([1.0 / (660.0 * _PI), 1.0], [1.0 / (237.6 * _PI), 1.0])


def motion_stage_plant() -> RationalTf:
    """Identified collocated mass-spring-damper model of the precision stage
    (one lightly damped resonance near 13 Hz)."""
    return RationalTf([6.615e5], [83.57, 279.4, 5.837e5])


@dataclass(frozen=True)
class LoopFragment:
    """Controller-side blocks of the generalized loop with the adopted block
    placement recorded; attach a plant to obtain a full configuration."""

    c1: RationalTf
    c2: RationalTf
    c3: RationalTf
    cs: RationalTf
    cr: ResetController
    mapping: str

    def with_plant(self, plant, c4=None) -> ClosedLoopConfig:
        return ClosedLoopConfig(
            c1=self.c1, c2=self.c2, c3=self.c3,
            c4=unit() if c4 is None else c4,
            cs=self.cs, cr=self.cr, plant=plant,
        )


def make_cglp(p: CgLpParams, shaping: RationalTf | None = None) -> LoopFragment:
    """Reset element plus lead plus PID arranged in series.

    Placement: the resetting first-order element sits first and is triggered
    by its own (optionally shaped) input; the lead (s/w_rc + 1)/(s/w_f + 1)
    and the PID follow it, so harmonics generated by the resets pass through
    them at the harmonic frequency.  There is no parallel path.
    """
    lead = RationalTf([1.0 / p.omega_rc, 1.0], [1.0 / p.pid.omega_f, 1.0])
    return LoopFragment(
        c1=unit(),
        c2=zero(),
        c3=series(lead, make_pid(p.pid)),
        cs=unit() if shaping is None else shaping,
        cr=make_fore(p.omega_r, p.gamma),
        mapping=(
            "series: [reset FORE (trigger on shaped input)] -> "
            "[lead (s/w_rc+1)/(s/w_f+1)] -> [PID]; no parallel path; "
            "unity feedback"
        ),
    )


@dataclass(frozen=True)
class Margins:
    bandwidth_hz: float
    phase_margin_deg: float


class MarginError(ValueError):
    """The fundamental response has no unique 0 dB crossing in the grid."""


def margins(grid: HosidfGrid) -> Margins:
    """Crossover frequency and phase margin of the fundamental open-loop
    response.

    The crossover is located by log-linear interpolation between the two
    grid points bracketing 0 dB; the margin is 180 degrees plus the
    (interpolated, wrapped) phase there.  Zero or multiple crossings raise
    ``MarginError`` listing what was found.
    """
    l1 = grid.column(1)
    if np.any(~np.isfinite(l1)):
        raise MarginError("fundamental response contains failed grid points")
    logmag = np.log10(np.abs(l1))
    sign_change = np.nonzero(np.sign(logmag[:-1]) != np.sign(logmag[1:]))[0]
    exact = np.nonzero(logmag == 0.0)[0]
    crossings = sorted(set(sign_change) | set(exact))
    if len(crossings) != 1:
        freqs_hz = [float(grid.freqs[i]) / (2 * _PI) for i in crossings]
        raise MarginError(
            f"need exactly one 0 dB crossing, found {len(crossings)} "
            f"near {freqs_hz} Hz"
        )
    i = crossings[0]
    logf = np.log10(grid.freqs)
    frac = -logmag[i] / (logmag[i + 1] - logmag[i])
    logf_c = logf[i] + frac * (logf[i + 1] - logf[i])
    phase = np.unwrap(np.angle(l1))
    ph_c = phase[i] + frac * (phase[i + 1] - phase[i])
    pm = 180.0 + math.degrees(math.atan2(math.sin(ph_c), math.cos(ph_c)))
    return Margins(bandwidth_hz=float(10.0 ** logf_c / (2 * _PI)),
                   phase_margin_deg=float(pm))


# --- case-study systems ---------------------------------------------------


def _case_pid_params() -> PidParams:
    return PidParams(
        kp=35.7,
        omega_i=24.0 * _PI,
        omega_d=120.0 * _PI,
        omega_t=480.0 * _PI,
        omega_f=2400.0 * _PI,
    )


def pid_case_study() -> ClosedLoopConfig:
    """Linear PID loop on the precision-stage plant (120 Hz design
    crossover)."""
    return ClosedLoopConfig(
        c1=unit(), c2=zero(), c3=make_pid(_case_pid_params()), c4=unit(),
        cs=unit(), cr=ResetController.from_tf(unit(), gamma=1.0),
        plant=motion_stage_plant(),
    )


def _cglp_loop_gain_norm() -> float:
    """Gain that places the fundamental 0 dB crossing of the reset loop at
    the shared design crossover.

    The raw element parameters leave the fundamental describing-function
    gain slightly above unity at the crossover; the case-study designs share
    one loop gain calibrated on the unshaped reset loop so all three systems
    meet the same bandwidth target.
    """
    frag = make_cglp(CgLpParams(
        omega_r=244.8 * _PI, omega_rc=216.0 * _PI, gamma=0.0,
        pid=_case_pid_params(),
    ))
    cfg = frag.with_plant(motion_stage_plant())
    l1 = ln_hosidf(cfg.open_loop(), 1, CASE_STUDY_CROSSOVER)
    return 1.0 / abs(l1)


def _scaled(frag: LoopFragment, k: float) -> LoopFragment:
    return LoopFragment(
        c1=frag.c1, c2=frag.c2, c3=series(gain(k), frag.c3),
        cs=frag.cs, cr=frag.cr, mapping=frag.mapping + f"; loop gain x {k:.6f}",
    )


def cglp_pid_case_study() -> ClosedLoopConfig:
    """Reset (CgLp) loop: FORE at 244.8 pi rad/s with full reset (gamma 0),
    lead zero at 216 pi rad/s, series PID, unshaped trigger."""
    frag = make_cglp(CgLpParams(
        omega_r=244.8 * _PI, omega_rc=216.0 * _PI, gamma=0.0,
        pid=_case_pid_params(),
    ))
    return _scaled(frag, _cglp_loop_gain_norm()).with_plant(motion_stage_plant())


def shaped_cglp_pid_case_study() -> ClosedLoopConfig:
    """Shaped variant: FORE retuned to 466.8 pi rad/s with partial reset
    (gamma 0.4) and the trigger-shaping lag, same lead/PID and the same loop
    gain as the unshaped reset loop."""
    frag = make_cglp(
        CgLpParams(
            omega_r=466.8 * _PI, omega_rc=216.0 * _PI, gamma=0.4,
            pid=_case_pid_params(),
        ),
        shaping=make_shaping_filter(),
    )
    return _scaled(frag, _cglp_loop_gain_norm()).with_plant(motion_stage_plant())


# --- bundled validation systems -------------------------------------------


def open_loop_demo() -> ClosedLoopConfig:
    """Open-chain validation system: reset integrator (full reset) with a
    differentiating pre-filter, slow trigger lag, low-pass post-filter and
    the stage plant.  Used to cross-check reconstruction against simulation."""
    return ClosedLoopConfig(
        c1=RationalTf([1.0 / (150.0 * _PI), 0.0], [1.0 / (3000.0 * _PI), 1.0]),
        c2=unit(),
        c3=RationalTf([1.0], [1.0 / (150.0 * _PI), 1.0]),
        c4=unit(),
        cs=RationalTf([1.0], [0.2, 1.0]),
        cr=ResetController.from_tf(RationalTf([30.0 * _PI], [1.0, 0.0]), 0.0),
        plant=motion_stage_plant(),
    )


def closed_loop_demo() -> ClosedLoopConfig:
    """Closed-loop validation system: resetting first-order element (full
    reset) with a lag trigger filter and a PI + lead + low-pass series
    compensator on the stage plant; behaves as a two-reset loop across
    [1, 1000] Hz."""
    c3 = series(
        gain(45.0),
        RationalTf([1.0 / (300.0 * _PI), 1.0], [1.0 / (30000.0 * _PI), 1.0]),
        RationalTf([1.0, 30.0 * _PI], [1.0, 0.0]),
        RationalTf([1.0 / (130.0 * _PI), 1.0], [1.0 / (699.0 * _PI), 1.0]),
        RationalTf([1.0], [1.0 / (3000.0 * _PI), 1.0]),
    )
    return ClosedLoopConfig(
        c1=RationalTf([1.0 / (150.0 * _PI), 1.0], [1.0 / (3000.0 * _PI), 1.0]),
        c2=unit(),
        c3=c3,
        c4=unit(),
        cs=RationalTf([1.0], [1.0 / 100.0, 1.0]),
        cr=ResetController.from_tf(
            RationalTf([1.0], [1.0 / (300.0 * _PI), 1.0]), 0.0
        ),
        plant=motion_stage_plant(),
    )


def multiple_reset_demo() -> ClosedLoopConfig:
    """Deliberately over-nonlinear loop (strong negative reset value and a
    wide-band lead trigger filter) that resets four times per cycle across
    the band; regression fixture for the multiple-reset scan."""
    base = closed_loop_demo()
    return ClosedLoopConfig(
        c1=base.c1, c2=base.c2, c3=base.c3, c4=base.c4,
        cs=RationalTf([1.0 / 50.0, 1.0], [1.0 / 5000.0, 1.0]),
        cr=ResetController(base.cr.base, -0.9),
        plant=base.plant,
    )


PRESETS = {
    "pid_case_study": pid_case_study,
    "cglp_pid_case_study": cglp_pid_case_study,
    "shaped_cglp_pid_case_study": shaped_cglp_pid_case_study,
    "open_loop_demo": open_loop_demo,
    "closed_loop_demo": closed_loop_demo,
    "multiple_reset_demo": multiple_reset_demo,
}

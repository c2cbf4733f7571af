"""Ground-truth hybrid simulator for the reset control loop.

Between resets the interconnection is linear and time-invariant, so the
whole loop (all block states plus a harmonic-oscillator realization of the
sinusoidal input) is advanced with a constant one-step propagator on a
uniform grid.  Zero crossings of the trigger signal are localized inside a
step by interval bisection with exact sub-propagators, the resetting state
is scaled by gamma, and the march resumes on the same grid.

The default propagator is the matrix exponential of the step (exact for the
linear flow).  A classic fixed-step RK4 stepper is available as an option;
it is realized as the degree-4 Taylor polynomial of the step matrix, which
is arithmetically identical to RK4 on an autonomous linear system, with
automatic substepping to keep fast controller poles inside the RK4
stability region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, matrix_balance

from .closed_loop import ClosedLoopConfig
from .lti import StateSpaceModel, to_state_space
from .open_loop import OpenLoopConfig

__all__ = [
    "SimulationError",
    "RealizationError",
    "DivergenceError",
    "NotSettledError",
    "SimConfig",
    "SimTrace",
    "SteadyStateWindow",
    "ScanReport",
    "simulate",
    "steady_state_window",
    "resets_per_cycle",
    "prediction_error",
    "multiple_reset_scan",
]

_SIGNAL_NAMES = ("e", "z", "zs", "v", "u", "y")
# bisection depth: localizes crossings to step / 2**10 < 1e-3 * step
_BISECT_LEVELS = 10


class SimulationError(RuntimeError):
    pass


class RealizationError(SimulationError):
    """The configuration contains blocks that cannot be simulated."""


class DivergenceError(SimulationError):
    """State norm exceeded the overflow bound; the loop is likely unstable."""


class NotSettledError(SimulationError):
    """The trace did not reach a periodic steady state."""


@dataclass(frozen=True)
class SimConfig:
    """Simulation request.

    ``kind`` selects the excitation entry point: ``"r"`` (reference) and
    ``"d"`` (plant-input disturbance) for closed loops, ``"eo"`` (direct
    chain excitation) for open loops.  The step is one ``steps_per_cycle``-th
    of the input period; the refractory window after a reset defaults to
    1e-3 of the period and exists to guard against chatter when the trigger
    grazes zero.
    """

    system: OpenLoopConfig | ClosedLoopConfig
    kind: str
    amplitude: float
    omega: float
    steps_per_cycle: int = 4096
    settle_cycles: int = 50
    analysis_cycles: int = 4
    refractory: float | None = None
    stepper: str = "propagator"
    store_states: bool = False
    block_size: int = 1024
    divergence_factor: float = 1e12

    def __post_init__(self):
        closed = isinstance(self.system, ClosedLoopConfig)
        if self.kind not in ("r", "d", "eo"):
            raise ValueError("input kind must be 'r', 'd' or 'eo'")
        if self.kind == "eo" and closed:
            raise ValueError("direct chain excitation needs an open-loop system")
        if self.kind in ("r", "d") and not closed:
            raise ValueError("reference/disturbance inputs need a closed-loop system")
        if self.omega <= 0.0 or self.amplitude <= 0.0:
            raise ValueError("omega and amplitude must be positive")
        if self.steps_per_cycle < 16:
            raise ValueError("steps_per_cycle must be at least 16")
        if self.settle_cycles < 1 or self.analysis_cycles < 1:
            raise ValueError("settle and analysis cycles must be at least 1")
        if self.refractory is not None and self.refractory < 0.0:
            raise ValueError("refractory must be nonnegative")
        if self.stepper not in ("propagator", "rk4"):
            raise ValueError("stepper must be 'propagator' or 'rk4'")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def step(self) -> float:
        return self.period / self.steps_per_cycle

    @property
    def total_cycles(self) -> int:
        return self.settle_cycles + self.analysis_cycles

    @property
    def refractory_time(self) -> float:
        return 1e-3 * self.period if self.refractory is None else self.refractory


@dataclass(frozen=True)
class SimTrace:
    """Uniform-grid record of one simulation run."""

    step: float
    omega: float
    amplitude: float
    kind: str
    steps_per_cycle: int
    settle_cycles: int
    analysis_cycles: int
    e: np.ndarray
    z: np.ndarray
    zs: np.ndarray
    v: np.ndarray
    u: np.ndarray
    y: np.ndarray
    reset_times: np.ndarray
    effective_resets: bool
    notes: tuple[str, ...] = ()
    states: np.ndarray | None = None
    state_offsets: dict[str, int] | None = None
    reset_state_index: int | None = None

    @property
    def n_samples(self) -> int:
        return self.y.size

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.step

    def signal(self, name: str) -> np.ndarray:
        if name not in _SIGNAL_NAMES:
            raise KeyError(f"unknown signal {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class SteadyStateWindow:
    """Index window spanning the last whole analysis periods plus the
    period-to-period convergence metric that qualified it."""

    start: int
    stop: int
    periods: int
    metric: float

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)


# --- interconnection assembly -------------------------------------------

_E, _Z, _A, _M, _ZS, _V, _U, _Y, _YF = range(9)


def _realize(block, name: str) -> StateSpaceModel:
    try:
        return to_state_space(block)
    except Exception as exc:
        raise RealizationError(f"block {name} is not simulatable: {exc}") from exc


class _LoopRealization:
    """State-space assembly of the full interconnection.

    Solves the static signal equations once, yielding constant matrices for
    the state derivative and for the observed signals; the only nonlinearity
    left is the state jump at trigger crossings.
    """

    def __init__(self, system: OpenLoopConfig | ClosedLoopConfig):
        closed = isinstance(system, ClosedLoopConfig)
        names = ["c1", "c2", "cs", "cr_base", "c3"] + (["c4"] if closed else []) + ["plant"]
        blocks = {
            "c1": _realize(system.c1, "c1"),
            "c2": _realize(system.c2, "c2"),
            "cs": _realize(system.cs, "cs"),
            "cr_base": system.cr.base,
            "c3": _realize(system.c3, "c3"),
            "plant": _realize(system.plant, "plant"),
        }
        if closed:
            blocks["c4"] = _realize(system.c4, "c4")

        offsets: dict[str, int] = {}
        nx = 0
        for nm in names:
            offsets[nm] = nx
            nx += blocks[nm].order

        # signal equations s = M s + N x + L w,  w = (excitation, disturbance)
        m = np.zeros((9, 9))
        n_mat = np.zeros((9, nx))
        l_mat = np.zeros((9, 2))

        def put(row, blk_name, src_row):
            blk = blocks[blk_name]
            off = offsets[blk_name]
            m[row, src_row] = blk.d
            n_mat[row, off:off + blk.order] = blk.c

        if closed:
            m[_E, _YF] = -1.0
            l_mat[_E, 0] = 1.0
        else:
            l_mat[_E, 0] = 1.0
        put(_Z, "c1", _E)
        put(_A, "c2", _Z)
        put(_M, "cr_base", _Z)
        put(_ZS, "cs", _Z)
        m[_V, _A] = 1.0
        m[_V, _M] = 1.0
        put(_U, "c3", _V)
        blk_p = blocks["plant"]
        off_p = offsets["plant"]
        m[_Y, _U] = blk_p.d
        n_mat[_Y, off_p:off_p + blk_p.order] = blk_p.c
        if closed:
            l_mat[_Y, 1] = blk_p.d
            put(_YF, "c4", _Y)

        try:
            t_solve = np.linalg.inv(np.eye(9) - m)
        except np.linalg.LinAlgError as exc:
            raise RealizationError(
                "algebraic loop: the feedthrough path around the loop is unity"
            ) from exc
        s_x = t_solve @ n_mat
        s_w = t_solve @ l_mat

        # state derivatives: per-block flow plus the solved input signal
        a_cl = np.zeros((nx, nx))
        g = np.zeros((nx, 9))
        inputs = {"c1": _E, "c2": _Z, "cs": _Z, "cr_base": _Z, "c3": _V, "plant": _U}
        if closed:
            inputs["c4"] = _Y
        for nm in names:
            blk = blocks[nm]
            off = offsets[nm]
            a_cl[off:off + blk.order, off:off + blk.order] = blk.a
            g[off:off + blk.order, inputs[nm]] = blk.b
        a_cl += g @ s_x
        b_cl = g @ s_w
        if closed:
            b_cl[off_p:off_p + blk_p.order, 1] += blk_p.b

        self.closed = closed
        self.nx = nx
        self.offsets = offsets
        self.a_cl = a_cl
        self.b_cl = b_cl
        self.s_x = s_x
        self.s_w = s_w
        self.reset_index = offsets["cr_base"]


def _taylor4(m: np.ndarray) -> np.ndarray:
    eye = np.eye(m.shape[0])
    m2 = m @ m
    m3 = m2 @ m
    return eye + m + m2 / 2.0 + m3 / 6.0 + (m3 @ m) / 24.0


def _propagator(a_aug: np.ndarray, h: float, stepper: str) -> np.ndarray:
    if stepper == "propagator":
        return expm(a_aug * h)
    # RK4 on an autonomous linear system is the degree-4 Taylor step;
    # substep so the fastest eigenvalue stays in the stability region.
    lam = float(np.max(np.abs(np.linalg.eigvals(a_aug))))
    n_sub = max(1, int(math.ceil(lam * h / 1.0)))
    step = _taylor4(a_aug * (h / n_sub))
    return np.linalg.matrix_power(step, n_sub)


def simulate(cfg: SimConfig) -> SimTrace:
    """Integrate the loop and return the sampled trace.

    Crossing detection compares signs of the trigger signal at consecutive
    samples (a zero sample attaches to the following sign); each detected
    crossing is localized to 2**-10 of a step, the resetting state is scaled
    by gamma, and crossings inside the refractory window are ignored.
    """
    loop = _LoopRealization(cfg.system)
    gamma = cfg.system.cr.gamma
    h = cfg.step
    omega = cfg.omega
    nx = loop.nx
    naug = nx + 2

    a_aug = np.zeros((naug, naug))
    a_aug[:nx, :nx] = loop.a_cl
    a_aug[:nx, nx] = loop.b_cl[:, 0] if cfg.kind in ("r", "eo") else loop.b_cl[:, 1]
    a_aug[nx, nx + 1] = omega
    a_aug[nx + 1, nx] = -omega

    # canonical realizations of wide-band compensators produce badly scaled
    # state matrices; a diagonal similarity keeps the matrix exponential
    # accurate and, being diagonal, commutes with the single-state jump
    a_bal, t_diag = matrix_balance(a_aug, permute=False, separate=True)
    t_diag = t_diag[0] if isinstance(t_diag, tuple) else t_diag

    phi = _propagator(a_bal, h, cfg.stepper)
    dyadic = [_propagator(a_bal, h / 2 ** j, cfg.stepper) for j in range(1, _BISECT_LEVELS + 1)]

    w_col = 0 if cfg.kind in ("r", "eo") else 1
    sig_rows = [_E, _Z, _ZS, _V, _U, _Y]
    c_sig = np.zeros((6, naug))
    c_sig[:, :nx] = loop.s_x[sig_rows, :]
    c_sig[:, nx] = loop.s_w[sig_rows, w_col]
    c_sig = c_sig * t_diag  # observe balanced coordinates
    zs_row = c_sig[2]

    n_total = cfg.total_cycles * cfg.steps_per_cycle
    block = max(16, min(cfg.block_size, n_total))
    pows = np.empty((block, naug, naug))
    pows[0] = phi
    with np.errstate(over="ignore", invalid="ignore"):
        # powers of an unstable propagator may overflow; the divergence
        # bound below turns that into a diagnostic instead of a warning
        for j in range(1, block):
            pows[j] = pows[j - 1] @ phi

    bound = cfg.divergence_factor * max(cfg.amplitude, 1e-12)
    refractory = cfg.refractory_time

    x = np.zeros(naug)
    x[nx + 1] = cfg.amplitude / t_diag[nx + 1]
    signals = np.empty((n_total, 6))
    signals[0] = c_sig @ x
    states = np.empty((n_total, naug)) if cfg.store_states else None
    if states is not None:
        states[0] = x * t_diag

    reset_times: list[float] = []
    t_last_reset = -math.inf
    sub = h / 2 ** _BISECT_LEVELS

    def zs_of(state):
        return float(zs_row @ state)

    cur = 0
    while cur < n_total - 1:
        m_steps = min(block, n_total - 1 - cur)
        with np.errstate(over="ignore", invalid="ignore"):
            traj = pows[:m_steps] @ x
        if (not np.all(np.isfinite(traj))
                or np.max(np.abs(traj[:, :nx] * t_diag[:nx])) > bound):
            raise DivergenceError(
                f"state norm exceeded {bound:g} near t={cur * h:g} s; "
                "the loop appears unstable"
            )
        zs_all = np.empty(m_steps + 1)
        zs_all[0] = zs_of(x)
        zs_all[1:] = traj @ zs_row
        signs = np.sign(zs_all)
        if np.any(signs == 0.0):
            for i in range(signs.size - 2, -1, -1):
                if signs[i] == 0.0:
                    signs[i] = signs[i + 1]
        crossings = np.nonzero(signs[:-1] != signs[1:])[0]

        handled = m_steps
        for p in crossings:
            t_base = (cur + p) * h
            if t_base + h - t_last_reset < refractory:
                continue
            base = x if p == 0 else traj[p - 1]
            # interval bisection with exact sub-propagators
            xc = base.copy()
            s_ref = signs[p]
            offset = 0
            for prop in dyadic:
                x_try = prop @ xc
                s_try = math.copysign(1.0, zs_of(x_try)) if zs_of(x_try) != 0.0 else -s_ref
                if s_try == s_ref:
                    xc = x_try
                    offset += 1
                offset <<= 1
            # offset counts elapsed sub-intervals of width h/2**levels
            m_count = offset >> 1
            xc = dyadic[-1] @ xc
            m_count += 1
            t_c = t_base + m_count * sub
            if t_c - t_last_reset < refractory:
                continue
            xc[loop.reset_index] *= gamma
            reset_times.append(t_c)
            t_last_reset = t_c
            # advance the remainder of the step by its binary decomposition
            rem = (1 << _BISECT_LEVELS) - m_count
            for j, prop in enumerate(dyadic):
                if rem & (1 << (_BISECT_LEVELS - 1 - j)):
                    xc = prop @ xc
            traj[p] = xc
            handled = p + 1
            break

        commit = handled
        signals[cur + 1:cur + 1 + commit] = traj[:commit] @ c_sig.T
        if states is not None:
            states[cur + 1:cur + 1 + commit] = traj[:commit] * t_diag
        x = traj[commit - 1]
        cur += commit

    notes: list[str] = []
    if not reset_times:
        notes.append("trigger signal never crossed zero; no resets occurred")

    return SimTrace(
        step=h,
        omega=omega,
        amplitude=cfg.amplitude,
        kind=cfg.kind,
        steps_per_cycle=cfg.steps_per_cycle,
        settle_cycles=cfg.settle_cycles,
        analysis_cycles=cfg.analysis_cycles,
        e=signals[:, 0].copy(),
        z=signals[:, 1].copy(),
        zs=signals[:, 2].copy(),
        v=signals[:, 3].copy(),
        u=signals[:, 4].copy(),
        y=signals[:, 5].copy(),
        reset_times=np.asarray(reset_times),
        effective_resets=gamma != 1.0,
        notes=tuple(notes),
        states=states,
        state_offsets=dict(loop.offsets),
        reset_state_index=loop.reset_index,
    )


def steady_state_window(
    trace: SimTrace,
    periods: int | None = None,
    threshold: float = 1e-4,
    signal: str = "y",
) -> SteadyStateWindow:
    """Last ``periods`` whole input periods of the trace.

    The convergence metric is the maximum difference between the final
    period and the one before it, normalized by the signal peak over the
    window; above ``threshold`` the trace is rejected as not settled.
    """
    k = trace.analysis_cycles if periods is None else int(periods)
    spc = trace.steps_per_cycle
    n = trace.n_samples
    if k < 1 or n < (k + 1) * spc:
        raise ValueError("trace too short for the requested analysis window")
    y = trace.signal(signal)
    window = y[n - k * spc:]
    peak = float(np.max(np.abs(window)))
    if peak == 0.0:
        metric = 0.0
    else:
        metric = float(
            np.max(np.abs(y[n - spc:] - y[n - 2 * spc:n - spc])) / peak
        )
    if metric > threshold:
        raise NotSettledError(
            f"period-to-period residual {metric:.3e} exceeds {threshold:g}; "
            "increase the settle cycle count"
        )
    return SteadyStateWindow(start=n - k * spc, stop=n, periods=k, metric=metric)


def resets_per_cycle(
    trace: SimTrace, periods: int | None = None, threshold: float = 1e-4
) -> float:
    """Trigger crossings per steady-state input period.

    Counts crossing instants (with gamma = 1 the jumps are no-ops but the
    crossings still exist; see ``trace.effective_resets``).
    """
    win = steady_state_window(trace, periods=periods, threshold=threshold)
    t0 = win.start * trace.step
    t1 = win.stop * trace.step
    count = int(np.sum((trace.reset_times >= t0) & (trace.reset_times < t1)))
    return count / win.periods


def prediction_error(
    trace: SimTrace,
    predicted: np.ndarray,
    signal: str = "y",
    periods: int | None = None,
    threshold: float = 1e-4,
) -> float:
    """Peak-normalized worst-case deviation between a reconstruction and the
    simulated steady state.

    ``predicted`` must be sampled on the window's time grid (see
    ``steady_state_window``; the grid is phase-aligned with the input by
    construction because the window spans whole periods).
    """
    win = steady_state_window(trace, periods=periods, threshold=threshold)
    sim = trace.signal(signal)[win.slice]
    predicted = np.asarray(predicted, dtype=float)
    if predicted.shape != sim.shape:
        raise ValueError(
            f"prediction has shape {predicted.shape}, window needs {sim.shape}"
        )
    peak = float(np.max(np.abs(sim)))
    if peak == 0.0:
        return float(np.max(np.abs(predicted - sim)))
    return float(np.max(np.abs(predicted - sim)) / peak)


@dataclass(frozen=True)
class ScanReport:
    """Outcome of a multiple-reset frequency scan."""

    frequencies_hz: np.ndarray
    counts: np.ndarray
    intervals_hz: tuple[tuple[float, float], ...]
    failures: tuple[tuple[float, str], ...] = field(default=())

    @property
    def has_multiple_reset_region(self) -> bool:
        return len(self.intervals_hz) > 0


def scan_frequencies(f_start_hz: float, f_end_hz: float, step_hz: float) -> np.ndarray:
    if step_hz <= 0.0:
        raise ValueError("scan step must be positive")
    if f_end_hz < f_start_hz:
        raise ValueError("scan band is empty")
    return np.arange(f_start_hz, f_end_hz + 0.5 * step_hz, step_hz)


def scan_points(
    system: ClosedLoopConfig,
    freqs_hz: np.ndarray,
    amplitude: float = 1.0,
    kind: str = "r",
    settle_threshold: float = 1e-2,
    **sim_overrides,
):
    """Yield (frequency_hz, resets_per_cycle | None, error | None) for each
    scan point; a failed simulation yields the error message and the scan
    moves on."""
    for f in freqs_hz:
        cfg = SimConfig(
            system=system, kind=kind, amplitude=amplitude,
            omega=2.0 * math.pi * float(f), **sim_overrides,
        )
        try:
            trace = simulate(cfg)
            count = resets_per_cycle(trace, threshold=settle_threshold)
            yield float(f), count, None
        except SimulationError as exc:
            yield float(f), None, str(exc)


def collect_scan(freqs_hz: np.ndarray, points) -> ScanReport:
    """Merge per-frequency scan results into contiguous multiple-reset
    intervals."""
    counts = np.full(freqs_hz.size, np.nan)
    failures: list[tuple[float, str]] = []
    flagged = np.zeros(freqs_hz.size, dtype=bool)
    for i, (f, count, err) in enumerate(points):
        if err is not None:
            failures.append((f, err))
            continue
        counts[i] = count
        flagged[i] = count > 2.0 + 1e-9
    intervals: list[tuple[float, float]] = []
    i = 0
    while i < freqs_hz.size:
        if flagged[i]:
            j = i
            while j + 1 < freqs_hz.size and flagged[j + 1]:
                j += 1
            intervals.append((float(freqs_hz[i]), float(freqs_hz[j])))
            i = j + 1
        else:
            i += 1
    return ScanReport(
        frequencies_hz=freqs_hz,
        counts=counts,
        intervals_hz=tuple(intervals),
        failures=tuple(failures),
    )


def multiple_reset_scan(
    system: ClosedLoopConfig,
    f_start_hz: float,
    f_end_hz: float,
    step_hz: float = 1.0,
    amplitude: float = 1.0,
    kind: str = "r",
    settle_threshold: float = 1e-2,
    **sim_overrides,
) -> ScanReport:
    """Scan a frequency band for regions with more than two resets per
    steady-state cycle.

    Per-frequency simulation failures are recorded and the scan continues.
    An empty interval list means the loop behaves as a two-reset system over
    the whole band.  Counting crossings tolerates a larger period-to-period
    residual than waveform comparisons do, hence the laxer default
    ``settle_threshold``.
    """
    freqs = scan_frequencies(f_start_hz, f_end_hz, step_hz)
    points = scan_points(
        system, freqs, amplitude=amplitude, kind=kind,
        settle_threshold=settle_threshold, **sim_overrides,
    )
    return collect_scan(freqs, points)

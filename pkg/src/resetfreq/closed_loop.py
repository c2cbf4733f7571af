"""Closed-loop describing functions of the generalized reset feedback loop:
per-harmonic sensitivity, complementary sensitivity, control sensitivity and
process sensitivity, the loop coupling factor that accounts for higher
harmonics re-entering the loop, and steady-state signal reconstructions.

Valid for loops that reset exactly twice per steady-state cycle; use the
time-domain scan to verify that condition over the analysis band.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lti import LtiBlock, evaluate
from .open_loop import OpenLoopConfig, _RcKernel, odd_harmonics
from .reset_controller import ResetController

__all__ = [
    "AnalysisSingularityError",
    "ClosedLoopConfig",
    "LoopTerms",
    "GammaResult",
    "RatioCheck",
    "SdfCheck",
    "ClosedLoopSignals",
    "ClosedLoopGrid",
    "loop_terms",
    "gamma_factor",
    "sensitivity_n",
    "comp_sensitivity_n",
    "control_sensitivity_n",
    "process_sensitivity_n",
    "harmonic_ratio",
    "reconstruct_closed_loop_signals",
    "reconstruct_disturbance_error",
    "sdf_cross_check",
    "closed_loop_grid",
    "ClosedLoopEvaluator",
]

# relative guard for divisions that can collapse at isolated frequencies
_EPS_SING = 1e-12


class AnalysisSingularityError(ValueError):
    """A division guard tripped at a specific (harmonic, frequency) point."""


@dataclass(frozen=True)
class ClosedLoopConfig:
    """Blocks of the closed feedback loop: the open-loop chain plus the
    feedback-path compensator ``c4``."""

    c1: LtiBlock
    c2: LtiBlock
    c3: LtiBlock
    c4: LtiBlock
    cs: LtiBlock
    cr: ResetController
    plant: LtiBlock

    def open_loop(self) -> OpenLoopConfig:
        return OpenLoopConfig(
            c1=self.c1, c2=self.c2, c3=self.c3, cs=self.cs,
            cr=self.cr, plant=self.plant,
        )


@dataclass(frozen=True)
class LoopTerms:
    """Loop quantities for one (harmonic, frequency) pair.

    ``s_l`` is exactly 1/(1 + l_l) and ``psi_n`` exactly
    |l_rho| / |1 + l_l|; ``delta_c_n`` is the trigger-phase projection for
    this harmonic (first resetting state).
    """

    l_l: complex
    l_rho: complex
    s_l: complex
    psi_n: float
    delta_c_n: float


@dataclass(frozen=True)
class GammaResult:
    """Loop coupling factor with its truncation diagnostic (magnitude of the
    last retained series term)."""

    value: float
    last_term: float
    n_terms: int


@dataclass(frozen=True)
class RatioCheck:
    """|S_n|/|S_1| computed directly and via the open-loop identity."""

    direct: float
    via_open_loop: float

    @property
    def rel_agreement(self) -> float:
        scale = max(abs(self.direct), abs(self.via_open_loop), 1e-300)
        return abs(self.direct - self.via_open_loop) / scale


@dataclass(frozen=True)
class SdfCheck:
    """Fundamental sensitivity computed directly and through the
    first-order-describing-function identity."""

    s1_direct: complex
    s1_via_sdf: complex

    @property
    def rel_agreement(self) -> float:
        scale = max(abs(self.s1_direct), abs(self.s1_via_sdf), 1e-300)
        return abs(self.s1_direct - self.s1_via_sdf) / scale


@dataclass(frozen=True)
class ClosedLoopSignals:
    """Steady-state reference-tracking signals on a shared time grid."""

    error: np.ndarray
    output: np.ndarray
    control: np.ndarray


@dataclass(frozen=True)
class _OmegaAnalysis:
    """Everything the four sensitivity families need at one frequency."""

    omega: float
    harmonics: tuple[int, ...]
    gamma: GammaResult
    l_l: np.ndarray
    l_rho: np.ndarray
    s_l: np.ndarray
    psi: np.ndarray
    delta_c: np.ndarray       # first-component projections, delta_c[0] is the fundamental's
    l_n: np.ndarray
    l_o: complex
    sn: np.ndarray
    tn: np.ndarray
    csn: np.ndarray
    psn: np.ndarray

    def index(self, n: int) -> int:
        return self.harmonics.index(n)


class ClosedLoopEvaluator:
    """Per-frequency closed-loop analysis with shared block evaluations.

    The coupling factor and loop terms for one frequency are computed once
    and reused by all four sensitivity families at that frequency.
    """

    def __init__(self, cfg: ClosedLoopConfig, n_h: int):
        self.cfg = cfg
        self.ns = tuple(odd_harmonics(n_h))
        self._kernel = _RcKernel(cfg.open_loop())
        self._cache: dict[float, _OmegaAnalysis] = {}

    def at(self, omega: float) -> _OmegaAnalysis:
        omega = float(omega)
        if omega in self._cache:
            return self._cache[omega]
        if omega <= 0.0:
            raise ValueError("omega must be positive")
        rec = self._analyze(omega)
        self._cache[omega] = rec
        return rec

    def _analyze(self, omega: float) -> _OmegaAnalysis:
        cfg = self.cfg
        ns = self.ns
        k = len(ns)
        n_arr = np.array(ns, dtype=float)
        wn = n_arr * omega

        c1_n = np.asarray(evaluate(cfg.c1, wn), dtype=complex)
        c2_n = np.asarray(evaluate(cfg.c2, wn), dtype=complex)
        c3_n = np.asarray(evaluate(cfg.c3, wn), dtype=complex)
        c4_n = np.asarray(evaluate(cfg.c4, wn), dtype=complex)
        p_n = np.asarray(evaluate(cfg.plant, wn), dtype=complex)
        cl_n = np.asarray(evaluate(cfg.cr.base, wn), dtype=complex)
        cs_w = complex(evaluate(cfg.cs, omega))
        angle_cs = float(np.angle(cs_w))

        crho = np.array([self._kernel.crho(n, omega) for n in ns], dtype=complex)

        l_l = (cl_n + c2_n) * c3_n * p_n * c4_n * c1_n
        l_rho = crho * c3_n * p_n * c4_n * c1_n
        one_plus_ll = 1.0 + l_l
        bad = np.abs(one_plus_ll) < _EPS_SING * np.maximum(1.0, np.abs(l_l))
        if np.any(bad):
            n_bad = ns[int(np.argmax(bad))]
            raise AnalysisSingularityError(
                f"base-linear loop resonance at n={n_bad}, omega={omega:g} rad/s"
            )
        s_l = 1.0 / one_plus_ll
        psi = np.abs(l_rho) / np.abs(one_plus_ll)

        # trigger-phase projections; only the first (resetting) state matters
        a_r, b_r = cfg.cr.base.a, cfg.cr.base.b
        n_c = cfg.cr.order
        eye = np.eye(n_c)
        delta_c = np.empty(k)
        for j, n in enumerate(ns):
            dl = np.linalg.solve(1j * wn[j] * eye - a_r, b_r.astype(complex))[0]
            if n == 1:
                delta_c[j] = np.abs(dl) * np.sin(np.angle(dl) - angle_cs)
            else:
                delta_c[j] = -np.abs(dl) * np.sin(
                    np.angle(dl)
                    + np.angle(l_rho[j])
                    - np.angle(one_plus_ll[j])
                    - n * angle_cs
                )

        numer = psi[1:] * delta_c[1:]
        if cfg.cr.gamma == 1.0 or not np.any(numer != 0.0):
            # resets contribute nothing (identity jumps or a null reset
            # branch); the coupling series is empty
            terms = np.zeros(numer.shape)
        else:
            dl_scale = np.abs(
                np.linalg.solve(1j * omega * eye - a_r, b_r.astype(complex))[0]
            )
            if abs(delta_c[0]) < _EPS_SING * max(dl_scale, 1e-300):
                raise AnalysisSingularityError(
                    f"fundamental trigger projection vanishes at omega={omega:g} rad/s"
                )
            terms = numer / delta_c[0]
        total = float(np.sum(terms))
        denom = 1.0 - total
        if abs(denom) < _EPS_SING * max(1.0, abs(total)):
            raise AnalysisSingularityError(
                f"coupling-factor series diverges at omega={omega:g} rad/s"
            )
        gamma = GammaResult(
            value=1.0 / denom,
            last_term=float(abs(terms[-1])) if terms.size else 0.0,
            n_terms=int(terms.size),
        )

        # open-loop describing functions (no feedback-path block)
        l_n = np.empty(k, dtype=complex)
        l_n[0] = c1_n[0] * (cl_n[0] + crho[0] + c2_n[0]) * c3_n[0] * p_n[0]
        phase_rep = np.exp(1j * (n_arr[1:] - 1.0) * np.angle(c1_n[0]))
        l_n[1:] = c1_n[0] * phase_rep * crho[1:] * c3_n[1:] * p_n[1:]

        # the fundamental's effective loop gain must include the feedback
        # block so that gamma = 1 degenerates to the base-linear sensitivity
        l_o = c4_n[0] * l_n[0] + (gamma.value - 1.0) * l_rho[0]
        one_plus_lo = 1.0 + l_o
        if abs(one_plus_lo) < _EPS_SING * max(1.0, abs(l_o)):
            raise AnalysisSingularityError(
                f"closed-loop resonance at omega={omega:g} rad/s"
            )
        c4_w, p_w = c4_n[0], p_n[0]
        if abs(c4_w) < _EPS_SING or abs(p_w) < _EPS_SING:
            raise AnalysisSingularityError(
                f"feedback block or plant vanishes at omega={omega:g} rad/s"
            )
        if np.any(np.abs(p_n) < _EPS_SING * max(1.0, abs(p_w))):
            raise AnalysisSingularityError(
                f"plant zero blocks the control-sensitivity path at omega={omega:g} rad/s"
            )

        s1 = 1.0 / one_plus_lo
        t1 = l_o / (c4_w * one_plus_lo)
        cs1 = l_o / (c4_w * p_w * one_plus_lo)
        ps1 = -p_w * c4_w / one_plus_lo

        sn = np.empty(k, dtype=complex)
        tn = np.empty(k, dtype=complex)
        csn = np.empty(k, dtype=complex)
        psn = np.empty(k, dtype=complex)
        sn[0], tn[0], csn[0], psn[0] = s1, t1, cs1, ps1

        common = s_l[1:] * gamma.value * l_n[1:]
        rep_s = np.abs(s1) * np.exp(1j * n_arr[1:] * np.angle(s1))
        rep_ps = np.abs(ps1) * np.exp(1j * n_arr[1:] * np.angle(ps1))
        sn[1:] = -common * rep_s * c4_n[1:]
        tn[1:] = common * rep_s
        csn[1:] = common * rep_s / p_n[1:]
        psn[1:] = -common * rep_ps * c4_n[1:]

        return _OmegaAnalysis(
            omega=omega, harmonics=self.ns, gamma=gamma,
            l_l=l_l, l_rho=l_rho, s_l=s_l, psi=psi, delta_c=delta_c,
            l_n=l_n, l_o=l_o, sn=sn, tn=tn, csn=csn, psn=psn,
        )


def _check_order(n: int) -> bool:
    """True when the harmonic participates (odd); even orders are null."""
    if n < 1:
        raise ValueError("harmonic order must be positive")
    return n % 2 == 1


def loop_terms(cfg: ClosedLoopConfig, n: int, omega: float, n_h: int | None = None) -> LoopTerms:
    """Loop quantities for harmonic ``n`` at ``omega``."""
    if not _check_order(n):
        raise ValueError("loop terms are defined for odd harmonic orders")
    rec = ClosedLoopEvaluator(cfg, max(n, n_h or n)).at(omega)
    j = rec.index(n)
    return LoopTerms(
        l_l=complex(rec.l_l[j]),
        l_rho=complex(rec.l_rho[j]),
        s_l=complex(rec.s_l[j]),
        psi_n=float(rec.psi[j]),
        delta_c_n=float(rec.delta_c[j]),
    )


def gamma_factor(cfg: ClosedLoopConfig, omega: float, n_h: int = 100) -> GammaResult:
    """Loop coupling factor at ``omega`` with the series truncated at odd
    orders up to ``n_h``."""
    return ClosedLoopEvaluator(cfg, n_h).at(omega).gamma


def _family_point(cfg, n, omega, n_h, family) -> complex:
    if not _check_order(n):
        return 0.0 + 0.0j
    rec = ClosedLoopEvaluator(cfg, max(n_h, n)).at(omega)
    return complex(getattr(rec, family)[rec.index(n)])


def sensitivity_n(cfg: ClosedLoopConfig, n: int, omega: float, n_h: int = 100) -> complex:
    """n-th harmonic of reference-to-error transmission."""
    return _family_point(cfg, n, omega, n_h, "sn")


def comp_sensitivity_n(cfg: ClosedLoopConfig, n: int, omega: float, n_h: int = 100) -> complex:
    """n-th harmonic of reference-to-output transmission."""
    return _family_point(cfg, n, omega, n_h, "tn")


def control_sensitivity_n(cfg: ClosedLoopConfig, n: int, omega: float, n_h: int = 100) -> complex:
    """n-th harmonic of reference-to-control-input transmission."""
    return _family_point(cfg, n, omega, n_h, "csn")


def process_sensitivity_n(cfg: ClosedLoopConfig, n: int, omega: float, n_h: int = 100) -> complex:
    """n-th harmonic of disturbance-to-error transmission."""
    return _family_point(cfg, n, omega, n_h, "psn")


def harmonic_ratio(cfg: ClosedLoopConfig, n: int, omega: float, n_h: int = 100) -> RatioCheck:
    """|S_n|/|S_1| via direct division and via the open-loop identity, with
    an agreement diagnostic."""
    if not _check_order(n):
        rec = ClosedLoopEvaluator(cfg, n_h).at(omega)
        if abs(rec.sn[0]) == 0.0:
            raise AnalysisSingularityError("fundamental sensitivity is zero")
        return RatioCheck(direct=0.0, via_open_loop=0.0)
    rec = ClosedLoopEvaluator(cfg, max(n_h, n)).at(omega)
    s1 = rec.sn[0]
    if abs(s1) == 0.0:
        raise AnalysisSingularityError(
            f"fundamental sensitivity is zero at omega={omega:g} rad/s"
        )
    j = rec.index(n)
    direct = float(abs(rec.sn[j]) / abs(s1))
    if n == 1:
        return RatioCheck(direct=direct, via_open_loop=1.0)
    wn = n * omega
    via = float(abs(
        rec.s_l[j] * rec.gamma.value * rec.l_n[j] * complex(evaluate(cfg.c4, wn))
    ))
    return RatioCheck(direct=direct, via_open_loop=via)


def sdf_cross_check(cfg: ClosedLoopConfig, omega: float, n_h: int = 100) -> SdfCheck:
    """Cross-check of the fundamental sensitivity against its
    describing-function form; the two agree identically."""
    rec = ClosedLoopEvaluator(cfg, n_h).at(omega)
    c4_w = complex(evaluate(cfg.c4, omega))
    s_df = 1.0 / (1.0 + c4_w * rec.l_n[0])
    gamma_rho = (rec.gamma.value - 1.0) * rec.l_rho[0]
    return SdfCheck(
        s1_direct=complex(rec.sn[0]),
        s1_via_sdf=complex(s_df / (1.0 + gamma_rho * s_df)),
    )


def _harmonic_sum(values, harmonics, amplitude, omega, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for n, v in zip(harmonics, values):
        out += abs(amplitude) * np.abs(v) * np.sin(n * omega * t + np.angle(v))
    return out


def reconstruct_closed_loop_signals(
    cfg: ClosedLoopConfig,
    r_amplitude: float,
    omega: float,
    n_h: int,
    t: np.ndarray,
) -> ClosedLoopSignals:
    """Steady-state error, output and control input under a sinusoidal
    reference ``r_amplitude * sin(omega t)``."""
    rec = ClosedLoopEvaluator(cfg, n_h).at(omega)
    ns = rec.harmonics
    return ClosedLoopSignals(
        error=_harmonic_sum(rec.sn, ns, r_amplitude, omega, t),
        output=_harmonic_sum(rec.tn, ns, r_amplitude, omega, t),
        control=_harmonic_sum(rec.csn, ns, r_amplitude, omega, t),
    )


def reconstruct_disturbance_error(
    cfg: ClosedLoopConfig,
    d_amplitude: float,
    omega: float,
    n_h: int,
    t: np.ndarray,
) -> np.ndarray:
    """Steady-state error under a sinusoidal disturbance
    ``d_amplitude * sin(omega t)`` at the plant input."""
    rec = ClosedLoopEvaluator(cfg, n_h).at(omega)
    return _harmonic_sum(rec.psn, rec.harmonics, d_amplitude, omega, t)


_FAMILIES = {"sn": "sn", "tn": "tn", "csn": "csn", "psn": "psn"}


@dataclass(frozen=True)
class ClosedLoopGrid:
    """Per-family complex responses on a (frequency, odd harmonic) grid plus
    the per-frequency coupling factor."""

    freqs: np.ndarray
    harmonics: tuple[int, ...]
    families: dict[str, np.ndarray]
    gamma: np.ndarray
    gamma_last_term: np.ndarray
    failures: tuple[tuple[int, str], ...] = field(default=())

    def column(self, family: str, n: int) -> np.ndarray:
        return self.families[family][:, self.harmonics.index(n)]


def closed_loop_grid(
    cfg: ClosedLoopConfig,
    freqs,
    n_h: int,
    families: tuple[str, ...] = ("sn", "tn", "csn", "psn"),
) -> ClosedLoopGrid:
    """Sweep the closed-loop describing functions over a frequency grid.

    Frequencies where a guard trips are excluded (NaN) and reported in
    ``failures`` instead of aborting the sweep.
    """
    for f in families:
        if f not in _FAMILIES:
            raise ValueError(f"unknown function selector {f!r}")
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0 or np.any(freqs <= 0.0) or np.any(np.diff(freqs) < 0.0):
        raise ValueError("frequencies must be positive and sorted ascending")
    ev = ClosedLoopEvaluator(cfg, n_h)
    ns = ev.ns
    data = {f: np.full((freqs.size, len(ns)), np.nan + 0j, dtype=complex) for f in families}
    gam = np.full(freqs.size, np.nan)
    gam_last = np.full(freqs.size, np.nan)
    failures: list[tuple[int, str]] = []
    for i, w in enumerate(freqs):
        try:
            rec = ev.at(float(w))
        except (ValueError, ArithmeticError) as exc:
            failures.append((i, str(exc)))
            continue
        for f in families:
            data[f][i, :] = getattr(rec, f)
        gam[i] = rec.gamma.value
        gam_last[i] = rec.gamma.last_term
    return ClosedLoopGrid(
        freqs=freqs, harmonics=ns, families=data,
        gamma=gam, gamma_last_term=gam_last, failures=tuple(failures),
    )

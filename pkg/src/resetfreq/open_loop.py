"""Open-loop describing functions of the generalized reset control chain and
the steady-state output reconstruction.

The open-loop chain feeds the excitation through a series compensator into
the reset controller (with a parallel compensator alongside it), then through
a post compensator into the plant.  The trigger signal is the shaped version
of the reset-controller input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lti import LtiBlock, evaluate
from .reset_controller import ResetController, delta_terms

__all__ = [
    "OpenLoopConfig",
    "HosidfGrid",
    "cr_hosidf",
    "ln_hosidf",
    "open_loop_grid",
    "cr_grid",
    "reconstruct_open_loop_output",
    "odd_harmonics",
]


def odd_harmonics(n_h: int) -> list[int]:
    """Odd harmonic orders up to and including ``n_h``."""
    if n_h < 1:
        raise ValueError("harmonic cap must be at least 1")
    return list(range(1, n_h + 1, 2))


@dataclass(frozen=True)
class OpenLoopConfig:
    """Blocks of the open-loop reset chain.

    Use ``gain(1)`` / ``gain(0)`` explicitly for absent series / parallel
    paths rather than omitting blocks.
    """

    c1: LtiBlock
    c2: LtiBlock
    c3: LtiBlock
    cs: LtiBlock
    cr: ResetController
    plant: LtiBlock


class _RcKernel:
    """Per-frequency memo for the reset-controller kernel terms.

    The half-period matrix exponential and the jump deficit depend on the
    frequency only, so one entry serves every harmonic order at that
    frequency.
    """

    def __init__(self, cfg: OpenLoopConfig):
        self.cfg = cfg
        self._cache: dict[float, tuple[float, complex]] = {}

    def crho(self, n: int, omega: float) -> complex:
        omega = float(omega)
        if omega not in self._cache:
            cs_val = complex(evaluate(self.cfg.cs, omega))
            self._cache[omega] = (float(np.angle(cs_val)), cs_val)
        angle_cs, _ = self._cache[omega]
        terms = delta_terms(self.cfg.cr, omega, n, angle_cs)
        amp = terms.delta_x @ terms.delta_q.astype(complex)
        return complex(2.0 * amp * np.exp(1j * n * angle_cs) / (n * np.pi))


def cr_hosidf(cfg: OpenLoopConfig, n: int, omega: float, _kernel=None) -> complex:
    """n-th describing function of the reset controller alone.

    The fundamental is the base-linear response plus the reset contribution;
    odd orders above one carry only the reset contribution; even orders are
    identically zero.
    """
    if n < 1:
        raise ValueError("harmonic order must be positive")
    if n % 2 == 0:
        return 0.0 + 0.0j
    kernel = _kernel if _kernel is not None else _RcKernel(cfg)
    crho = kernel.crho(n, omega)
    if n == 1:
        return complex(evaluate(cfg.cr.base, omega)) + crho
    return crho


def ln_hosidf(cfg: OpenLoopConfig, n: int, omega: float, _kernel=None) -> complex:
    """n-th describing function of the whole open-loop chain.

    Harmonics are generated inside the reset controller, so the fundamental
    sees every block at the excitation frequency while higher orders see the
    downstream blocks at n times that frequency.  The series compensator in
    front replicates its phase onto higher orders.
    """
    if n < 1:
        raise ValueError("harmonic order must be positive")
    if n % 2 == 0:
        return 0.0 + 0.0j
    c1 = complex(evaluate(cfg.c1, omega))
    crn = cr_hosidf(cfg, n, omega, _kernel=_kernel)
    if n == 1:
        c2 = complex(evaluate(cfg.c2, omega))
        tail = complex(evaluate(cfg.c3, omega)) * complex(evaluate(cfg.plant, omega))
        return c1 * (crn + c2) * tail
    phase_rep = np.exp(1j * (n - 1) * np.angle(c1))
    tail = complex(evaluate(cfg.c3, n * omega)) * complex(evaluate(cfg.plant, n * omega))
    return c1 * phase_rep * crn * tail


@dataclass(frozen=True)
class HosidfGrid:
    """Complex responses on a (frequency, odd harmonic) grid.

    ``values[i, j]`` is the response at ``freqs[i]`` for harmonic
    ``harmonics[j]``; points that failed to evaluate are NaN and listed in
    ``failures`` as (frequency index, harmonic, message).
    """

    freqs: np.ndarray                 # rad/s, sorted ascending
    harmonics: tuple[int, ...]        # odd orders
    values: np.ndarray                # complex, shape (len(freqs), len(harmonics))
    failures: tuple[tuple[int, int, str], ...] = field(default=())

    def column(self, n: int) -> np.ndarray:
        return self.values[:, self.harmonics.index(n)]


def _fill_grid(freqs, n_h, point) -> HosidfGrid:
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0 or np.any(freqs <= 0.0) or np.any(np.diff(freqs) < 0.0):
        raise ValueError("frequencies must be positive and sorted ascending")
    ns = odd_harmonics(n_h)
    values = np.full((freqs.size, len(ns)), np.nan + 0j, dtype=complex)
    failures: list[tuple[int, int, str]] = []
    for i, w in enumerate(freqs):
        for j, n in enumerate(ns):
            try:
                values[i, j] = point(n, float(w))
            except (ValueError, ArithmeticError) as exc:
                failures.append((i, n, str(exc)))
    return HosidfGrid(freqs=freqs, harmonics=tuple(ns), values=values,
                      failures=tuple(failures))


def open_loop_grid(cfg: OpenLoopConfig, freqs, n_h: int) -> HosidfGrid:
    """Open-loop describing functions over a frequency grid for every odd
    harmonic up to ``n_h``."""
    kernel = _RcKernel(cfg)
    return _fill_grid(freqs, n_h, lambda n, w: ln_hosidf(cfg, n, w, _kernel=kernel))


def cr_grid(cfg: OpenLoopConfig, freqs, n_h: int) -> HosidfGrid:
    """Reset-controller describing functions over a frequency grid."""
    kernel = _RcKernel(cfg)
    return _fill_grid(freqs, n_h, lambda n, w: cr_hosidf(cfg, n, w, _kernel=kernel))


def reconstruct_open_loop_output(
    cfg: OpenLoopConfig,
    amplitude: float,
    phase: float,
    omega: float,
    n_h: int,
    t: np.ndarray,
) -> np.ndarray:
    """Steady-state output for a sinusoidal excitation
    ``amplitude * sin(omega t + phase)``.

    Sum over odd harmonics of |E L_n| sin(n omega t + n phase + angle(L_n));
    the excitation phase is replicated per harmonic order.
    """
    t = np.asarray(t, dtype=float)
    kernel = _RcKernel(cfg)
    out = np.zeros_like(t)
    for n in odd_harmonics(n_h):
        ln = ln_hosidf(cfg, n, omega, _kernel=kernel)
        out += (
            abs(amplitude)
            * np.abs(ln)
            * np.sin(n * omega * t + n * phase + np.angle(ln))
        )
    return out

"""Reset controller: a linear SISO controller whose first state is scaled by
``gamma`` whenever an external trigger signal crosses zero, plus the
frequency-domain kernel terms used by the describing-function analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .lti import RationalTf, StateSpaceModel, to_state_space

__all__ = [
    "ResetController",
    "ResetSingularityError",
    "StabilityScan",
    "DeltaTerms",
    "reset_matrix",
    "base_linear_tf",
    "open_loop_stability_check",
    "delta_terms",
    "c_rho_n",
]


class ResetSingularityError(ValueError):
    """The jump/flow combination is singular at the requested frequency."""


@dataclass(frozen=True)
class ResetController:
    """State-space controller with a single resetting state.

    ``base`` holds the flow dynamics (the base-linear controller); the jump
    multiplies the first state by ``gamma`` in (-1, 1].  ``gamma`` = 1 turns
    the jumps into no-ops and the controller degenerates to its base-linear
    dynamics.
    """

    base: StateSpaceModel
    gamma: float

    def __post_init__(self):
        if not (-1.0 < self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in (-1, 1], got {self.gamma}")

    @classmethod
    def from_tf(cls, tf: RationalTf, gamma: float) -> "ResetController":
        return cls(to_state_space(tf), float(gamma))

    @property
    def order(self) -> int:
        return self.base.order


def reset_matrix(rc: ResetController) -> np.ndarray:
    """Jump matrix diag(gamma, 1, ..., 1)."""
    m = np.eye(rc.order)
    m[0, 0] = rc.gamma
    return m


def base_linear_tf(rc: ResetController) -> StateSpaceModel:
    """Flow dynamics of the controller with resets disabled (independent of
    gamma)."""
    return rc.base


@dataclass(frozen=True)
class StabilityScan:
    """Result of the open-loop stability test over a grid of inter-reset
    intervals."""

    passed: bool
    marginal: bool
    worst_radius: float
    worst_delta: float
    failure: str | None = None


def open_loop_stability_check(
    rc: ResetController,
    deltas: np.ndarray | None = None,
    stab_tol: float = 1e-9,
) -> StabilityScan:
    """Test that the jump-then-flow map is a contraction for every scanned
    inter-reset interval.

    The exact condition quantifies over all positive intervals; here it is
    checked on a grid (default 400 points, log-spaced over [1e-4, 1e3] s)
    and the worst spectral radius plus its maximizer are reported so the
    approximation is explicit.  Radii within ``stab_tol`` of 1 are flagged
    marginal rather than failed.
    """
    if deltas is None:
        deltas = np.geomspace(1e-4, 1e3, 400)
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0 or np.any(deltas <= 0.0):
        raise ValueError("delta grid must be non-empty and positive")

    a_rho = reset_matrix(rc)
    worst_r = -np.inf
    worst_d = deltas[0]
    for d in deltas:
        with np.errstate(over="raise", invalid="raise"):
            try:
                m = a_rho @ expm(rc.base.a * d)
                r = float(np.max(np.abs(np.linalg.eigvals(m))))
            except (FloatingPointError, np.linalg.LinAlgError) as exc:
                return StabilityScan(
                    passed=False,
                    marginal=False,
                    worst_radius=np.inf,
                    worst_delta=float(d),
                    failure=f"spectral radius overflow at delta={d:g} s ({exc})",
                )
        if not np.isfinite(r):
            return StabilityScan(
                passed=False, marginal=False, worst_radius=np.inf,
                worst_delta=float(d),
                failure=f"non-finite spectral radius at delta={d:g} s",
            )
        if r > worst_r:
            worst_r, worst_d = r, float(d)

    marginal = abs(worst_r - 1.0) <= stab_tol
    return StabilityScan(
        passed=bool(worst_r < 1.0 - stab_tol),
        marginal=marginal,
        worst_radius=worst_r,
        worst_delta=worst_d,
    )


@dataclass(frozen=True)
class DeltaTerms:
    """Frequency-domain kernel terms of the reset action at one frequency.

    ``delta_l`` is the state response of the flow dynamics to the controller
    input; ``delta_c`` projects it onto the trigger phase; ``delta_q`` is the
    accumulated jump deficit over one half-period; ``delta_x`` maps the
    deficit to the n-th output harmonic.  For controllers with more than one
    state the magnitude/angle split is applied element-wise; only the first
    (resetting) component of ``delta_c`` enters scalar ratios.
    """

    delta_l: np.ndarray   # complex, (n_c,)
    delta_x: np.ndarray   # complex, (n_c,) row of C_R (jnw I - A_R)^-1 jnw
    delta_c: np.ndarray   # real, (n_c,)
    delta_q: np.ndarray   # real, (n_c,)

    @property
    def delta_c_scalar(self) -> float:
        return float(self.delta_c[0])


def _flow_terms(rc: ResetController, omega: float, angle_cs: float):
    """(delta_l, delta_c, delta_q) at one frequency; independent of the
    harmonic order."""
    a, b = rc.base.a, rc.base.b
    n = rc.order
    dl = np.linalg.solve(1j * omega * np.eye(n) - a, b.astype(complex))
    dc = np.abs(dl) * np.sin(np.angle(dl) - angle_cs)

    e_half = expm(a * (np.pi / omega))
    lhs = reset_matrix(rc) @ e_half + np.eye(n)
    if np.linalg.cond(lhs) > 1e14:
        raise ResetSingularityError(
            f"jump/flow matrix is singular at omega={omega:g} rad/s"
        )
    dq = (np.eye(n) + e_half) @ np.linalg.solve(
        lhs, (reset_matrix(rc) - np.eye(n)) @ dc
    )
    return dl, dc, dq


def delta_terms(
    rc: ResetController, omega: float, n: int, angle_cs: float
) -> DeltaTerms:
    """All four kernel terms at frequency ``omega`` for harmonic order ``n``.

    ``angle_cs`` is the phase of the trigger-shaping filter at ``omega``,
    wrapped to (-pi, pi].
    """
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    if n < 1 or n % 2 == 0:
        raise ValueError("harmonic order must be an odd positive integer")
    dl, dc, dq = _flow_terms(rc, float(omega), float(angle_cs))
    a = rc.base.a
    dx = (1j * n * omega) * np.linalg.solve(
        (1j * n * omega * np.eye(rc.order) - a).T, rc.base.c.astype(complex)
    )
    return DeltaTerms(delta_l=dl, delta_x=dx, delta_c=dc, delta_q=dq)


def c_rho_n(rc: ResetController, omega: float, n: int, cs_response: complex) -> complex:
    """n-th describing-function component contributed by the resets.

    ``cs_response`` is the complex response of the trigger-shaping filter at
    ``omega``; only its phase enters.  Vanishes identically for gamma = 1.
    """
    angle_cs = float(np.angle(cs_response))
    terms = delta_terms(rc, omega, n, angle_cs)
    amp = terms.delta_x @ terms.delta_q.astype(complex)
    return complex(2.0 * amp * np.exp(1j * n * angle_cs) / (n * np.pi))

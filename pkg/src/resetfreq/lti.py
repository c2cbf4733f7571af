"""Linear time-invariant blocks: rational transfer functions, state-space
models, and tabulated frequency-response data.

Every block in the control structure (series/parallel compensators, shaping
filter, plant) is one of the three variants below.  All values are immutable
after construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LtiError",
    "ImproperSystemError",
    "PoleOnAxisError",
    "FrfRangeError",
    "UnsupportedVariantError",
    "RationalTf",
    "StateSpaceModel",
    "FrfTable",
    "LtiBlock",
    "gain",
    "unit",
    "zero",
    "evaluate",
    "to_state_space",
    "series",
    "poles",
    "hurwitz_check",
]

# imaginary parts below this are treated as real when classifying roots
_ROOT_IMAG_TOL = 1e-10


class LtiError(ValueError):
    """Base class for LTI construction/evaluation failures."""


class ImproperSystemError(LtiError):
    """Numerator degree too high for the requested operation."""


class PoleOnAxisError(LtiError):
    """Evaluation frequency coincides with a pole on the imaginary axis."""


class FrfRangeError(LtiError):
    """Requested frequency lies outside the tabulated FRF span."""


class UnsupportedVariantError(LtiError):
    """Operation is not defined for this block variant."""


def _as_coeffs(c) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(c, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise LtiError("coefficient arrays must be non-empty 1-D sequences")
    # strip exact leading zeros but keep at least one coefficient
    nz = np.nonzero(arr)[0]
    if nz.size == 0:
        return (0.0,)
    return tuple(float(x) for x in arr[nz[0]:])


@dataclass(frozen=True)
class RationalTf:
    """Rational transfer function with real coefficients in descending
    powers of s.

    Improper numerators are allowed up to one extra degree (lead terms such
    as ``s/w``); anything beyond that is rejected.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __init__(self, num, den):
        object.__setattr__(self, "num", _as_coeffs(num))
        object.__setattr__(self, "den", _as_coeffs(den))
        if self.den[0] == 0.0:
            raise LtiError("denominator leading coefficient must be nonzero")
        if len(self.num) > len(self.den) + 1:
            raise ImproperSystemError(
                "numerator degree exceeds denominator degree by more than one"
            )

    @property
    def degree_num(self) -> int:
        return len(self.num) - 1

    @property
    def degree_den(self) -> int:
        return len(self.den) - 1

    @property
    def is_proper(self) -> bool:
        return self.degree_num <= self.degree_den


@dataclass(frozen=True)
class StateSpaceModel:
    """Single-input single-output state-space model (A, B, C, D)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float

    def __init__(self, a, b, c, d):
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        c = np.asarray(c, dtype=float).reshape(-1)
        n = a.shape[0]
        if a.shape != (n, n) or n < 1:
            raise LtiError("A must be square with at least one state")
        if b.shape != (n,) or c.shape != (n,):
            raise LtiError("B and C must match the state dimension")
        a.setflags(write=False)
        b.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", float(d))

    @property
    def order(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class FrfTable:
    """Measured frequency-response samples, interpolated in the Bode domain
    (linear in log-frequency on dB magnitude and unwrapped phase)."""

    freq: np.ndarray          # rad/s, strictly increasing, positive
    response: np.ndarray      # complex samples
    _logf: np.ndarray = field(repr=False, compare=False, default=None)
    _mag_db: np.ndarray = field(repr=False, compare=False, default=None)
    _phase: np.ndarray = field(repr=False, compare=False, default=None)

    def __init__(self, freq, response):
        freq = np.asarray(freq, dtype=float).reshape(-1)
        response = np.asarray(response, dtype=complex).reshape(-1)
        if freq.size < 2 or freq.size != response.size:
            raise LtiError("FRF table needs at least two matching samples")
        if np.any(freq <= 0.0) or np.any(np.diff(freq) <= 0.0):
            raise LtiError("FRF frequencies must be positive and strictly increasing")
        if np.any(response == 0.0):
            raise LtiError("FRF magnitudes must be nonzero for dB interpolation")
        for name, val in (
            ("freq", freq),
            ("response", response),
            ("_logf", np.log10(freq)),
            ("_mag_db", 20.0 * np.log10(np.abs(response))),
            ("_phase", np.unwrap(np.angle(response))),
        ):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @classmethod
    def from_csv(cls, path) -> "FrfTable":
        """Load a table from CSV with header ``freq_hz,re,im``."""
        raw = np.genfromtxt(path, delimiter=",", names=True)
        try:
            f_hz = np.atleast_1d(raw["freq_hz"])
            re = np.atleast_1d(raw["re"])
            im = np.atleast_1d(raw["im"])
        except (KeyError, ValueError) as exc:
            raise LtiError(f"FRF CSV must have columns freq_hz,re,im: {exc}") from exc
        return cls(2.0 * np.pi * f_hz, re + 1j * im)


LtiBlock = RationalTf | StateSpaceModel | FrfTable


def gain(k: float) -> RationalTf:
    """Constant gain wrapped as a degenerate rational block."""
    return RationalTf((float(k),), (1.0,))


def unit() -> RationalTf:
    return gain(1.0)


def zero() -> RationalTf:
    return gain(0.0)


def evaluate(block: LtiBlock, omega):
    """Frequency response H(jw) of a block at ``omega`` (rad/s, scalar or
    array).

    Rational blocks evaluate the polynomial ratio at s = jw; state-space
    blocks evaluate C (jwI - A)^-1 B + D; FRF tables interpolate in the
    Bode domain and reject frequencies outside their span.
    """
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    s = 1j * w

    if isinstance(block, RationalTf):
        den = np.polyval(block.den, s)
        if np.any(den == 0.0):
            bad = w[den == 0.0][0]
            raise PoleOnAxisError(f"pole on the imaginary axis at omega={bad:g} rad/s")
        out = np.polyval(block.num, s) / den
    elif isinstance(block, StateSpaceModel):
        n = block.order
        eye = np.eye(n)
        out = np.empty(w.shape, dtype=complex)
        for i, si in enumerate(s):
            try:
                sol = np.linalg.solve(si * eye - block.a, block.b)
            except np.linalg.LinAlgError as exc:
                raise PoleOnAxisError(
                    f"pole on the imaginary axis at omega={w[i]:g} rad/s"
                ) from exc
            out[i] = block.c @ sol + block.d
    elif isinstance(block, FrfTable):
        if np.any(w < block.freq[0]) or np.any(w > block.freq[-1]):
            raise FrfRangeError(
                f"frequency outside FRF span [{block.freq[0]:g}, {block.freq[-1]:g}] rad/s"
            )
        logw = np.log10(w)
        mag = 10.0 ** (np.interp(logw, block._logf, block._mag_db) / 20.0)
        ph = np.interp(logw, block._logf, block._phase)
        out = mag * np.exp(1j * ph)
    else:
        raise UnsupportedVariantError(f"cannot evaluate {type(block).__name__}")

    return out[0] if scalar else out


def to_state_space(block: LtiBlock) -> StateSpaceModel:
    """Controllable-canonical realization of a proper rational block.

    Pure gains are realized with one dummy stable state so that every block
    has a uniform state-space path.
    """
    if isinstance(block, StateSpaceModel):
        return block
    if isinstance(block, FrfTable):
        raise UnsupportedVariantError("FRF tables have no state-space realization")
    if not block.is_proper:
        raise ImproperSystemError("only proper transfer functions are realizable")

    den = np.asarray(block.den, dtype=float)
    den = den / den[0]
    n = den.size - 1
    num = np.zeros(n + 1)
    num[n + 1 - len(block.num):] = np.asarray(block.num, dtype=float) / block.den[0]

    if n == 0:
        return StateSpaceModel([[-1.0]], [0.0], [0.0], num[0])

    d = num[0]
    a = np.zeros((n, n))
    a[0, :] = -den[1:]
    if n > 1:
        a[1:, :-1] = np.eye(n - 1)
    b = np.zeros(n)
    b[0] = 1.0
    c = num[1:] - den[1:] * d
    return StateSpaceModel(a, b, c, d)


def series(*blocks: RationalTf) -> RationalTf:
    """Cascade of rational blocks (polynomial product of factors)."""
    num = np.array([1.0])
    den = np.array([1.0])
    for blk in blocks:
        if not isinstance(blk, RationalTf):
            raise UnsupportedVariantError("series composition needs rational blocks")
        num = np.polymul(num, blk.num)
        den = np.polymul(den, blk.den)
    return RationalTf(num, den)


def poles(block: LtiBlock) -> np.ndarray:
    """Poles of a rational block (companion-matrix roots) or state-space
    eigenvalues; imaginary parts below 1e-10 are collapsed to the real axis."""
    if isinstance(block, RationalTf):
        if len(block.den) == 1:
            return np.array([], dtype=complex)
        p = np.roots(block.den)
    elif isinstance(block, StateSpaceModel):
        p = np.linalg.eigvals(block.a)
    else:
        raise UnsupportedVariantError("FRF tables expose no pole information")
    p = np.asarray(p, dtype=complex)
    p.imag[np.abs(p.imag) < _ROOT_IMAG_TOL] = 0.0
    return p


def hurwitz_check(block: LtiBlock, tol: float = 0.0) -> bool:
    """True iff every pole satisfies Re(p) < -tol (strict open left
    half-plane by default; a pole at the origin fails)."""
    return bool(np.all(poles(block).real < -tol))

"""Ring of phase-amplitude oscillators with nearest-neighbour reactive coupling.

Complex form, per node ``j`` (indices modulo ``N``)::

    dA_j/dt = -A_j + i w_j A_j + 2i alpha |A_j|^2 A_j + A_j/|A_j|
              + i beta (A_{j-1} - 2 A_j + A_{j+1})

Polar form uses ``A_j = a_j exp(i phi_j)``. Real 2N-vectors interleave the two
coordinates per node: index ``2j`` holds ``a_j``, index ``2j+1`` holds
``phi_j``.  Phases are kept unwrapped; only output is reduced to [0, 2pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import AmplitudeUnderflow, BadRingSize, RingError

EPS_AMP = 1e-8
TWO_PI = 2.0 * math.pi

Representation = Literal["complex", "polar"]


@dataclass(frozen=True)
class RingParams:
    """Scalar parameters of a ring of ``N = 4M`` oscillators.

    Attributes
    ----------
    n_oscillators : int
        Ring size ``N``; must be a positive multiple of four.
    duffing : float
        Duffing coefficient ``alpha``.
    coupling : float
        Reactive coupling strength ``beta``.
    mean_frequency : float
        Mean natural frequency ``omega``.
    detuning : float
        Frequency difference ``Omega`` between odd and even nodes. Even nodes
        run at ``omega - Omega/2``, odd nodes at ``omega + Omega/2``.
    """

    n_oscillators: int
    duffing: float = 0.0
    coupling: float = 1.0
    mean_frequency: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        n = self.n_oscillators
        if isinstance(n, bool) or int(n) != n:
            raise BadRingSize(f"n_oscillators must be an integer, got {n!r}")
        object.__setattr__(self, "n_oscillators", int(n))
        if n < 4 or n % 4:
            raise BadRingSize(f"ring size must be a positive multiple of 4, got N={n}")
        for name in ("duffing", "coupling", "mean_frequency", "detuning"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise RingError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return self.n_oscillators

    @property
    def m(self) -> int:
        return self.n_oscillators // 4

    def natural_frequencies(self) -> NDArray[np.float64]:
        w = np.full(self.n, self.mean_frequency)
        w[0::2] -= 0.5 * self.detuning
        w[1::2] += 0.5 * self.detuning
        return w

    def with_(self, **changes) -> "RingParams":
        return replace(self, **changes)


def natural_frequency(params: RingParams, j: int) -> float:
    if not 0 <= j < params.n:
        raise IndexError(f"node index {j} out of range for N={params.n}")
    half = 0.5 * params.detuning
    return params.mean_frequency - half if j % 2 == 0 else params.mean_frequency + half


@dataclass(frozen=True)
class RingState:
    """Oscillator states in one of two representations.

    ``data`` is a complex array of length N for ``"complex"``, or a real
    interleaved array of length 2N for ``"polar"``.
    """

    data: NDArray = field(repr=False)
    representation: Representation = "complex"

    def __post_init__(self):
        if self.representation == "complex":
            arr = np.asarray(self.data, dtype=complex).ravel()
        elif self.representation == "polar":
            arr = np.asarray(self.data, dtype=float).ravel()
            if arr.size % 2:
                raise RingError("polar state must have an even number of entries")
            if np.any(arr[0::2] < 0):
                raise RingError("polar amplitudes must be nonnegative")
        else:
            raise RingError(f"unknown representation {self.representation!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_complex(cls, amplitudes: ArrayLike) -> "RingState":
        return cls(np.asarray(amplitudes, dtype=complex), "complex")

    @classmethod
    def from_polar(cls, amplitudes: ArrayLike, phases: ArrayLike) -> "RingState":
        a = np.asarray(amplitudes, dtype=float).ravel()
        phi = np.asarray(phases, dtype=float).ravel()
        if a.shape != phi.shape:
            raise RingError("amplitudes and phases differ in length")
        x = np.empty(2 * a.size)
        x[0::2] = a
        x[1::2] = phi
        return cls(x, "polar")

    @property
    def n(self) -> int:
        return self.data.size if self.representation == "complex" else self.data.size // 2

    @property
    def amplitudes(self) -> NDArray[np.float64]:
        if self.representation == "complex":
            return np.abs(self.data)
        return self.data[0::2].copy()

    @property
    def phases(self) -> NDArray[np.float64]:
        """Phases as stored; wrapped to [0, 2pi) for complex states."""
        if self.representation == "complex":
            return wrap_phase(np.angle(self.data))
        return self.data[1::2].copy()

    def to_complex(self) -> "RingState":
        return to_complex(self)

    def to_polar(self) -> "RingState":
        return to_polar(self)


def wrap_phase(phi: ArrayLike) -> NDArray[np.float64]:
    """Reduce phases to [0, 2pi)."""
    out = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    # mod of a tiny negative number rounds up to exactly 2pi
    out[out >= TWO_PI] = 0.0
    return out


def to_polar(state: RingState) -> RingState:
    if state.representation == "polar":
        return state
    a = np.abs(state.data)
    if np.any(a <= 0.0):
        raise AmplitudeUnderflow("cannot take the phase of a zero amplitude")
    return RingState.from_polar(a, wrap_phase(np.angle(state.data)))


def to_complex(state: RingState) -> RingState:
    if state.representation == "complex":
        return state
    x = state.data
    return RingState.from_complex(x[0::2] * np.exp(1j * x[1::2]))


def _complex_array(state) -> NDArray[np.complex128]:
    if isinstance(state, RingState):
        return state.to_complex().data
    return np.asarray(state, dtype=complex)


def _polar_array(state) -> NDArray[np.float64]:
    if isinstance(state, RingState):
        return state.to_polar().data
    return np.asarray(state, dtype=float)


def _check_size(params: RingParams, n: int) -> None:
    if n != params.n:
        raise RingError(f"state has {n} nodes, params expect N={params.n}")


def rhs_complex(params: RingParams, state) -> NDArray[np.complex128]:
    """Complex time derivatives ``dA_j/dt`` for all nodes."""
    A = _complex_array(state)
    _check_size(params, A.size)
    mag = np.abs(A)
    if np.any(mag <= EPS_AMP):
        j = int(np.argmin(mag))
        raise AmplitudeUnderflow(f"|A_{j}| = {mag[j]:.3g} <= {EPS_AMP:g}")
    w = params.natural_frequencies()
    alpha, beta = params.duffing, params.coupling
    laplacian = np.roll(A, 1) - 2.0 * A + np.roll(A, -1)
    return -A + 1j * w * A + 2j * alpha * mag**2 * A + A / mag + 1j * beta * laplacian


def rhs_polar(params: RingParams, state) -> NDArray[np.float64]:
    """Interleaved ``(da_j/dt, dphi_j/dt)`` for all nodes."""
    x = _polar_array(state)
    _check_size(params, x.size // 2)
    a = x[0::2]
    phi = x[1::2]
    if np.any(a <= EPS_AMP):
        j = int(np.argmin(a))
        raise AmplitudeUnderflow(f"a_{j} = {a[j]:.3g} <= {EPS_AMP:g}")
    beta = params.coupling
    a_prev, a_next = np.roll(a, 1), np.roll(a, -1)
    d_prev = np.roll(phi, 1) - phi
    d_next = np.roll(phi, -1) - phi

    out = np.empty_like(x)
    out[0::2] = 1.0 - a - beta * a_prev * np.sin(d_prev) - beta * a_next * np.sin(d_next)
    out[1::2] = (
        params.natural_frequencies()
        + 2.0 * params.duffing * a**2
        + beta * (a_prev / a) * np.cos(d_prev)
        + beta * (a_next / a) * np.cos(d_next)
        - 2.0 * beta
    )
    return out


def polar_from_complex_rate(state, dA: ArrayLike) -> NDArray[np.float64]:
    """Chain rule: map complex derivatives to interleaved polar derivatives."""
    A = _complex_array(state)
    dA = np.asarray(dA, dtype=complex)
    a = np.abs(A)
    rot = np.conj(A) / a * dA  # exp(-i phi) dA/dt
    out = np.empty(2 * A.size)
    out[0::2] = rot.real
    out[1::2] = rot.imag / a
    return out

"""Fixed-step classical Runge-Kutta integration.

Two flavours: nonlinear orbits of the ring, and linear matrix flows
``dV/dt = D(t) V`` started from the identity (monodromy matrices).  No
adaptive stepping: every run with the same inputs is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import AmplitudeUnderflow, NonFiniteFlow, RingError
from .model import RingParams, RingState, rhs_polar, to_polar

VectorField = Callable[[float, NDArray], NDArray]
Observer = Callable[[int, float, NDArray], None]

DEFAULT_FLOQUET_STEPS = 1000


def rk4_step(f: VectorField, x: NDArray, t: float, dt: float) -> NDArray:
    """One classical RK4 step of ``dx/dt = f(t, x)``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = f(t, x)
    k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True)
class Trajectory:
    """Sampled orbit. ``states`` rows are interleaved polar vectors with
    unwrapped phases."""

    times: NDArray[np.float64]
    states: NDArray[np.float64]

    @property
    def amplitudes(self) -> NDArray[np.float64]:
        return self.states[:, 0::2]

    @property
    def phases(self) -> NDArray[np.float64]:
        return self.states[:, 1::2]

    def theta(self) -> NDArray[np.float64]:
        """Reference phase of the even cluster, ``phi_0``."""
        return self.states[:, 1]

    def psi(self) -> NDArray[np.float64]:
        """Inter-cluster phase difference ``phi_1 - phi_0``."""
        return self.states[:, 3] - self.states[:, 1]

    def state(self, i: int) -> RingState:
        return RingState(self.states[i], "polar")


def integrate_orbit(
    params: RingParams,
    state0: RingState | ArrayLike,
    dt: float,
    n_steps: int,
    stride: int = 1,
    observer: Optional[Observer] = None,
    t0: float = 0.0,
) -> Trajectory:
    """Integrate the polar equations of motion with RK4.

    Samples are taken at step 0 and every ``stride`` steps thereafter (the
    final step is always included).  ``observer(step, t, x)`` is called on
    every sample.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")

    if isinstance(state0, RingState):
        x = to_polar(state0).data.copy()
    else:
        x = np.array(state0, dtype=float)
    if x.size != 2 * params.n:
        raise RingError(f"initial state has {x.size} entries, expected {2 * params.n}")

    def f(_t, y):
        return rhs_polar(params, y)

    times = [t0]
    samples = [x.copy()]
    if observer is not None:
        observer(0, t0, x)
    for step in range(1, n_steps + 1):
        t_prev = t0 + (step - 1) * dt
        try:
            x = rk4_step(f, x, t_prev, dt)
        except AmplitudeUnderflow as exc:
            raise AmplitudeUnderflow(
                f"{exc} at step {step} (t={t_prev:.6g})", step=step, time=t_prev
            ) from exc
        if step % stride == 0 or step == n_steps:
            t = t0 + step * dt
            times.append(t)
            samples.append(x.copy())
            if observer is not None:
                observer(step, t, x)
    return Trajectory(np.asarray(times), np.asarray(samples))


def monodromy(
    block_fn: Callable[[NDArray | float], NDArray],
    period: float | ArrayLike,
    n_steps: int = DEFAULT_FLOQUET_STEPS,
) -> NDArray:
    """Propagate the identity through ``dV/dt = D(t) V`` for one period.

    ``block_fn(t)`` returns a ``(..., d, d)`` array.  ``period`` may be a
    scalar or an array of per-system periods matching the leading batch
    shape; in that case ``t`` passed to ``block_fn`` is an array of the same
    shape and every system takes ``n_steps`` steps of its own size.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    period = np.asarray(period, dtype=float)
    if np.any(~(period > 0)):
        raise ValueError("period must be positive")
    h = period / n_steps
    hm = h[..., None, None]

    d_now = np.asarray(block_fn(0.0 * h))
    V = np.broadcast_to(np.eye(d_now.shape[-1], dtype=d_now.dtype), d_now.shape).copy()
    with np.errstate(over="ignore", invalid="ignore"):  # reported below as NonFiniteFlow
        for i in range(n_steps):
            d_mid = block_fn((i + 0.5) * h)
            d_next = block_fn((i + 1) * h)
            k1 = d_now @ V
            k2 = d_mid @ (V + (0.5 * hm) * k1)
            k3 = d_mid @ (V + (0.5 * hm) * k2)
            k4 = d_next @ (V + hm * k3)
            V = V + (hm / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            d_now = d_next
    if not np.all(np.isfinite(V)):
        raise NonFiniteFlow("monodromy integration produced non-finite entries")
    return V

"""Ring symmetries, the decoupled state, and the wave-pattern basis.

A :class:`SymmetryOp` is ``sigma_theta * sigma_rot**r * sigma_ref**s``
acting on complex states as::

    (op A)_j = exp(i theta) A_{pi(j)},   pi(j) = j + r  or  -j - r  (mod N)

In polar coordinates the node permutation is the same and the phase shift
adds ``theta`` to every phase; its differential is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

from .errors import BadRingSize, RingError, WavenumberOutOfRange
from .model import (
    TWO_PI,
    RingParams,
    RingState,
    rhs_polar,
    rhs_complex,
    to_complex,
    to_polar,
)


@dataclass(frozen=True)
class SymmetryOp:
    rotation: int = 0
    reflect: bool = False
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rotation", int(self.rotation))
        object.__setattr__(self, "reflect", bool(self.reflect))
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)

    def _affine(self) -> tuple[int, int]:
        # pi(j) = eps * j + c
        return (-1, -self.rotation) if self.reflect else (1, self.rotation)

    def permutation(self, n: int) -> NDArray[np.intp]:
        """Source index for each target node: ``(op A)_j`` reads ``A[perm[j]]``."""
        eps, c = self._affine()
        return (eps * np.arange(n) + c) % n

    def __matmul__(self, other: "SymmetryOp") -> "SymmetryOp":
        """``self @ other`` applies ``other`` first, then ``self``."""
        e1, c1 = other._affine()
        e2, c2 = self._affine()
        eps, c = e1 * e2, e1 * c2 + c1
        rotation = c if eps == 1 else -c
        return SymmetryOp(rotation, eps == -1, self.phase + other.phase)

    def __pow__(self, m: int) -> "SymmetryOp":
        if m < 0:
            raise ValueError("negative powers are not supported")
        out = IDENTITY
        for _ in range(m):
            out = self @ out
        return out

    def tangent_matrix(self, n: int) -> NDArray[np.float64]:
        """Differential acting on interleaved polar tangent vectors."""
        perm = self.permutation(n)
        P = np.zeros((2 * n, 2 * n))
        rows = np.arange(n)
        P[2 * rows, 2 * perm] = 1.0
        P[2 * rows + 1, 2 * perm + 1] = 1.0
        return P


IDENTITY = SymmetryOp()
ROTATION = SymmetryOp(rotation=1)
REFLECTION = SymmetryOp(reflect=True)
HALF_PERIOD = SymmetryOp(phase=math.pi)
# sigma_pi sigma_rot^2: A_j -> -A_{j+2}; fixes exactly the decoupled states
DECOUPLED_GENERATOR = SymmetryOp(rotation=2, phase=math.pi)


def phase_shift(theta: float) -> SymmetryOp:
    return SymmetryOp(phase=theta)


def apply(op: SymmetryOp, state: RingState) -> RingState:
    n = state.n
    perm = op.permutation(n)
    if state.representation == "complex":
        A = state.data[perm]
        if op.phase:
            A = A * np.exp(1j * op.phase)
        return RingState.from_complex(A)
    x = state.data
    return RingState.from_polar(x[0::2][perm], x[1::2][perm] + op.phase)


def _residual(op: SymmetryOp, params: RingParams, state: RingState, coords: str) -> float:
    if coords == "polar":
        x = to_polar(state)
        lhs = rhs_polar(params, apply(op, x))
        rhs = op.tangent_matrix(params.n) @ rhs_polar(params, x)
    elif coords == "complex":
        A = to_complex(state)
        lhs = rhs_complex(params, apply(op, A))
        rhs = apply(op, RingState.from_complex(rhs_complex(params, A))).data
    else:
        raise ValueError(f"coords must be 'polar' or 'complex', got {coords!r}")
    return float(np.max(np.abs(lhs - rhs)))


def check_equivariance(
    op: SymmetryOp,
    params: RingParams,
    samples: Iterable[RingState],
    coords: str = "polar",
) -> float:
    """Max over samples of ``||f(op x) - D(op) f(x)||_inf``.

    In polar coordinates ``D(op)`` is the node permutation (phase shifts
    contribute the identity); in complex coordinates it is ``op`` itself.
    """
    return max(_residual(op, params, s, coords) for s in samples)


@dataclass(frozen=True)
class DecoupledPoint:
    """Reference phase ``theta`` and inter-cluster difference ``psi``."""

    theta: float = 0.0
    psi: float = 0.0


def _check_ring(n: int) -> None:
    if n < 4 or n % 4:
        raise BadRingSize(f"decoupled state needs N = 4M, got N={n}")


def decoupled_state(
    params: RingParams | int,
    point: DecoupledPoint = DecoupledPoint(),
    representation: str = "polar",
) -> RingState:
    """Unit-amplitude state with phases theta, theta+psi, theta+pi, theta+psi+pi
    by ``j mod 4``.

    The complex representation is built as ``(c0, c1, -c0, -c1, ...)`` so the
    antiphase condition ``A_{j-1} + A_{j+1} = 0`` holds exactly.
    """
    n = params if isinstance(params, int) else params.n
    _check_ring(n)
    j = np.arange(n)
    if representation == "polar":
        offsets = np.array([0.0, point.psi, math.pi, point.psi + math.pi])
        return RingState.from_polar(np.ones(n), point.theta + offsets[j % 4])
    if representation == "complex":
        c0 = complex(math.cos(point.theta), math.sin(point.theta))
        t1 = point.theta + point.psi
        c1 = complex(math.cos(t1), math.sin(t1))
        return RingState.from_complex(np.array([c0, c1, -c0, -c1])[j % 4])
    raise ValueError(f"unknown representation {representation!r}")


def coupling_residual(params: RingParams, state: RingState) -> float:
    """Distance of the coupling term from its decoupled surrogate ``-2i beta A_j``."""
    A = to_complex(state).data
    resid = 1j * params.coupling * (np.roll(A, 1) - 2.0 * A + np.roll(A, -1)) + 2j * params.coupling * A
    return float(np.max(np.abs(resid)))


@dataclass(frozen=True)
class SymmetryBasis:
    """Orthonormal 2N x 4 basis of one isotypic component.

    Columns are ordered (a_even, a_odd, phi_even, phi_odd); rows follow the
    interleaved polar layout. ``zeta`` is the eigenvalue ``exp(4 k i pi / N)``
    of the generator ``sigma_pi sigma_rot^2`` on these columns.
    """

    n: int
    k: int
    zeta: complex
    columns: NDArray[np.complex128]

    def project(self, matrix: NDArray) -> NDArray[np.complex128]:
        return self.columns.conj().T @ matrix @ self.columns


def wave_pattern(n: int, k: int) -> NDArray[np.complex128]:
    """``Phi_p = zeta**(k p)`` over the N/2 adjacent pairs, unnormalized."""
    p = np.arange(n // 2)
    return np.exp(4j * math.pi * k * p / n)


def symmetry_basis(n: int, k: int) -> SymmetryBasis:
    _check_ring(n)
    if not 0 <= k < n // 2:
        raise WavenumberOutOfRange(f"k must lie in [0, {n // 2}), got {k}")
    phi = wave_pattern(n, k) / math.sqrt(n // 2)
    V = np.zeros((2 * n, 4), dtype=complex)
    pairs = np.arange(n // 2)
    for node in (0, 1):  # position within the (even, odd) pair
        for comp in (0, 1):  # amplitude, phase
            V[4 * pairs + 2 * node + comp, 2 * comp + node] = phi
    return SymmetryBasis(n, k, complex(np.exp(4j * math.pi * k / n)), V)


def full_basis(n: int) -> NDArray[np.complex128]:
    """All isotypic bases side by side: a unitary 2N x 2N matrix."""
    return np.hstack([symmetry_basis(n, k).columns for k in range(n // 2)])


def group_elements(n: int) -> list[SymmetryOp]:
    """The cyclic group generated by ``sigma_pi sigma_rot^2`` (order N/2)."""
    _check_ring(n)
    return [DECOUPLED_GENERATOR**m for m in range(n // 2)]


def random_states(
    params: RingParams, count: int, rng: np.random.Generator, low: float = 0.5, high: float = 1.5
) -> list[RingState]:
    """Random complex states with amplitudes in [low, high)."""
    if count < 1:
        raise RingError("count must be positive")
    out = []
    for _ in range(count):
        a = rng.uniform(low, high, params.n)
        phi = rng.uniform(0.0, TWO_PI, params.n)
        out.append(RingState.from_complex(a * np.exp(1j * phi)))
    return out

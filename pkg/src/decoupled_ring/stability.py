"""Linear stability of the decoupled state.

Rate convention
---------------
The 4x4 blocks returned by :func:`block_dk` and the closed-form eigenvalues
use the half-rate normalisation, in which the k=0 block has eigenvalues
{0, 0, -1/2, -1/2}.  The linearisation of the polar equations itself
(:func:`jacobian_analytic`) has amplitude relaxation rate -1, so its spectrum
is exactly twice the block spectrum::

    block_dk(psi) == RATE_SCALE * V^H J(pi - psi) V

(the ``pi - psi`` only flips the sign of every ``cos psi`` entry and leaves
spectra unchanged).  All full-system oracles below therefore integrate
``RATE_SCALE * J``.  Signs of growth rates, and hence every stability verdict,
are independent of this scale.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linear_sum_assignment

from .errors import (
    ConvergenceError,
    DetunedSystem,
    InadmissibleCoupling,
    WavenumberOutOfRange,
    ZeroDetuning,
)
from .integrate import DEFAULT_FLOQUET_STEPS, monodromy
from .model import TWO_PI, RingParams, rhs_polar
from .symmetry import DecoupledPoint, decoupled_state, symmetry_basis

RATE_SCALE = 0.5
EIG_RESIDUAL_TOL = 1e-9


# -- Jacobian of the full ring -------------------------------------------------

def jacobian_analytic(params: RingParams, psi: float) -> NDArray[np.float64]:
    """2N x 2N Jacobian of the polar equations on the decoupled torus.

    Independent of the reference phase theta.  Row/column layout is the
    interleaved (a_j, phi_j) convention of :mod:`decoupled_ring.model`.
    """
    n = params.n
    alpha, beta = params.duffing, params.coupling
    bs, bc = beta * math.sin(psi), beta * math.cos(psi)
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        sign = 1.0 if j % 2 == 0 else -1.0
        prev, nxt = (j - 1) % n, (j + 1) % n
        ra, rp = 2 * j, 2 * j + 1
        J[ra, 2 * prev] += bs
        J[ra, 2 * j] += -1.0
        J[ra, 2 * nxt] += -bs
        J[ra, 2 * prev + 1] += sign * bc
        J[ra, 2 * nxt + 1] += -sign * bc
        J[rp, 2 * prev] += -sign * bc
        J[rp, 2 * j] += 4.0 * alpha
        J[rp, 2 * nxt] += sign * bc
        J[rp, 2 * prev + 1] += bs
        J[rp, 2 * nxt + 1] += -bs
    return J


def jacobian_numeric(
    params: RingParams, psi: float, theta: float = 0.0, step: float = 1e-5
) -> NDArray[np.float64]:
    """Central-difference Jacobian of :func:`rhs_polar` at the decoupled state."""
    x0 = decoupled_state(params, DecoupledPoint(theta, psi)).data
    n2 = x0.size
    J = np.empty((n2, n2))
    for i in range(n2):
        e = np.zeros(n2)
        e[i] = step
        J[:, i] = (rhs_polar(params, x0 + e) - rhs_polar(params, x0 - e)) / (2.0 * step)
    return J


# -- 4x4 symmetry blocks --------------------------------------------------------

@dataclass(frozen=True)
class SpectralBlock:
    k: int
    matrix: NDArray[np.complex128]
    psi: float


def _check_k(n: int, k: int) -> None:
    if not 0 <= k < n // 2:
        raise WavenumberOutOfRange(f"k must lie in [0, {n // 2}), got {k}")


def block_parts(n: int, alpha: ArrayLike, beta: float, k: ArrayLike):
    """Split the block as ``D = base + sin(psi) * s_part + cos(psi) * c_part``.

    ``alpha`` and ``k`` broadcast against each other; the three arrays have
    shape ``broadcast(alpha, k) + (4, 4)``.
    """
    alpha = np.asarray(alpha, dtype=float)
    k = np.asarray(k)
    zk = np.exp(4j * math.pi * k / n)
    u = beta * (1.0 - np.conj(zk))  # beta (1 - zeta^-k)
    v = beta * (1.0 - zk)
    shape = np.broadcast_shapes(alpha.shape, k.shape)
    base = np.zeros(shape + (4, 4), dtype=complex)
    s_part = np.zeros(shape + (4, 4), dtype=complex)
    c_part = np.zeros(shape + (4, 4), dtype=complex)
    base[..., 0, 0] = base[..., 1, 1] = -0.5
    base[..., 2, 0] = base[..., 3, 1] = 2.0 * alpha
    s_part[..., 0, 1] = -0.5 * u
    s_part[..., 1, 0] = 0.5 * v
    s_part[..., 2, 3] = -0.5 * u
    s_part[..., 3, 2] = 0.5 * v
    c_part[..., 0, 3] = 0.5 * u
    c_part[..., 1, 2] = 0.5 * v
    c_part[..., 2, 1] = -0.5 * u
    c_part[..., 3, 0] = -0.5 * v
    return base, s_part, c_part


def block_dk(params: RingParams, psi: float, k: int) -> SpectralBlock:
    """The 4x4 block for wavenumber ``k`` (see module docstring for scale)."""
    _check_k(params.n, k)
    base, s_part, c_part = block_parts(params.n, params.duffing, params.coupling, k)
    return SpectralBlock(k, base + math.sin(psi) * s_part + math.cos(psi) * c_part, psi)


def projected_block(params: RingParams, psi: float, k: int) -> NDArray[np.complex128]:
    """``V^H J V``: the full Jacobian restricted to the k-th isotypic component."""
    return symmetry_basis(params.n, k).project(jacobian_analytic(params, psi))


# -- spectra ----------------------------------------------------------------

def sort_eigenvalues(values: ArrayLike) -> NDArray[np.complex128]:
    """Descending real part, ties broken by descending imaginary part."""
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((-values.imag, -values.real), axis=-1)
    return np.take_along_axis(values, order, axis=-1)


def quartic_roots(n: int, alpha: ArrayLike, beta: ArrayLike, psi: ArrayLike, k: ArrayLike) -> NDArray[np.complex128]:
    """Broadcasting closed-form block eigenvalues; trailing axis holds the four roots.

    ``lambda = -1/4 +- 1/4 sqrt(1 - 8 b^2 x +- 4 b sqrt(2 (16 a^2 cos^2 psi - sin^2 psi) x))``
    with ``x = 1 - cos(4 pi k / N)``; principal square roots, both signs taken.
    """
    alpha, beta, psi, k = (np.asarray(v, dtype=float) for v in (alpha, beta, psi, k))
    x = 1.0 - np.cos(4.0 * math.pi * k / n)
    inner = np.sqrt((2.0 * (16.0 * alpha**2 * np.cos(psi) ** 2 - np.sin(psi) ** 2) * x).astype(complex))
    roots = []
    for s_in in (1.0, -1.0):
        outer = np.sqrt(1.0 - 8.0 * beta**2 * x + s_in * 4.0 * beta * inner)
        for s_out in (1.0, -1.0):
            roots.append(-0.25 + s_out * 0.25 * outer)
    return sort_eigenvalues(np.stack(np.broadcast_arrays(*roots), axis=-1))


def eigenvalues_closed_form(params: RingParams, psi: float, k: int) -> NDArray[np.complex128]:
    """Roots of the block characteristic quartic, both sign choices enumerated."""
    _check_k(params.n, k)
    return quartic_roots(params.n, params.duffing, params.coupling, psi, k)


def eigenvalues_numeric(block: SpectralBlock | ArrayLike) -> NDArray[np.complex128]:
    """Dense eigensolve with a residual check ``||D v - lambda v|| < 1e-9``."""
    D = block.matrix if isinstance(block, SpectralBlock) else np.asarray(block, dtype=complex)
    if not np.all(np.isfinite(D)):
        raise ValueError("block has non-finite entries")
    try:
        w, vecs = np.linalg.eig(D)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    resid = np.linalg.norm(D @ vecs - vecs * w[..., None, :], axis=-2)
    scale = max(1.0, float(np.max(np.abs(D))))
    if np.any(resid > EIG_RESIDUAL_TOL * scale):
        raise ConvergenceError(f"eigenpair residual {resid.max():.3g} above tolerance")
    return sort_eigenvalues(w)


def multiset_distance(a: ArrayLike, b: ArrayLike) -> float:
    """Largest pairwise gap under the best one-to-one matching of two multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError("multisets differ in size")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if a.size else 0.0


@dataclass(frozen=True)
class StabilityVerdict:
    """Per-block eigenvalues (or Floquet exponents) and the worst transverse rate.

    ``max_transverse`` excludes k=0, whose neutral pair spans the torus of
    decoupled states; that pair is exposed as ``neutral_pair``.
    """

    per_block: tuple[tuple[int, NDArray], ...]
    max_transverse: float
    kind: str = "eigenvalues"

    def block(self, k: int) -> NDArray:
        return dict(self.per_block)[k]

    @property
    def neutral_pair(self) -> NDArray:
        values = self.block(0)
        return values[:2]

    def argmax_blocks(self, tol: float = 1e-9) -> list[int]:
        return [
            k for k, v in self.per_block
            if k != 0 and abs(float(np.max(np.real(v))) - self.max_transverse) <= tol
        ]


def _max_transverse(per_block) -> float:
    rates = [float(np.max(np.real(v))) for k, v in per_block if k != 0]
    return max(rates) if rates else -math.inf


def spectrum_uniform(params: RingParams, psi: float, method: str = "closed_form") -> StabilityVerdict:
    """All N/2 block spectra for uniform natural frequencies."""
    if params.detuning != 0.0:
        raise DetunedSystem("static eigenvalues only decide stability when detuning == 0")
    ks = range(params.n // 2)
    if method == "closed_form":
        values = quartic_roots(params.n, params.duffing, params.coupling, psi, np.arange(params.n // 2))
        per_block = tuple((k, values[k]) for k in ks)
    elif method == "numeric":
        base, s_part, c_part = block_parts(params.n, params.duffing, params.coupling, np.arange(params.n // 2))
        values = eigenvalues_numeric(base + math.sin(psi) * s_part + math.cos(psi) * c_part)
        per_block = tuple((k, values[k]) for k in ks)
    else:
        raise ValueError(f"unknown method {method!r}")
    return StabilityVerdict(per_block, _max_transverse(per_block))


def max_transverse_uniform(n: int, beta: float, alphas: ArrayLike, psis: ArrayLike) -> NDArray[np.float64]:
    """Largest k != 0 real part from the closed form, broadcasting over alphas and psis."""
    alphas = np.asarray(alphas, dtype=float)[..., None]
    psis = np.asarray(psis, dtype=float)[..., None]
    ks = np.arange(1, n // 2)
    return quartic_roots(n, alphas, beta, psis, ks).real.max(axis=(-1, -2))


# -- Floquet analysis ---------------------------------------------------------

@lru_cache(maxsize=None)
def _compound_table(n: int, m: int) -> NDArray[np.float64]:
    """Linear map from an n x n matrix to its m-th additive compound."""
    combos = list(itertools.combinations(range(n), m))
    index = {c: r for r, c in enumerate(combos)}
    table = np.zeros((len(combos), len(combos), n, n))
    for col, J in enumerate(combos):
        for pos, j in enumerate(J):
            for i in range(n):
                if i != j and i in J:
                    continue
                new = list(J)
                new[pos] = i
                inversions = sum(1 for p, q in itertools.combinations(new, 2) if p > q)
                table[index[tuple(sorted(new))], col, i, j] += -1.0 if inversions % 2 else 1.0
    return table


def additive_compound(a: ArrayLike, m: int) -> NDArray:
    """m-th additive compound: the generator of ``dV/dt = A V`` on m-vectors.

    Its eigenvalues are the sums of m distinct eigenvalues of ``a``.
    """
    a = np.asarray(a)
    n = a.shape[-1]
    if not 1 <= m <= n:
        raise ValueError(f"compound order must lie in [1, {n}]")
    if m == 1:
        return a
    return np.einsum("...ij,rcij->...rc", a, _compound_table(n, m))


def floquet_exponents(
    block_fn: Callable[[NDArray | float], NDArray],
    period: float | ArrayLike,
    n_steps: int = DEFAULT_FLOQUET_STEPS,
) -> NDArray[np.float64]:
    """Floquet exponents ``ln|mu| / T`` of ``dV/dt = D(t) V``, descending.

    The monodromy eigenvalues can span many decades over long periods, which
    ruins the small ones when taken from a single float64 matrix.  Instead the
    flow of each exterior power is integrated separately: the dominant
    eigenvalue of the m-th one is the product of the m largest multipliers,
    and consecutive differences of their logarithms give every exponent to
    full accuracy.

    Each flow is integrated with the mean eigenvalue ``tr D(t) / d`` removed
    and its integral (Simpson's rule on the RK4 nodes) added back, which is
    exact and keeps the RK4 truncation error set by the eigenvalue spread
    rather than the absolute rates.
    """
    period = np.asarray(period, dtype=float)
    d = np.asarray(block_fn(0.0 * period)).shape[-1]
    eye = np.eye(d)

    def mean_rate(t):
        return np.trace(np.asarray(block_fn(t)), axis1=-2, axis2=-1).real / d

    def centred(t):
        D = np.asarray(block_fn(t))
        return D - (np.trace(D, axis1=-2, axis2=-1) / d)[..., None, None] * eye

    h = period / n_steps
    shift = np.zeros(period.shape)
    for i in range(n_steps):
        shift += (h / 6.0) * (mean_rate(i * h) + 4.0 * mean_rate((i + 0.5) * h) + mean_rate((i + 1) * h))

    log_tops = [np.zeros(period.shape)]
    for m in range(1, d + 1):
        M = monodromy(lambda t, m=m: additive_compound(centred(t), m), period, n_steps)
        log_tops.append(np.log(np.max(np.abs(np.linalg.eigvals(M)), axis=-1)) + m * shift)
    exps = np.stack([(log_tops[m] - log_tops[m - 1]) / period for m in range(1, d + 1)], axis=-1)
    return -np.sort(-exps, axis=-1)


def _period(params: RingParams) -> float:
    if params.detuning == 0.0:
        raise ZeroDetuning("Floquet analysis needs a nonzero detuning")
    return TWO_PI / abs(params.detuning)


def floquet_block(
    params: RingParams, k: int, psi0: float = 0.0, n_steps: int = DEFAULT_FLOQUET_STEPS
) -> NDArray[np.float64]:
    """Floquet exponents of block k while psi drifts as ``psi0 + detuning * t``."""
    _check_k(params.n, k)
    period = _period(params)
    base, s_part, c_part = block_parts(params.n, params.duffing, params.coupling, k)
    omega = params.detuning

    def D(t):
        psi = psi0 + omega * np.asarray(t)[..., None, None]
        return base + np.sin(psi) * s_part + np.cos(psi) * c_part

    return floquet_exponents(D, period, n_steps)


def spectrum_alternating(
    params: RingParams, n_steps: int = DEFAULT_FLOQUET_STEPS, psi0: float = 0.0
) -> StabilityVerdict:
    """Floquet exponents of all N/2 blocks for alternating frequencies."""
    period = _period(params)
    ks = np.arange(params.n // 2)
    base, s_part, c_part = block_parts(params.n, params.duffing, params.coupling, ks)
    omega = params.detuning

    def D(t):
        psi = psi0 + omega * np.asarray(t)[..., None, None]
        return base + np.sin(psi) * s_part + np.cos(psi) * c_part

    exps = floquet_exponents(D, np.full(ks.shape, period), n_steps)
    per_block = tuple((int(k), exps[k]) for k in ks)
    return StabilityVerdict(per_block, _max_transverse(per_block), kind="floquet")


def full_floquet_exponents(
    params: RingParams, psi0: float = 0.0, n_steps: int = DEFAULT_FLOQUET_STEPS
) -> NDArray[np.float64]:
    """Oracle: exponents of the dense 2N x 2N monodromy of ``RATE_SCALE * J``.

    Uses a single monodromy matrix, so it is only trustworthy while
    ``exp(T * spread)`` of the exponents stays well inside float64 range.
    """
    period = _period(params)
    omega = params.detuning
    n = params.n
    alpha, beta = params.duffing, params.coupling
    # J(psi) = fixed + sin(psi) * js + cos(psi) * jc exactly, since J is affine in (sin, cos)
    fixed = jacobian_analytic(RingParams(n, alpha, 0.0), 0.0)
    js = (jacobian_analytic(RingParams(n, alpha, beta), math.pi / 2) - fixed)
    jc = (jacobian_analytic(RingParams(n, alpha, beta), 0.0) - fixed)

    def D(t):
        psi = psi0 + omega * t
        return RATE_SCALE * (fixed + math.sin(psi) * js + math.cos(psi) * jc)

    M = monodromy(D, period, n_steps)
    mu = np.linalg.eigvals(M)
    return np.sort(np.log(np.abs(mu)) / period)[::-1]


def max_transverse_floquet(
    n: int,
    beta: float,
    alphas: ArrayLike,
    detunings: ArrayLike,
    n_steps: int = DEFAULT_FLOQUET_STEPS,
    psi0: float = 0.0,
) -> NDArray[np.float64]:
    """Largest k != 0 Floquet exponent for each (alpha, detuning) cell.

    ``alphas`` and ``detunings`` are 1-D arrays of equal length; all cells and
    blocks are integrated together as one batch.  Only the dominant multiplier
    is needed here, which a single monodromy resolves accurately.
    """
    alphas = np.asarray(alphas, dtype=float).ravel()
    detunings = np.asarray(detunings, dtype=float).ravel()
    if alphas.shape != detunings.shape:
        raise ValueError("alphas and detunings must have equal length")
    if np.any(detunings == 0.0):
        raise ZeroDetuning("Floquet sweep grid contains a zero detuning")
    RingParams(n)  # validates ring size
    ks = np.arange(1, n // 2)
    base, s_part, c_part = block_parts(n, alphas[:, None], beta, ks[None, :])
    periods = np.broadcast_to((TWO_PI / np.abs(detunings))[:, None], base.shape[:-2])
    rate = detunings[:, None, None, None]

    def D(t):
        psi = psi0 + rate * np.asarray(t)[..., None, None]
        return base + np.sin(psi) * s_part + np.cos(psi) * c_part

    M = monodromy(D, periods, n_steps)
    top = np.log(np.max(np.abs(np.linalg.eigvals(M)), axis=-1)) / periods
    return top.max(axis=-1)


# -- phase-only comparison ----------------------------------------------------

class PhaseVerdict(str, enum.Enum):
    NEUTRAL = "NEUTRAL"
    NOT_ASYMPTOTICALLY_STABLE = "NOT_ASYMPTOTICALLY_STABLE"
    STABLE = "STABLE"


@dataclass(frozen=True)
class PhaseOnlyModel:
    """Phase-only ring ``dphi_j/dt = w_j + beta [g(phi_{j-1}-phi_j) + g(phi_{j+1}-phi_j)]``.

    ``derivative`` defaults to a complex-step derivative of ``coupling``,
    which is exact to rounding for analytic numpy-compatible functions.
    """

    coupling: Callable[[ArrayLike], ArrayLike]
    derivative: Callable[[ArrayLike], ArrayLike] | None = None

    def dg(self, x: ArrayLike) -> NDArray[np.float64]:
        if self.derivative is not None:
            return np.asarray(self.derivative(x), dtype=float)
        h = 1e-20
        return np.imag(self.coupling(np.asarray(x, dtype=float) + 1j * h)) / h

    def parity_residual(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.coupling(x), dtype=float) + np.asarray(self.coupling(math.pi - x), dtype=float)

    @classmethod
    def cosine(cls) -> "PhaseOnlyModel":
        return cls(np.cos, lambda x: -np.sin(x))

    @classmethod
    def sine(cls) -> "PhaseOnlyModel":
        return cls(np.sin, np.cos)


def phase_only_jacobian(model: PhaseOnlyModel, n: int, psi: float, beta: float = 1.0) -> NDArray[np.float64]:
    phases = decoupled_state(n, DecoupledPoint(0.0, psi)).phases
    d_prev = np.roll(phases, 1) - phases
    d_next = np.roll(phases, -1) - phases
    g_prev = beta * model.dg(d_prev)
    g_next = beta * model.dg(d_next)
    J = np.diag(-(g_prev + g_next))
    idx = np.arange(n)
    J[idx, (idx - 1) % n] += g_prev
    J[idx, (idx + 1) % n] += g_next
    return J


def phase_only_check(
    model: PhaseOnlyModel,
    n: int,
    psi: float,
    beta: float = 1.0,
    tol: float = 1e-10,
) -> tuple[float, PhaseVerdict]:
    """Trace and stability verdict of the phase-only Jacobian at the decoupled pattern."""
    grid = np.linspace(0.0, TWO_PI, 100, endpoint=False)
    parity = float(np.max(np.abs(model.parity_residual(grid))))
    if parity > 1e-12:
        raise InadmissibleCoupling(f"g(x) + g(pi - x) reaches {parity:.3g} on the test grid")
    J = phase_only_jacobian(model, n, psi, beta)
    re = np.linalg.eigvals(J).real
    if np.all(np.abs(re) <= tol):
        verdict = PhaseVerdict.NEUTRAL
    elif np.any(re > tol):
        verdict = PhaseVerdict.NOT_ASYMPTOTICALLY_STABLE
    else:
        verdict = PhaseVerdict.STABLE
    return float(np.trace(J)), verdict


def transverse_rates(verdict: StabilityVerdict) -> dict[int, float]:
    return {k: float(np.max(np.real(v))) for k, v in verdict.per_block if k != 0}


__all__: Sequence[str] = [
    "RATE_SCALE",
    "PhaseOnlyModel",
    "PhaseVerdict",
    "SpectralBlock",
    "StabilityVerdict",
    "additive_compound",
    "block_dk",
    "block_parts",
    "eigenvalues_closed_form",
    "eigenvalues_numeric",
    "floquet_block",
    "floquet_exponents",
    "full_floquet_exponents",
    "jacobian_analytic",
    "jacobian_numeric",
    "max_transverse_floquet",
    "max_transverse_uniform",
    "quartic_roots",
    "multiset_distance",
    "phase_only_check",
    "phase_only_jacobian",
    "projected_block",
    "sort_eigenvalues",
    "spectrum_alternating",
    "spectrum_uniform",
]

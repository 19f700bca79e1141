"""Self-check suite run by ``decoupled-ring verify``.

Every check compares two independent routes to the same quantity and
reports the residual against a fixed tolerance.  The block constructor is
injectable so that a deliberately corrupted block can be fed through the
suite (mutation testing); at least the closed-form/numeric comparison must
then fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InadmissibleCoupling
from .integrate import integrate_orbit, rk4_step
from .model import RingParams, RingState, polar_from_complex_rate, rhs_complex, rhs_polar, to_polar
from .stability import (
    RATE_SCALE,
    PhaseOnlyModel,
    SpectralBlock,
    block_dk,
    eigenvalues_numeric,
    floquet_block,
    floquet_exponents,
    full_floquet_exponents,
    jacobian_analytic,
    jacobian_numeric,
    multiset_distance,
    phase_only_check,
    quartic_roots,
    spectrum_alternating,
)
from .symmetry import (
    DECOUPLED_GENERATOR,
    IDENTITY,
    REFLECTION,
    ROTATION,
    DecoupledPoint,
    check_equivariance,
    coupling_residual,
    decoupled_state,
    full_basis,
    group_elements,
    phase_shift,
    random_states,
    symmetry_basis,
)

BlockFn = Callable[[RingParams, float, int], SpectralBlock]


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name} {self.residual:.3e} {self.tolerance:.1e} {status}"


def _random_params(rng: np.random.Generator, n: int, detuning: float = 0.0) -> RingParams:
    return RingParams(n, rng.uniform(0.0, 1.0), rng.uniform(0.2, 2.0), rng.uniform(-2.0, 2.0), detuning)


def _check_chain_rule(rng):
    worst = 0.0
    for n in (4, 8, 12):
        params = _random_params(rng, n, rng.uniform(-1.0, 1.0))
        for s in random_states(params, 5, rng):
            dA = rhs_complex(params, s)
            worst = max(worst, float(np.max(np.abs(polar_from_complex_rate(s, dA) - rhs_polar(params, to_polar(s))))))
    return worst


def _check_equivariance(rng):
    params = _random_params(rng, 8)
    samples = random_states(params, 5, rng)
    ops = [ROTATION, REFLECTION, phase_shift(rng.uniform(0, 2 * math.pi)), DECOUPLED_GENERATOR]
    return max(check_equivariance(op, params, samples, coords) for op in ops for coords in ("polar", "complex"))


def _check_detuned_equivariance(rng):
    # alternating frequencies break the single-step rotation but keep sigma_rot^2
    params = _random_params(rng, 8, rng.uniform(0.1, 1.0))
    samples = random_states(params, 5, rng)
    return max(check_equivariance(op, params, samples) for op in (ROTATION**2, DECOUPLED_GENERATOR))


def _check_invariance(rng):
    params = _random_params(rng, 8, 0.2)
    x0 = decoupled_state(params, DecoupledPoint(rng.uniform(0, 6), rng.uniform(0, 6)))
    worst = 0.0

    def watch(_step, _t, x):
        nonlocal worst
        state = RingState(x, "polar")
        worst = max(worst, coupling_residual(params, state), float(np.max(np.abs(x[0::2] - 1.0))))

    integrate_orbit(params, x0, 0.01, 2000, stride=50, observer=watch)
    return worst


def _check_closure(_rng):
    n = 12
    elems = group_elements(n)
    keys = {(g.rotation % n, g.reflect, round(g.phase, 12) % round(2 * math.pi, 12)) for g in elems}
    worst = 0.0 if len(keys) == n // 2 else 1.0
    top = DECOUPLED_GENERATOR ** (n // 2)
    worst = max(worst, float(np.max(np.abs(top.tangent_matrix(n) - IDENTITY.tangent_matrix(n)))))
    worst = max(worst, min(abs(top.phase), abs(top.phase - 2 * math.pi)))
    for a in elems:
        for b in elems:
            P = (a @ b).tangent_matrix(n)
            worst = max(worst, float(np.max(np.abs(P - a.tangent_matrix(n) @ b.tangent_matrix(n)))))
    return worst


def _check_basis(_rng):
    worst = 0.0
    for n in (8, 16):
        U = full_basis(n)
        worst = max(worst, float(np.max(np.abs(U.conj().T @ U - np.eye(2 * n)))))
        worst = max(worst, abs(np.linalg.matrix_rank(U) - 2 * n))
        P = DECOUPLED_GENERATOR.tangent_matrix(n)
        for k in range(n // 2):
            b = symmetry_basis(n, k)
            worst = max(worst, float(np.max(np.abs(P @ b.columns - b.zeta * b.columns))))
    return worst


def _check_fd_jacobian(rng):
    worst = 0.0
    for n in (8, 16):
        params = _random_params(rng, n)
        psi = rng.uniform(0, 2 * math.pi)
        J = jacobian_analytic(params, psi)
        worst = max(worst, float(np.max(np.abs(J - jacobian_numeric(params, psi, rng.uniform(0, 6))))))
    return worst


def _check_commutation(rng):
    params = _random_params(rng, 12)
    J = jacobian_analytic(params, rng.uniform(0, 2 * math.pi))
    P = DECOUPLED_GENERATOR.tangent_matrix(params.n)
    return float(np.max(np.abs(P @ J - J @ P)))


def _check_block_diagonal(rng):
    worst = 0.0
    for n in (8, 16):
        params = _random_params(rng, n)
        U = full_basis(n)
        B = U.conj().T @ jacobian_analytic(params, rng.uniform(0, 2 * math.pi)) @ U
        mask = np.kron(np.eye(n // 2), np.ones((4, 4))) == 0
        worst = max(worst, float(np.max(np.abs(B[mask]))))
    return worst


def _check_projection(rng, block_fn):
    worst = 0.0
    for n in (8, 12):
        params = _random_params(rng, n)
        psi = rng.uniform(0, 2 * math.pi)
        J = jacobian_analytic(params, math.pi - psi)
        for k in range(n // 2):
            projected = RATE_SCALE * symmetry_basis(n, k).project(J)
            worst = max(worst, float(np.max(np.abs(block_fn(params, psi, k).matrix - projected))))
    return worst


def _check_closed_form(rng, block_fn, n_draws=200):
    worst = 0.0
    for _ in range(n_draws):
        n = int(rng.choice([8, 12, 16]))
        params = _random_params(rng, n)
        psi = rng.uniform(0, 2 * math.pi)
        k = int(rng.integers(0, n // 2))
        numeric = eigenvalues_numeric(block_fn(params, psi, k))
        closed = quartic_roots(n, params.duffing, params.coupling, psi, k)
        worst = max(worst, multiset_distance(numeric, closed))
    return worst


def _check_k0(rng, block_fn):
    target = np.array([0, 0, -0.5, -0.5])
    worst = 0.0
    for _ in range(20):
        params = _random_params(rng, 8)
        values = eigenvalues_numeric(block_fn(params, rng.uniform(0, 2 * math.pi), 0))
        worst = max(worst, multiset_distance(values, target))
    return worst


def _check_reflection(rng, block_fn):
    worst = 0.0
    for _ in range(40):
        params = _random_params(rng, 12)
        values = eigenvalues_numeric(block_fn(params, rng.uniform(0, 2 * math.pi), int(rng.integers(0, 6))))
        worst = max(worst, multiset_distance(values, -0.5 - values))
    return worst


def _check_psi_equivalence(rng):
    worst = 0.0
    for _ in range(40):
        n = 16
        alpha, beta, psi = rng.uniform(0, 1), rng.uniform(0.2, 2), rng.uniform(0, 2 * math.pi)
        ks = np.arange(n // 2)
        psis = np.array([psi, math.pi - psi, math.pi + psi, 2 * math.pi - psi])[:, None]
        re = np.sort(quartic_roots(n, alpha, beta, psis, ks).real, axis=-1)
        worst = max(worst, float(np.max(np.abs(re - re[0]))))
    return worst


def _check_conjugate_pairs(rng, block_fn):
    worst = 0.0
    n = 16
    for _ in range(10):
        params = _random_params(rng, n)
        psi = rng.uniform(0, 2 * math.pi)
        for k in range(1, n // 2):
            a = eigenvalues_numeric(block_fn(params, psi, k))
            b = eigenvalues_numeric(block_fn(params, psi, n // 2 - k))
            worst = max(worst, multiset_distance(a, np.conj(b)))
    return worst


def _check_rk4_order(_rng):
    def f(t, x):
        return np.array([x[1], -x[0]]) + math.cos(t)

    def endpoint(steps):
        x = np.array([1.0, 0.0])
        h = 2.0 / steps
        for i in range(steps):
            x = rk4_step(f, x, i * h, h)
        return x

    ref = endpoint(4096)
    e1 = np.linalg.norm(endpoint(20) - ref)
    e2 = np.linalg.norm(endpoint(40) - ref)
    return abs(math.log2(e1 / e2) - 4.0)


def _check_floquet_constant(rng, block_fn):
    worst = 0.0
    for _ in range(5):
        params = _random_params(rng, 8)
        D = block_fn(params, rng.uniform(0, 2 * math.pi), int(rng.integers(0, 4))).matrix
        exps = floquet_exponents(lambda t: D, 2 * math.pi, 1000)
        re = np.sort(eigenvalues_numeric(D).real)[::-1]
        worst = max(worst, float(np.max(np.abs(exps - re))))
    return worst


def _check_floquet_k0(rng):
    worst = 0.0
    for omega in (2.0**-4, 0.3, 2.0):
        params = RingParams(8, rng.uniform(0, 1), 1.0, 2.0, omega)
        exps = floquet_block(params, 0, rng.uniform(0, 2 * math.pi))
        worst = max(worst, float(np.max(np.abs(exps - np.array([0, 0, -0.5, -0.5])))))
    return worst


def _check_floquet_full(_rng):
    params = RingParams(8, 0.5, 1.0, 2.0, 0.2)
    verdict = spectrum_alternating(params)
    union = np.sort(np.concatenate([v for _, v in verdict.per_block]))
    full = np.sort(full_floquet_exponents(params))
    return float(np.max(np.abs(union - full)))


def _check_floquet_psi0(rng):
    params = RingParams(8, 0.5, 1.0, 2.0, 0.5)
    ref = spectrum_alternating(params, psi0=0.0)
    other = spectrum_alternating(params, psi0=rng.uniform(0, 2 * math.pi))
    return max(float(np.max(np.abs(a - b))) for (_, a), (_, b) in zip(ref.per_block, other.per_block))


def _check_phase_only(_rng):
    worst = 0.0
    for psi in np.linspace(0, 2 * math.pi, 100, endpoint=False):
        trace, _ = phase_only_check(PhaseOnlyModel.cosine(), 8, psi)
        worst = max(worst, abs(trace))
    try:
        phase_only_check(PhaseOnlyModel.sine(), 8, 0.0)
    except InadmissibleCoupling:
        pass
    else:
        worst = max(worst, 1.0)
    return worst


def _check_scalability(rng, block_fn):
    n = 256
    params = _random_params(rng, n)
    psi = rng.uniform(0, 2 * math.pi)
    closed = quartic_roots(n, params.duffing, params.coupling, psi, np.arange(n // 2))
    worst = 0.0
    for k in range(n // 2):
        worst = max(worst, multiset_distance(eigenvalues_numeric(block_fn(params, psi, k)), closed[k]))
    return worst


def run_checks(block_fn: BlockFn = block_dk, seed: int = 0) -> list[CheckResult]:
    """Run the whole suite; ``block_fn(params, psi, k)`` supplies the 4x4 blocks."""
    rng = np.random.default_rng(seed)
    plan = [
        ("chain_rule_polar_vs_complex", lambda: _check_chain_rule(rng), 1e-12),
        ("equivariance_dihedral_phase", lambda: _check_equivariance(rng), 1e-12),
        ("equivariance_detuned_rot2", lambda: _check_detuned_equivariance(rng), 1e-12),
        ("decoupled_set_invariant", lambda: _check_invariance(rng), 1e-8),
        ("group_closure", lambda: _check_closure(rng), 1e-12),
        ("basis_orthonormal_eigvec_rank", lambda: _check_basis(rng), 1e-12),
        ("jacobian_vs_finite_difference", lambda: _check_fd_jacobian(rng), 1e-6),
        ("jacobian_commutes_with_generator", lambda: _check_commutation(rng), 1e-12),
        ("block_diagonalization", lambda: _check_block_diagonal(rng), 1e-12),
        ("block_vs_projected_jacobian", lambda: _check_projection(rng, block_fn), 1e-12),
        ("closed_form_vs_numeric", lambda: _check_closed_form(rng, block_fn), 1e-9),
        ("k0_spectrum", lambda: _check_k0(rng, block_fn), 1e-12),
        ("spectrum_reflection_about_minus_quarter", lambda: _check_reflection(rng, block_fn), 1e-9),
        ("psi_equivalence_real_parts", lambda: _check_psi_equivalence(rng), 1e-12),
        ("conjugate_wavenumber_pairs", lambda: _check_conjugate_pairs(rng, block_fn), 1e-9),
        ("rk4_fourth_order", lambda: _check_rk4_order(rng), 0.2),
        ("floquet_constant_block", lambda: _check_floquet_constant(rng, block_fn), 1e-6),
        ("floquet_k0", lambda: _check_floquet_k0(rng), 1e-6),
        ("floquet_blocks_vs_full_monodromy", lambda: _check_floquet_full(rng), 1e-5),
        ("floquet_psi0_invariance", lambda: _check_floquet_psi0(rng), 1e-6),
        ("phase_only_zero_trace", lambda: _check_phase_only(rng), 1e-12),
        ("scalability_n256_blocks", lambda: _check_scalability(rng, block_fn), 1e-9),
    ]
    results = []
    for name, fn, tol in plan:
        try:
            residual = float(fn())
        except Exception:  # a crashing check is a failing check
            residual = math.inf
        if math.isnan(residual):
            residual = math.inf
        results.append(CheckResult(name, residual, tol))
    return results


def render_report(results: list[CheckResult]) -> str:
    lines = ["# name residual tolerance status"]
    lines.extend(r.line() for r in results)
    return "\n".join(lines) + "\n"

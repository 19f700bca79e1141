from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decoupled_ring.errors import (
    DetunedSystem,
    InadmissibleCoupling,
    WavenumberOutOfRange,
    ZeroDetuning,
)
from decoupled_ring.model import RingParams
from decoupled_ring.stability import (
    RATE_SCALE,
    PhaseOnlyModel,
    PhaseVerdict,
    additive_compound,
    block_dk,
    eigenvalues_closed_form,
    eigenvalues_numeric,
    floquet_block,
    floquet_exponents,
    jacobian_analytic,
    jacobian_numeric,
    max_transverse_floquet,
    max_transverse_uniform,
    multiset_distance,
    phase_only_check,
    projected_block,
    sort_eigenvalues,
    spectrum_alternating,
    spectrum_uniform,
)

params_strategy = st.builds(
    RingParams,
    st.sampled_from([4, 8, 12, 16, 24]),
    st.floats(-1.5, 1.5),
    st.floats(0.05, 2.5),
    st.floats(-3, 3),
)


def test_jacobian_matches_finite_differences():
    for n in (8, 12):
        p = RingParams(n, 0.37, 1.2, 2.0)
        for psi in (0.0, 0.4, 2.5):
            assert np.max(np.abs(jacobian_analytic(p, psi) - jacobian_numeric(p, psi, 0.8))) < 1e-6


def test_jacobian_trace_is_minus_n():
    p = RingParams(16, 0.5, 1.0)
    assert np.trace(jacobian_analytic(p, 1.1)) == pytest.approx(-16.0)


@settings(max_examples=50, deadline=None)
@given(p=params_strategy, psi=st.floats(0, 2 * math.pi))
def test_block_equals_scaled_projection(p, psi):
    for k in range(p.n // 2):
        expected = RATE_SCALE * projected_block(p, math.pi - psi, k)
        assert np.max(np.abs(block_dk(p, psi, k).matrix - expected)) < 1e-12


@settings(max_examples=80, deadline=None)
@given(p=params_strategy, psi=st.floats(0, 2 * math.pi), data=st.data())
def test_closed_form_matches_numeric(p, psi, data):
    k = data.draw(st.integers(0, p.n // 2 - 1))
    assert multiset_distance(eigenvalues_closed_form(p, psi, k), eigenvalues_numeric(block_dk(p, psi, k))) < 1e-9


@settings(max_examples=50, deadline=None)
@given(p=params_strategy, psi=st.floats(0, 2 * math.pi), data=st.data())
def test_reflection_about_minus_quarter(p, psi, data):
    k = data.draw(st.integers(0, p.n // 2 - 1))
    lam = eigenvalues_closed_form(p, psi, k)
    assert multiset_distance(lam, -0.5 - lam) < 1e-9


def test_k0_block_spectrum():
    for alpha in (0.0, 0.3, 1.4):
        lam = eigenvalues_closed_form(RingParams(8, alpha, 0.9), 1.3, 0)
        assert np.allclose(lam, [0, 0, -0.5, -0.5], atol=1e-12)


def test_uniform_landmarks():
    v = spectrum_uniform(RingParams(8, 0.5, 1.0), 0.0)
    assert v.max_transverse == pytest.approx(0.26923672942748134, abs=1e-12)
    assert v.argmax_blocks() == [1, 3]
    assert np.allclose(v.neutral_pair, 0.0)
    assert spectrum_uniform(RingParams(8, 0.25, 1.0), 0.0).max_transverse == pytest.approx(-0.25, abs=1e-12)
    assert abs(spectrum_uniform(RingParams(8, 0.25, 1.0), math.pi / 2).max_transverse) < 1e-12


def test_spectrum_methods_agree():
    p = RingParams(12, 0.41, 0.8)
    a = spectrum_uniform(p, 0.77)
    b = spectrum_uniform(p, 0.77, method="numeric")
    for (_, x), (_, y) in zip(a.per_block, b.per_block):
        assert multiset_distance(x, y) < 1e-10
    with pytest.raises(ValueError):
        spectrum_uniform(p, 0.0, method="magic")


def test_static_spectrum_refuses_detuning():
    with pytest.raises(DetunedSystem):
        spectrum_uniform(RingParams(8, detuning=0.1), 0.0)


def test_floquet_refuses_zero_detuning():
    with pytest.raises(ZeroDetuning):
        floquet_block(RingParams(8), 1)
    with pytest.raises(ZeroDetuning):
        max_transverse_floquet(8, 1.0, [0.2], [0.0])


def test_wavenumber_checked():
    with pytest.raises(WavenumberOutOfRange):
        block_dk(RingParams(8), 0.0, 4)


def test_max_transverse_uniform_broadcast():
    alphas = np.array([0.25, 0.5])
    psis = np.array([0.0, np.pi / 2])
    grid = max_transverse_uniform(8, 1.0, alphas[:, None], psis[None, :])
    assert grid.shape == (2, 2)
    assert grid[0, 0] == pytest.approx(-0.25)
    assert grid[1, 0] == pytest.approx(0.26923672942748134)


def test_additive_compound_eigenvalues_are_sums(rng):
    a = rng.normal(size=(4, 4))
    lam = np.linalg.eigvals(a)
    for m in (1, 2, 3, 4):
        expected = [sum(c) for c in combinations(lam, m)]
        assert multiset_distance(np.linalg.eigvals(additive_compound(a, m)), expected) < 1e-10
    assert additive_compound(a, 4).shape == (1, 1)
    assert additive_compound(a, 4)[0, 0] == pytest.approx(np.trace(a))


def test_floquet_constant_block_returns_real_parts():
    D = block_dk(RingParams(8, 0.5, 1.0), 0.3, 1).matrix
    exps = floquet_exponents(lambda t: D, 5.0, 500)
    assert np.allclose(exps, np.sort(np.linalg.eigvals(D).real)[::-1], atol=1e-9)


def test_floquet_exponents_pair_to_minus_half():
    v = spectrum_alternating(RingParams(8, 0.5, 1.0, 2.0, 0.2))
    for _, exps in v.per_block:
        assert np.allclose(np.sort(exps) + np.sort(exps)[::-1], -0.5, atol=1e-7)


def test_sweep_matches_full_block_exponents():
    cells = max_transverse_floquet(8, 1.0, [0.5, 0.25], [0.2, 1.0])
    for alpha, om, value in zip([0.5, 0.25], [0.2, 1.0], cells):
        v = spectrum_alternating(RingParams(8, alpha, 1.0, 0.0, om))
        assert value == pytest.approx(v.max_transverse, abs=1e-6)


def test_sort_eigenvalues_order():
    out = sort_eigenvalues([1 - 1j, 2, 1 + 1j])
    assert list(out) == [2, 1 + 1j, 1 - 1j]


def test_non_finite_block_rejected():
    with pytest.raises(ValueError):
        eigenvalues_numeric(np.array([[np.nan, 0], [0, 1]]))


def test_phase_only_cosine_is_neutral():
    for psi in np.linspace(0, 2 * np.pi, 25):
        trace, verdict = phase_only_check(PhaseOnlyModel.cosine(), 8, psi)
        assert abs(trace) < 1e-12
        assert verdict is PhaseVerdict.NEUTRAL


def test_phase_only_default_derivative():
    model = PhaseOnlyModel(np.cos)
    assert np.allclose(model.dg(np.array([0.3, 1.2])), -np.sin([0.3, 1.2]), atol=1e-14)


def test_phase_only_rejects_sine():
    with pytest.raises(InadmissibleCoupling):
        phase_only_check(PhaseOnlyModel.sine(), 8, 0.0)


def test_phase_only_admissible_coupling_with_nonzero_trace():
    model = PhaseOnlyModel(lambda x: np.cos(x) + 0.3 * np.sin(2 * x))
    trace, _ = phase_only_check(model, 8, 0.2)
    assert trace == pytest.approx(-4 * 8 * 0.3 * math.cos(0.4), abs=1e-10)


def test_alternating_cell_at_small_detuning_is_stable():
    value = max_transverse_floquet(8, 1.0, [0.25], [0.2], 1000)[0]
    assert value <= 1e-4
    exact = spectrum_alternating(RingParams(8, 0.25, 1.0, 0.0, 0.2)).max_transverse
    assert value == pytest.approx(exact, abs=1e-8)


def test_sweep_step_refinement_converges():
    alphas = np.repeat(np.linspace(0.0, 1.0, 6), 6)
    omegas = np.tile(2.0 ** np.linspace(-4, 1, 6), 6)
    coarse = max_transverse_floquet(8, 1.0, alphas, omegas, 1000)
    fine = max_transverse_floquet(8, 1.0, alphas, omegas, 2000)
    assert np.max(np.abs(coarse - fine)) < 1e-5

# -*- coding: utf-8 -*-
import numpy as np
import pytest

from kiara_plugin.vstates.exactnum import find_b2p
from kiara_plugin.vstates.exceptions import CurveDegenerate
from kiara_plugin.vstates.linearization import kernel_state, lambda_degenerate, multiplier
from kiara_plugin.vstates.spectral import (
    FourierState,
    boundary_points,
    check_separation,
    diagonal_fill_in,
    eval_G,
    eval_cauchy,
    jacobian_action,
    render_svg,
    sample_boundary,
)


@pytest.fixture
def b4() -> float:
    return find_b2p(2).as_float()


@pytest.mark.parametrize("lam", [0.4, 0.9])
def test_annulus_is_stationary(lam, b4):

    result = eval_G(lam, FourierState.zeros(2, b4, 16), 128)
    assert result.max_abs() < 1e-12
    assert result.cosine_residual < 1e-12


@pytest.mark.parametrize("lam", [0.4, 0.9, None])
def test_jacobian_matches_multipliers(lam, b4):

    if lam is None:
        lam = lambda_degenerate(b4)
    zero = FourierState.zeros(2, b4, 16)
    for n in (1, 2, 3, 7):
        for unit in ((1.0, 0.0), (0.0, 1.0)):
            direction = zero.with_block(n, unit)
            action = jacobian_action(lam, zero, direction, 128)
            expected = multiplier(2 * n, lam, b4).apply(unit)
            assert np.allclose(action.block(n), expected, atol=1e-9)
            others = action.coefficients.copy()
            others[:, 2 * n] = 0.0
            assert np.max(np.abs(others)) < 1e-9


def test_kernel_direction_is_annihilated(b4):

    lam = lambda_degenerate(b4)
    zero = FourierState.zeros(2, b4, 16)
    action = jacobian_action(lam, zero, kernel_state(2, 0.3, b4, 16), 128)
    assert action.max_abs() < 1e-9


def test_two_fold_states_have_even_image(b4):

    state = kernel_state(2, 0.3, b4, 16).scaled(0.05)
    result = eval_G(0.6, state, 128)
    assert result.odd_residual() < 1e-12
    assert result.cosine_residual < 1e-12


def test_sample_boundary_grid_size(b4):

    state = FourierState.zeros(2, b4, 16)
    with pytest.raises(ValueError):
        sample_boundary(state, 64)
    with pytest.raises(ValueError):
        sample_boundary(state, 200)

    sample = sample_boundary(state, 128)
    assert np.allclose(np.abs(sample.phi[0]), 1.0)
    assert np.allclose(np.abs(sample.phi[1]), b4)


def test_touching_curves_are_rejected():

    state = FourierState.zeros(2, 1.0, 4)
    with pytest.raises(CurveDegenerate):
        check_separation(sample_boundary(state, 64))
    with pytest.raises(CurveDegenerate):
        eval_G(0.5, state, 64)


def test_invalid_coefficients():

    with pytest.raises(ValueError):
        FourierState(p=2, b=0.5, coefficients=np.zeros((3, 4)))
    with pytest.raises(ValueError):
        FourierState(p=2, b=0.5, coefficients=np.full((2, 4), np.nan))


def test_boundary_points(b4):

    table = boundary_points(kernel_state(2, 0.1, b4, 16).scaled(0.01), 128)
    assert table.num_rows == 256
    assert table.column_names == ["component", "theta", "x", "y"]


def test_render_svg(tmp_path, b4):

    path = tmp_path / "shape.svg"
    state = kernel_state(2, 0.1, b4, 16).scaled(0.02)
    render_svg(state, str(path), 128, title="p=2")
    first = path.read_bytes()
    assert first.startswith(b"<?xml")

    render_svg(state, str(path), 128, title="p=2")
    assert path.read_bytes() == first


def test_cauchy_integrals_on_the_annulus(b4):

    sample = sample_boundary(FourierState.zeros(2, b4, 8), 64)
    w_bar = np.conj(sample.w)

    assert np.allclose(eval_cauchy(sample, 1, 1), -w_bar, atol=1e-12)
    assert np.allclose(eval_cauchy(sample, 2, 1), -b4 * b4 * w_bar, atol=1e-12)
    assert np.allclose(eval_cauchy(sample, 1, 2), -b4 * w_bar, atol=1e-12)
    assert np.allclose(eval_cauchy(sample, 2, 2), -b4 * w_bar, atol=1e-12)


def test_jacobian_step(b4):

    zero = FourierState.zeros(2, b4, 16)
    direction = zero.with_block(2, (1.0, 0.0))
    with pytest.raises(ValueError):
        jacobian_action(0.5, zero, direction, 128, h=1e-2)
    with pytest.raises(ValueError):
        jacobian_action(0.5, zero, direction, 128, h=1e-9)

    assert jacobian_action(0.5, zero, zero, 128).max_abs() == 0.0

    state = kernel_state(2, 0.3, b4, 16).scaled(0.05)
    plain = jacobian_action(0.5, state, direction, 128)
    extrapolated = jacobian_action(0.5, state, direction, 128, h=1e-3, richardson=True)
    assert np.allclose(plain.coefficients, extrapolated.coefficients, atol=1e-8)


def test_diagonal_fill_in_is_the_kernel_limit(b4):

    state = kernel_state(2, 0.3, b4, 16).scaled(0.05)
    sample = sample_boundary(state, 16384)
    for component in (0, 1):
        phi, dphi = sample.phi[component], sample.dphi[component]
        for k in (0, 137, 9000):
            z = phi[k]
            neighbours = [(k - 1) % sample.M, (k + 1) % sample.M]
            limit = np.mean(
                [(np.conj(z) - np.conj(phi[s])) / (z - phi[s]) * dphi[s] for s in neighbours]
            )
            assert abs(limit - diagonal_fill_in(dphi[k], sample.w[k])) < 1e-6

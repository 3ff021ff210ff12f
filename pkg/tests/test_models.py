# -*- coding: utf-8 -*-
import numpy as np
import pyarrow as pa
import pytest
from pydantic import ValidationError

from kiara.exceptions import KiaraException
from kiara_plugin.vstates.branch import BranchCurve, BranchSample
from kiara_plugin.vstates.linearization import kernel_state
from kiara_plugin.vstates.models import RunConfig, VStateBranch
from kiara_plugin.vstates.reduction import inner_radius
from kiara_plugin.vstates.spectral import FourierState


@pytest.fixture
def curve() -> BranchCurve:
    b = inner_radius(2)
    phi = np.zeros((2, 16))
    phi[0, 2] = 1e-6
    phi[1, 4] = -2e-7
    samples = [
        BranchSample(
            a=a,
            lam=0.7 + a,
            t=2 * a,
            omega=0.15,
            reduced_residual=1e-12,
            full_residual=1e-10,
            phi=FourierState(p=2, b=b, coefficients=phi * k),
        )
        for k, a in enumerate([1e-3, 2e-3, 4e-3], start=1)
    ]
    return BranchCurve(p=2, sign="+", b=b, samples=samples, fitted_exponent=1.0)


def test_branch_from_curve(curve):

    branch = VStateBranch.create_from_curve(curve)
    assert branch.num_samples == 3
    assert branch.sign == "+"
    assert branch.fitted_exponent == 1.0
    assert branch.corrections is not None
    assert branch.sample_row(1)["a"] == pytest.approx(2e-3)


def test_sample_state(curve):

    branch = VStateBranch.create_from_curve(curve)
    state = branch.sample_state(2, N=16)
    expected = curve.samples[2].state(2, 16)
    assert state.N == 32
    assert np.allclose(state.coefficients[:, :16], expected.coefficients)
    assert np.allclose(state.coefficients[:, 16:], 0.0)

    with pytest.raises(KiaraException):
        branch.sample_state(3)


def test_branch_requires_columns():

    with pytest.raises(KiaraException):
        VStateBranch.create_from_tables(
            p=2, sign="+", b=0.6, samples_table=pa.table({"a": [1e-3], "t": [1e-3]})
        )


def test_branch_without_corrections(curve):

    branch = VStateBranch.create_from_tables(
        p=2, sign="-", b=curve.b, samples_table=curve.samples_table()
    )
    assert branch.corrections is None
    state = branch.sample_state(0)
    expected = kernel_state(2, 1e-3, curve.b, state.N).scaled(2e-3)
    assert np.allclose(state.coefficients, expected.coefficients)


def test_run_config():

    config = RunConfig(subcommand="trace", p=3, a_min=1e-4, a_max=1e-2, out_path="branch.json")
    assert config.output_format == "json"
    assert RunConfig(subcommand="roots").output_format == "json"
    assert RunConfig(subcommand="multipliers", out_path="m.txt").output_format == "csv"

    with pytest.raises(ValidationError):
        RunConfig(subcommand="trace", p=3)
    with pytest.raises(ValidationError):
        RunConfig(subcommand="render")
    with pytest.raises(ValidationError):
        RunConfig(subcommand="roots", sign="0")
    with pytest.raises(ValidationError):
        RunConfig(subcommand="roots", N=32, M=128)

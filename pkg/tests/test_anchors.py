# -*- coding: utf-8 -*-
import pytest

from kiara_plugin.vstates.anchors import (
    derivative_name,
    hessian,
    hessian_c1,
    hessian_c2,
    key_pattern,
    verify_jet,
)
from kiara_plugin.vstates.defaults import ClaimStatus
from kiara_plugin.vstates.linearization import SQRT2
from kiara_plugin.vstates.reduction import inner_radius


def test_derivative_names():

    assert derivative_name(0, 0) == "F2"
    assert derivative_name(2, 1) == "λλt"
    assert derivative_name(0, 3) == "ttt"


def test_key_pattern():

    pattern = key_pattern(2)
    assert (2, 1) not in pattern
    assert (0, 3) in pattern
    assert max(i + j for i, j in pattern) == 3


@pytest.mark.parametrize("correction", [hessian_c1, hessian_c2])
def test_specialized_corrections_agree(correction):

    assert correction(2).matches(correction(2, general_form=True), 2)


def test_hessian_keys():

    assert set(hessian(3).keys()) == {
        (i, j, c) for (i, j) in ((2, 0), (1, 1), (0, 2)) for c in (1, 2)
    }
    assert hessian(2)[(1, 1, 1)].is_zero


@pytest.mark.parametrize("p", [2, 3, 4])
def test_symbolic_second_order(p):

    report = verify_jet(p, 2)
    assert report.passed, report.mismatches
    assert len(report.rows) == 12
    assert all(row.status == ClaimStatus.MATCH for row in report.rows)

    data = report.to_json()
    assert data["passed"] is True
    assert len(data["b_interval"]) == 2
    assert "numeric_relative_2" in data["tolerances"]


def test_symbolic_third_order_at_zero_mixing():

    report = verify_jet(2, 3)
    assert report.passed, report.mismatches
    zero_a = [row for row in report.rows if row.mode == "zero_a"]
    assert {row.name for row in zero_a} >= {"λλλ", "λλt", "λtt", "ttt"}


def test_invalid_arguments():

    with pytest.raises(ValueError):
        verify_jet(5, 2)
    with pytest.raises(ValueError):
        verify_jet(2, 4)
    with pytest.raises(ValueError):
        verify_jet(2, 2, mode="exact")


@pytest.mark.slow
def test_numeric_second_order():

    report = verify_jet(2, 2, mode="numeric", a=0.1, N=16, M=128)
    assert report.passed, report.mismatches
    assert all(row.error is not None for row in report.rows)


def _zero_mixing_rows(report):
    return {(row.i, row.j, row.component): row for row in report.rows if row.mode == "zero_a"}


@pytest.mark.slow
@pytest.mark.parametrize(
    "p, order, anchor",
    [(3, 4, -24 * SQRT2), (4, 5, -96 * SQRT2)],
)
def test_leading_second_component_at_zero_mixing(p, order, anchor):

    report = verify_jet(p, order)
    assert report.passed, report.mismatches

    rows = _zero_mixing_rows(report)
    b = inner_radius(p)
    leading = rows[(2, p - 1, 2)]
    assert leading.status == ClaimStatus.MATCH
    assert leading.computed_value == pytest.approx(anchor * b ** (p - 2), rel=1e-12)

    for (i, j, component), row in rows.items():
        if component != 2 or (i, j) == (2, p - 1):
            continue
        assert row.status == ClaimStatus.MATCH, (i, j)
        assert row.computed_value == pytest.approx(0.0, abs=1e-12), (i, j)


def test_vanishing_pattern_is_asserted():

    report = verify_jet(3, 3)
    assert report.passed, report.mismatches
    rows = _zero_mixing_rows(report)
    for i, j in ((3, 0), (2, 1), (1, 2), (0, 3)):
        assert rows[(i, j, 2)].status == ClaimStatus.MATCH
        assert rows[(i, j, 2)].expected_value == pytest.approx(0.0, abs=1e-15)

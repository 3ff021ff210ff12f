# -*- coding: utf-8 -*-

"""Numerical evaluation of the rotating patch functional ``G(lambda, f)``.

Boundary perturbations are truncated two-fold Fourier series
``f_j(w) = sum_{n=1..N} A_n^j conj(w)^{2n-1}``; the Cauchy integrals are evaluated by
the trapezoid rule on ``M`` equispaced nodes of the unit circle and the result is
projected onto the sine modes ``e_n = Im(conj(w)^n)`` with an FFT.
"""

from typing import TYPE_CHECKING, Any, Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from kiara.utils import log_message
from kiara_plugin.vstates.defaults import (
    DEFAULT_GRID_SIZE,
    DEFAULT_JACOBIAN_STEP,
    JACOBIAN_STEP_RANGE,
    MIN_CURVE_SEPARATION,
)
from kiara_plugin.vstates.exceptions import CurveDegenerate

if TYPE_CHECKING:
    import pyarrow as pa


class FourierState(BaseModel):
    """Coefficients ``A_n^j`` (row ``j-1``, column ``n-1``) of a two-fold perturbation."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: int = Field(description="The symmetry parameter of the degenerate point.", ge=2)
    b: float = Field(description="The inner radius of the unperturbed annulus.")
    coefficients: np.ndarray = Field(description="Array of shape (2, N).")

    @field_validator("coefficients")
    @classmethod
    def _validate_coefficients(cls, value: Any) -> np.ndarray:
        array = np.asarray(value, dtype=float)
        if array.ndim != 2 or array.shape[0] != 2:
            raise ValueError(f"Invalid coefficient shape {array.shape}: must be (2, N).")
        if not np.all(np.isfinite(array)):
            raise ValueError("Fourier coefficients must be finite.")
        return array

    @classmethod
    def zeros(cls, p: int, b: float, N: int) -> "FourierState":
        return cls(p=p, b=b, coefficients=np.zeros((2, N)))

    @property
    def N(self) -> int:
        return int(self.coefficients.shape[1])

    def block(self, n: int) -> np.ndarray:
        return self.coefficients[:, n - 1].copy()

    def with_block(self, n: int, values: Any) -> "FourierState":
        coefficients = self.coefficients.copy()
        coefficients[:, n - 1] = values
        return self._replace(coefficients)

    def _replace(self, coefficients: np.ndarray) -> "FourierState":
        return FourierState(p=self.p, b=self.b, coefficients=coefficients)

    def plus(self, other: "FourierState") -> "FourierState":
        return self._replace(self.coefficients + other.coefficients)

    def minus(self, other: "FourierState") -> "FourierState":
        return self._replace(self.coefficients - other.coefficients)

    def scaled(self, factor: float) -> "FourierState":
        return self._replace(self.coefficients * factor)

    def norm(self) -> float:
        return float(np.max(np.abs(self.coefficients))) if self.coefficients.size else 0.0

    def to_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for j in (1, 2):
            for n in range(1, self.N + 1):
                rows.append(
                    {"component": j, "n": n, "coefficient": float(self.coefficients[j - 1, n - 1])}
                )
        return rows


class GridSample(BaseModel):
    """Values of ``phi_j`` and ``phi_j'`` at ``w_k = exp(2 pi i k / M)``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    M: int
    w: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray


class YCoeffs(BaseModel):
    """Sine coefficients ``B_n`` of both components, ``n = 0..M/2`` (index 0 unused)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: int
    b: float
    coefficients: np.ndarray = Field(description="Array of shape (2, M/2 + 1).")
    cosine_residual: float = Field(
        description="Largest cosine coefficient, zero for two-fold symmetric states.",
        default=0.0,
    )

    @property
    def max_frequency(self) -> int:
        return int(self.coefficients.shape[1]) - 1

    def block(self, n: int) -> np.ndarray:
        """Coefficients of frequency ``2n`` (the image of mode ``conj(w)^{2n-1}``)."""

        if 2 * n > self.max_frequency:
            return np.zeros(2)
        return self.coefficients[:, 2 * n].copy()

    def max_abs(self, n_max: Union[int, None] = None) -> float:
        """Largest coefficient, optionally restricted to blocks ``n <= n_max``."""

        if n_max is None:
            return float(np.max(np.abs(self.coefficients)))
        upper = min(2 * n_max, self.max_frequency)
        return float(np.max(np.abs(self.coefficients[:, : upper + 1])))

    def odd_residual(self) -> float:
        return float(np.max(np.abs(self.coefficients[:, 1::2])))

    def minus(self, other: "YCoeffs") -> "YCoeffs":
        return YCoeffs(
            p=self.p,
            b=self.b,
            coefficients=self.coefficients - other.coefficients,
            cosine_residual=max(self.cosine_residual, other.cosine_residual),
        )

    def scaled(self, factor: float) -> "YCoeffs":
        return YCoeffs(
            p=self.p,
            b=self.b,
            coefficients=self.coefficients * factor,
            cosine_residual=self.cosine_residual * abs(factor),
        )

    @classmethod
    def from_blocks(
        cls, p: int, b: float, blocks: Dict[int, Tuple[float, float]], M: int = DEFAULT_GRID_SIZE
    ) -> "YCoeffs":
        coefficients = np.zeros((2, M // 2 + 1))
        for n, values in blocks.items():
            coefficients[:, 2 * n] = values
        return cls(p=p, b=b, coefficients=coefficients)


def _radii(b: float) -> Tuple[float, float]:
    return (1.0, b)


def sample_boundary(state: FourierState, M: int = DEFAULT_GRID_SIZE) -> GridSample:
    if M < 8 * state.N or M & (M - 1):
        raise ValueError(
            f"Invalid grid size {M}: must be a power of two and >= 8N = {8 * state.N}."
        )

    theta = 2.0 * np.pi * np.arange(M) / M
    w = np.exp(1j * theta)
    modes = 2 * np.arange(1, state.N + 1) - 1
    powers = np.exp(-1j * np.outer(modes, theta))
    powers_derivative = np.exp(-1j * np.outer(modes + 1, theta))

    phi = np.empty((2, M), dtype=complex)
    dphi = np.empty((2, M), dtype=complex)
    for idx, radius in enumerate(_radii(state.b)):
        coeffs = state.coefficients[idx]
        phi[idx] = radius * w + coeffs @ powers
        dphi[idx] = radius - (coeffs * modes) @ powers_derivative

    return GridSample(M=M, w=w, phi=phi, dphi=dphi)


def check_separation(sample: GridSample) -> float:
    """Smallest distance between distinct sampled boundary points."""

    outer, inner = sample.phi[0], sample.phi[1]
    between = np.min(np.abs(outer[:, None] - inner[None, :]))
    separation = float(between)
    for curve in (outer, inner):
        distances = np.abs(curve[:, None] - curve[None, :])
        np.fill_diagonal(distances, np.inf)
        separation = min(separation, float(np.min(distances)))

    if separation <= MIN_CURVE_SEPARATION:
        log_message("spectral.separation.failed", separation=separation)
        raise CurveDegenerate(
            f"Boundary curves are degenerate: minimal point distance {separation:.3e}.",
            separation=separation,
        )
    return separation


def diagonal_fill_in(dphi: Any, w: Any) -> Any:
    """Limit of the Cauchy kernel times ``phi'`` as the integration point tends to ``w``."""

    return -np.conj(dphi) / w**2


def eval_cauchy(sample: GridSample, source: int, target: int) -> np.ndarray:
    """Trapezoid rule for ``I_source(phi_target(w_k))``.

    ``I_i(z) = (1/2 pi i) * integral over boundary i of (conj(z) - conj(zeta)) / (z - zeta) d zeta``.
    """

    z = sample.phi[target - 1][:, None]
    zeta = sample.phi[source - 1][None, :]
    numerator = np.conj(z) - np.conj(zeta)
    denominator = z - zeta
    weights = sample.dphi[source - 1] * sample.w

    if source == target:
        np.fill_diagonal(denominator, 1.0)
        kernel = numerator / denominator
        np.fill_diagonal(kernel, 0.0)
        values = kernel @ weights
        values = values + diagonal_fill_in(sample.dphi[target - 1], sample.w) * sample.w
    else:
        values = (numerator / denominator) @ weights

    return values / sample.M


def eval_G(
    lam: float, state: FourierState, M: int = DEFAULT_GRID_SIZE, check: bool = True
) -> YCoeffs:
    """Sine coefficients of ``G_j = Im{[(1-lambda) conj(phi_j) + I_1(phi_j) - I_2(phi_j)] w phi_j'}``."""

    sample = sample_boundary(state, M)
    if check:
        check_separation(sample)

    coefficients = np.zeros((2, M // 2 + 1))
    cosine = 0.0
    for j in (1, 2):
        inner = (
            (1.0 - lam) * np.conj(sample.phi[j - 1])
            + eval_cauchy(sample, 1, j)
            - eval_cauchy(sample, 2, j)
        )
        values = np.imag(inner * sample.w * sample.dphi[j - 1])
        spectrum = np.fft.rfft(values)
        coefficients[j - 1] = 2.0 * np.imag(spectrum) / M
        cosine = max(cosine, float(np.max(np.abs(np.real(spectrum[1:])))) * 2.0 / M)

    coefficients[:, 0] = 0.0
    return YCoeffs(p=state.p, b=state.b, coefficients=coefficients, cosine_residual=cosine)


def jacobian_action(
    lam: float,
    state: FourierState,
    direction: FourierState,
    M: int = DEFAULT_GRID_SIZE,
    h: float = DEFAULT_JACOBIAN_STEP,
    richardson: bool = False,
) -> YCoeffs:
    """Directional derivative of ``G`` by central differences, optionally Richardson-extrapolated."""

    if not JACOBIAN_STEP_RANGE[0] <= h <= JACOBIAN_STEP_RANGE[1]:
        raise ValueError(
            f"Invalid step {h}: must be between {JACOBIAN_STEP_RANGE[0]} and {JACOBIAN_STEP_RANGE[1]}."
        )

    def central(step: float) -> np.ndarray:
        forward = eval_G(lam, state.plus(direction.scaled(step)), M)
        backward = eval_G(lam, state.minus(direction.scaled(step)), M)
        return (forward.coefficients - backward.coefficients) / (2.0 * step)

    coarse = central(h)
    if not richardson:
        return YCoeffs(p=state.p, b=state.b, coefficients=coarse)
    fine = central(h / 2.0)
    return YCoeffs(p=state.p, b=state.b, coefficients=(4.0 * fine - coarse) / 3.0)


def boundary_points(state: FourierState, M: int = DEFAULT_GRID_SIZE) -> "pa.Table":
    """Sampled boundary curves as a table with columns ``component, theta, x, y``, ``theta = 2 pi k / M``."""

    import pyarrow as pa

    sample = sample_boundary(state, M)
    components = np.repeat([1, 2], M)
    theta = np.tile(2.0 * np.pi * np.arange(M) / M, 2)
    points = np.concatenate([sample.phi[0], sample.phi[1]])
    return pa.table(
        {
            "component": pa.array(components, type=pa.int64()),
            "theta": pa.array(theta, type=pa.float64()),
            "x": pa.array(np.real(points), type=pa.float64()),
            "y": pa.array(np.imag(points), type=pa.float64()),
        }
    )


def render_svg(state: FourierState, path: str, M: int = DEFAULT_GRID_SIZE, title: str = "") -> None:
    """Write both boundary curves as a byte-stable SVG."""

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sample = sample_boundary(state, M)
    with matplotlib.rc_context({"svg.hashsalt": "vstates", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 5))
        for idx, label in enumerate(("outer", "inner")):
            curve = np.append(sample.phi[idx], sample.phi[idx][0])
            ax.plot(np.real(curve), np.imag(curve), linewidth=1.0, label=label)
        ax.set_aspect("equal")
        ax.legend(loc="upper right")
        if title:
            ax.set_title(title)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

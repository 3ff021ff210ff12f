# -*- coding: utf-8 -*-

"""Solutions of the reduced system ``F2(lambda, t; a) = 0`` near ``(lambda_{2p}, 0)``.

Branches are parametrized by the mixing parameter ``a`` of the kernel direction. Each
sample is predicted from the leading order balance of the quadratic (``p = 2``), square
root (``p = 3``) or cube root (``p = 4``) law, corrected by Newton's method on the
reduced system and certified against the full functional on a refined grid.
"""

import math
from typing import TYPE_CHECKING, Any, Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from kiara.utils import log_message
from kiara_plugin.vstates.anchors import hessian_c1, hessian_c2
from kiara_plugin.vstates.defaults import (
    BRANCH_MAX_BISECTIONS,
    DEFAULT_BLOCKS,
    DEFAULT_GRID_SIZE,
    EXPERIMENTAL_P,
    MIN_FIT_SAMPLES,
    NEWTON_MAX_ITERATIONS,
    STEP_RELATIVE_JACOBIAN,
    SUPPORTED_P,
    TOL_FULL,
    TOL_REDUCED,
    DegeneracyStatus,
)
from kiara_plugin.vstates.exceptions import (
    BranchLost,
    InsufficientSamples,
    NewtonDiverged,
    VStatesException,
)
from kiara_plugin.vstates.linearization import (
    SQRT2,
    angular_velocity,
    kernel_state,
    lambda_degenerate,
)
from kiara_plugin.vstates.reduction import Jet2, LSResult, inner_radius, ls_solve
from kiara_plugin.vstates.spectral import FourierState, eval_G

if TYPE_CHECKING:
    import pyarrow as pa

# branch law exponents: lambda - lambda_{2p} ~ a^e
BRANCH_EXPONENTS = {2: 1.0, 3: 0.5, 4: 1.0 / 3.0}
MAX_BRANCH_A = 0.2


class QuadraticPair(BaseModel):
    """Quadratic leading parts ``H2`` (first component) and ``J2`` (second component).

    Coefficients are ordered ``(dlambda^2, dlambda t, t^2)`` and taken from a jet at a
    fixed ``a``.
    """

    p: int
    a: float
    h2: Tuple[float, float, float]
    j2: Tuple[float, float, float]

    @classmethod
    def from_jet(cls, jet: Jet2, a: Union[float, None] = None) -> "QuadraticPair":
        value_a = a if a is not None else (jet.a or 0.0)
        entries = [jet.numeric(i, j, value_a) for i, j in ((2, 0), (1, 1), (0, 2))]
        return cls(
            p=jet.p,
            a=value_a,
            h2=tuple(float(e[0]) for e in entries),  # type: ignore
            j2=tuple(float(e[1]) for e in entries),  # type: ignore
        )

    def evaluate(self, dlam: float, t: float) -> np.ndarray:
        monomials = np.array([dlam * dlam, dlam * t, t * t])
        return np.array([np.dot(self.h2, monomials), np.dot(self.j2, monomials)])


class DegeneracyReport(BaseModel):
    p: int
    a: float
    b: float
    c1: float = Field(description="Correction c1 of the t-t Hessian entry (factor sqrt(2) removed).")
    c2_over_a: Union[float, None] = Field(description="c2 / a, undefined for a = 0.")
    lhs: float = Field(description="Positive side of the compatibility identity.")
    rhs: Union[float, None] = Field(description="Negative side of the compatibility identity.")
    ratio: Union[float, None] = Field(
        description="(4b^2-3)/(2b^4-1), only for p = 2.", default=None
    )
    quadratic_factor: Union[float, None] = Field(
        description="2+4p(b^2-1)+p^2(b^2-1)^2, only for p >= 3.", default=None
    )
    conditions_hold: bool = Field(description="Whether c1 < 0, c2/a > 0 and rhs < 0 < lhs.")
    status: DegeneracyStatus


def degeneracy_check(p: int, a: float) -> DegeneracyReport:
    """Sign conditions showing that the quadratic system has only the trivial zero for ``a != 0``."""

    if p not in SUPPORTED_P + EXPERIMENTAL_P:
        raise ValueError(f"Invalid symmetry parameter p={p}: must be between 2 and 6.")

    b = inner_radius(p)
    c1 = hessian_c1(p).evaluate_float(p, a) / SQRT2
    base = (b * b - 1) ** 2 / b
    lhs = base * p * (2 + p * b ** (2 - 2 * p))

    ratio = None
    quadratic = None
    if p == 2:
        ratio = (4 * b * b - 3) / (2 * b**4 - 1)
    else:
        z = b * b - 1
        quadratic = 2 + 4 * p * z + p * p * z * z

    if a == 0:
        report = DegeneracyReport(
            p=p,
            a=a,
            b=b,
            c1=c1,
            c2_over_a=None,
            lhs=lhs,
            rhs=None,
            ratio=ratio,
            quadratic_factor=quadratic,
            conditions_hold=False,
            status=DegeneracyStatus.DEGENERATE,
        )
    else:
        c2_over_a = hessian_c2(p).evaluate_float(p, a) / SQRT2 / a
        rhs = -base * p * (2 * p - 1) * a * a - c2_over_a + p * p * b ** (2 - 2 * p) * c1
        holds = c1 < 0 and c2_over_a > 0 and rhs < 0 < lhs
        report = DegeneracyReport(
            p=p,
            a=a,
            b=b,
            c1=c1,
            c2_over_a=c2_over_a,
            lhs=lhs,
            rhs=rhs,
            ratio=ratio,
            quadratic_factor=quadratic,
            conditions_hold=holds,
            status=DegeneracyStatus.ISOLATED,
        )
    log_message("branch.degeneracy.checked", p=p, a=a, status=report.status.value)
    return report


def _sign_value(sign: Union[str, int]) -> int:
    if sign in ("+", 1, "1", "+1"):
        return 1
    if sign in ("-", -1, "-1"):
        return -1
    raise ValueError(f"Invalid branch sign '{sign}': must be '+' or '-'.")


def _first_component(jet: Jet2, a: float) -> Dict[Tuple[int, int], float]:
    return {(i, j): float(jet.numeric(i, j, a)[0]) for i, j in jet.keys()}


def solve_t_of_lambda(
    jet: Jet2,
    lam: float,
    a: float,
    sign: Union[str, int],
    tol: float = 1e-14,
    max_iterations: int = NEWTON_MAX_ITERATIONS,
) -> float:
    """Solve the truncated first component ``Q1 F2(lambda, t; a) = 0`` for ``t``.

    Newton's method is seeded on the cone line ``t = sign * 2 (lambda - lambda_{2p}) / (b^2 - 1)``.
    """

    sign_value = _sign_value(sign)
    dlam = lam - lambda_degenerate(jet.b)
    if dlam == 0:
        return 0.0

    coeffs = _first_component(jet, a)
    c20, c02 = coeffs.get((2, 0), 0.0), coeffs.get((0, 2), 0.0)
    if c20 * c02 >= 0:
        raise NewtonDiverged(
            f"First component has no real cone at a={a}: c20={c20}, c02={c02}."
        )
    slope = math.sqrt(-c20 / c02)
    t = -sign_value * slope * dlam

    def value_and_slope(t_value: float) -> Tuple[float, float]:
        value = 0.0
        derivative = 0.0
        for (i, j), c in coeffs.items():
            value += c * dlam**i * t_value**j
            if j:
                derivative += j * c * dlam**i * t_value ** (j - 1)
        return value, derivative

    scale = abs(c20) * dlam * dlam
    for _ in range(max_iterations):
        value, derivative = value_and_slope(t)
        if abs(value) <= tol * scale:
            return t
        if derivative == 0 or not math.isfinite(derivative):
            break
        step = value / derivative
        t -= step
        if abs(step) <= 1e-15 * max(abs(t), 1e-300):
            return t

    log_message("branch.t_of_lambda.failed", lam=lam, a=a)
    raise NewtonDiverged(f"Newton iteration for t(lambda) diverged at lambda={lam}.")


class BranchSample(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    a: float = Field(description="Mixing parameter of the kernel direction.")
    lam: float = Field(description="The bifurcation parameter lambda = 1 - 2 Omega.")
    t: float = Field(description="Amplitude along the kernel direction.")
    omega: float = Field(description="Angular velocity of the V-state.")
    reduced_residual: float = Field(description="Sup norm of F2 at the sample.")
    full_residual: float = Field(description="Sup norm of G on the refined grid.")
    phi: Union[FourierState, None] = Field(description="The correction.", default=None)

    def state(self, p: int, N: int) -> FourierState:
        """Reconstructed perturbation ``t x_a + phi``."""

        b = inner_radius(p)
        base = kernel_state(p, self.a, b, N).scaled(self.t)
        if self.phi is None:
            return base
        return base.plus(self.phi)


class ScalingFit(BaseModel):
    exponent: float
    prefactor: float
    r2: float
    samples: int


class BranchCurve(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    p: int
    sign: str
    b: float
    samples: List[BranchSample] = Field(default_factory=list)
    fitted_exponent: Union[float, None] = None
    fitted_prefactor: Union[float, None] = None
    fit_r2: Union[float, None] = None

    @field_validator("samples")
    @classmethod
    def _validate_samples(cls, value: List[BranchSample]) -> List[BranchSample]:
        values = [s.a for s in value]
        if any(x >= y for x, y in zip(values, values[1:])):
            raise ValueError("Branch samples must be strictly increasing in a.")
        return value

    @property
    def lambda_degenerate(self) -> float:
        return lambda_degenerate(self.b)

    def sample_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "a": s.a,
                "lambda": s.lam,
                "t": s.t,
                "omega": s.omega,
                "reduced_residual": s.reduced_residual,
                "full_residual": s.full_residual,
            }
            for s in self.samples
        ]

    def correction_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for idx, sample in enumerate(self.samples):
            if sample.phi is None:
                continue
            for row in sample.phi.to_rows():
                rows.append({"sample": idx, **row})
        return rows

    def samples_table(self) -> "pa.Table":
        import pyarrow as pa

        columns = ["a", "lambda", "t", "omega", "reduced_residual", "full_residual"]
        rows = self.sample_rows()
        return pa.table(
            {c: pa.array([r[c] for r in rows], type=pa.float64()) for c in columns}
        )

    def corrections_table(self) -> "pa.Table":
        import pyarrow as pa

        rows = self.correction_rows()
        return pa.table(
            {
                "sample": pa.array([r["sample"] for r in rows], type=pa.int64()),
                "component": pa.array([r["component"] for r in rows], type=pa.int64()),
                "n": pa.array([r["n"] for r in rows], type=pa.int64()),
                "coefficient": pa.array([r["coefficient"] for r in rows], type=pa.float64()),
            }
        )


def scaling_fit(curve: BranchCurve) -> ScalingFit:
    """Least squares fit of ``log|lambda - lambda_{2p}|`` against ``log|a|`` over the smallest decade."""

    lam0 = lambda_degenerate(curve.b)
    points = [(abs(s.a), abs(s.lam - lam0)) for s in curve.samples if s.a != 0 and s.lam != lam0]
    if points:
        smallest = min(x for x, _ in points)
        points = [(x, y) for x, y in points if x <= 10.0 * smallest * (1 + 1e-12)]
    if len(points) < MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            f"Scaling fit needs at least {MIN_FIT_SAMPLES} samples within a decade, got {len(points)}."
        )

    x = np.log(np.array([p[0] for p in points]))
    y = np.log(np.array([p[1] for p in points]))
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    total = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum((y - predicted) ** 2)) / total if total > 0 else 1.0
    return ScalingFit(
        exponent=float(slope), prefactor=float(np.exp(intercept)), r2=r2, samples=len(points)
    )


def leading_prediction(p: int, a: float, sign: Union[str, int], b: Union[float, None] = None) -> Tuple[float, float]:
    """Leading order ``(lambda - lambda_{2p}, t)`` of the branch through ``a``."""

    sign_value = _sign_value(sign)
    if b is None:
        b = inner_radius(p)
    if p == 2:
        t = 2 * a * (b**-3 + 1 / b)
    elif p == 3:
        if a <= 0:
            raise ValueError("Branches for p=3 only exist for a > 0.")
        t = math.sqrt(a) * math.sqrt(3 / b**6 + 2 / b**2)
    elif p == 4:
        t = 2 * float(np.cbrt(a * (4 / b**7 + 2 / b) / (8 * b * b)))
    else:
        raise ValueError(f"No branch law for p={p}.")
    return sign_value * (b * b - 1) * t / 2, t


class _Corrector(object):
    """Newton's method on ``F2`` with a central difference Jacobian, warm starting ``phi``."""

    def __init__(self, p: int, a: float, N: int, M: int, tol_reduced: float):
        self.p = p
        self.a = a
        self.N = N
        self.M = M
        self.tol_reduced = tol_reduced
        self.lam0 = lambda_degenerate(inner_radius(p))
        self.phi: Union[FourierState, None] = None

    def solve(self, dlam: float, t: float) -> LSResult:
        result = ls_solve(self.lam0 + dlam, t, self.a, self.p, N=self.N, M=self.M, initial=self.phi)
        self.phi = result.phi
        return result

    def f2(self, dlam: float, t: float) -> np.ndarray:
        return np.asarray(self.solve(dlam, t).q) / t

    def run(self, dlam: float, t: float) -> Tuple[float, float, LSResult, float]:
        for iteration in range(NEWTON_MAX_ITERATIONS):
            result = self.solve(dlam, t)
            value = np.asarray(result.q) / t
            residual = float(np.max(np.abs(value)))
            if residual <= self.tol_reduced:
                return dlam, t, result, residual

            h = STEP_RELATIVE_JACOBIAN * (abs(dlam) + abs(t))
            jacobian = np.empty((2, 2))
            jacobian[:, 0] = (self.f2(dlam + h, t) - self.f2(dlam - h, t)) / (2 * h)
            jacobian[:, 1] = (self.f2(dlam, t + h) - self.f2(dlam, t - h)) / (2 * h)
            try:
                step = np.linalg.solve(jacobian, value)
            except np.linalg.LinAlgError:
                raise NewtonDiverged(f"Singular reduced Jacobian at a={self.a}.")
            dlam, t = dlam - float(step[0]), t - float(step[1])
            if not (math.isfinite(dlam) and math.isfinite(t)) or t == 0:
                break

        raise NewtonDiverged(f"Newton corrector diverged at a={self.a}.")


def _attempt(
    p: int,
    a: float,
    prediction: Tuple[float, float],
    N: int,
    M: int,
    tol_reduced: float,
    tol_full: float,
) -> BranchSample:
    corrector = _Corrector(p, a, N, M, tol_reduced)
    dlam, t, result, reduced = corrector.run(*prediction)
    if abs(t) < 1e-3 * abs(prediction[1]):
        raise NewtonDiverged(f"Corrector collapsed to the trivial solution at a={a}.")

    lam = corrector.lam0 + dlam
    full = eval_G(lam, result.state(), 2 * M).max_abs()
    if full > tol_full:
        raise NewtonDiverged(f"Full residual {full:.3e} above tolerance at a={a}.")

    return BranchSample(
        a=a,
        lam=lam,
        t=t,
        omega=angular_velocity(lam),
        reduced_residual=reduced,
        full_residual=full,
        phi=result.phi,
    )


def _scale_prediction(
    p: int, previous: BranchSample, lam0: float, a: float
) -> Tuple[float, float]:
    factor = (a / previous.a) ** BRANCH_EXPONENTS[p]
    return (previous.lam - lam0) * factor, previous.t * factor


def trace_branch(
    p: int,
    a_min: float,
    a_max: float,
    steps: int = 12,
    sign: Union[str, int] = "+",
    N: int = DEFAULT_BLOCKS,
    M: int = DEFAULT_GRID_SIZE,
    tol_reduced: float = TOL_REDUCED,
    tol_full: float = TOL_FULL,
) -> BranchCurve:
    """Trace the branch of V-states for ``a`` in ``[a_min, a_max]`` (geometric spacing)."""

    sign_value = _sign_value(sign)
    if p not in SUPPORTED_P:
        raise ValueError(f"Invalid symmetry parameter p={p}: branches are traced for p in {SUPPORTED_P}.")
    if steps < 2:
        raise ValueError(f"Invalid number of steps '{steps}': must be >= 2.")
    if a_min == 0 or a_max == 0 or (a_min > 0) != (a_max > 0):
        raise ValueError("The a-range must not contain 0, where the Hessian degenerates.")
    if max(abs(a_min), abs(a_max)) > MAX_BRANCH_A:
        raise ValueError(f"The a-range must stay within |a| <= {MAX_BRANCH_A}.")
    if p == 3 and a_min < 0:
        raise ValueError("Branches for p=3 only exist for a > 0.")

    b = inner_radius(p)
    lam0 = lambda_degenerate(b)
    targets = sorted(np.geomspace(a_min, a_max, steps).tolist(), key=abs)

    samples: List[BranchSample] = []
    failures = 0
    while targets:
        a = targets[0]
        if samples:
            prediction = _scale_prediction(p, samples[-1], lam0, a)
        else:
            prediction = leading_prediction(p, a, sign_value, b)
        try:
            sample = _attempt(p, a, prediction, N, M, tol_reduced, tol_full)
        except VStatesException as e:
            failures += 1
            log_message("branch.sample.rejected", p=p, a=a, reason=str(e), failures=failures)
            if failures > BRANCH_MAX_BISECTIONS:
                raise BranchLost(f"Lost the branch at a={a} after {BRANCH_MAX_BISECTIONS} bisections.", a=a)
            if samples:
                midpoint = math.copysign(math.sqrt(abs(samples[-1].a * a)), a)
            else:
                midpoint = a / 2.0
            targets.insert(0, midpoint)
            continue

        failures = 0
        targets.pop(0)
        samples.append(sample)
        log_message(
            "branch.sample.accepted",
            p=p,
            a=a,
            lam=sample.lam,
            t=sample.t,
            full_residual=sample.full_residual,
        )

    curve = BranchCurve(
        p=p,
        sign="+" if sign_value > 0 else "-",
        b=b,
        samples=sorted(samples, key=lambda s: s.a),
    )
    try:
        fit = scaling_fit(curve)
    except InsufficientSamples as e:
        log_message("branch.fit.skipped", p=p, reason=str(e))
    else:
        curve.fitted_exponent = fit.exponent
        curve.fitted_prefactor = fit.prefactor
        curve.fit_r2 = fit.r2
    return curve

# -*- coding: utf-8 -*-

"""Lyapunov-Schmidt reduction at the degenerate point ``(lambda_{2p}, 0)``.

With ``g = t x_a`` in the kernel, the complementary equation
``(Id - Q) G(lambda, g + phi) = 0`` is solved for ``phi`` and the two-dimensional
reduced functional ``F2(lambda, t; a) = Q G(lambda, t x_a + phi) / t`` is evaluated
numerically, or expanded exactly in ``(lambda - lambda_{2p}, t)`` through the residue
engine of [kiara_plugin.vstates.contour][].
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from kiara.utils import log_message
from kiara_plugin.vstates.contour import (
    CoefExpr,
    Direction,
    PerturbationScheme,
    YElement,
    g_series,
    zero_direction,
)
from kiara_plugin.vstates.defaults import (
    DEFAULT_BLOCKS,
    DEFAULT_GRID_SIZE,
    DEFAULT_JET_STEPS,
    LS_CONTRACTION_RADIUS,
    LS_MAX_ITERATIONS,
    LS_TOLERANCE,
    MAX_EXPANSION_ORDER,
    MAX_NUMERIC_JET_ORDER,
    MIN_BLOCKS,
    STENCIL_RADIUS,
    JetMode,
    max_threads,
)
from kiara_plugin.vstates.exactnum import find_b2p
from kiara_plugin.vstates.exceptions import NoConvergence
from kiara_plugin.vstates.linearization import (
    SQRT2,
    SqrtTwoMultiple,
    invert_linearization,
    kernel_pair,
    kernel_state,
    lambda_degenerate,
    multiplier,
    project,
)
from kiara_plugin.vstates.spectral import FourierState, eval_G, jacobian_action

JetKey = Tuple[int, int]


def inner_radius(p: int) -> float:
    return find_b2p(p).as_float()


class LSResult(BaseModel):
    """A converged solution of the complementary equation."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lam: float = Field(description="The bifurcation parameter lambda.")
    t: float = Field(description="Amplitude along the kernel direction x_a.")
    a: float = Field(description="Mixing parameter of the kernel direction.")
    p: int = Field(description="The symmetry parameter.")
    phi: FourierState = Field(description="The correction, zero along the kernel.")
    residual: float = Field(description="Sup norm of (Id-Q)G on the retained blocks.")
    iterations: int = Field(description="Number of quasi-Newton steps.")
    q: Tuple[float, float] = Field(
        description="Co-kernel components (Q1, Q2) of G at the solution.", default=(0.0, 0.0)
    )

    def state(self) -> FourierState:
        """The full perturbation ``t x_a + phi``."""

        return kernel_state(self.p, self.a, self.phi.b, self.phi.N).scaled(self.t).plus(self.phi)


def ls_solve(
    lam: float,
    t: float,
    a: float,
    p: int,
    N: int = DEFAULT_BLOCKS,
    tol: float = LS_TOLERANCE,
    M: int = DEFAULT_GRID_SIZE,
    initial: Union[FourierState, None] = None,
    max_iterations: int = LS_MAX_ITERATIONS,
) -> LSResult:
    """Quasi-Newton iteration ``h <- h - L0^{-1} (Id-Q) G(lambda, t x_a + h)``."""

    if N < MIN_BLOCKS:
        raise ValueError(f"Invalid truncation N={N}: must be >= {MIN_BLOCKS}.")

    b = inner_radius(p)
    zero = FourierState.zeros(p, b, N)
    if t == 0:
        return LSResult(lam=lam, t=t, a=a, p=p, phi=zero, residual=0.0, iterations=0)

    if abs(t) > LS_CONTRACTION_RADIUS or abs(lam - lambda_degenerate(b)) > LS_CONTRACTION_RADIUS:
        log_message("reduction.ls.outside_contraction", lam=lam, t=t, a=a, p=p)

    base = kernel_state(p, a, b, N).scaled(t)
    h = zero if initial is None or initial.N != N else initial
    residual = math.inf

    for iteration in range(max_iterations + 1):
        y = eval_G(lam, base.plus(h), M)
        q1, q2, remainder = project(y, p)
        residual = remainder.max_abs(N)
        if residual <= tol:
            log_message(
                "reduction.ls.converged", lam=lam, t=t, a=a, p=p, iterations=iteration
            )
            return LSResult(
                lam=lam,
                t=t,
                a=a,
                p=p,
                phi=h,
                residual=residual,
                iterations=iteration,
                q=(q1, q2),
            )
        if not math.isfinite(residual):
            break
        h = h.minus(invert_linearization(remainder, p, N))

    log_message("reduction.ls.failed", lam=lam, t=t, a=a, p=p, residual=residual)
    raise NoConvergence(
        f"Lyapunov-Schmidt iteration did not converge (residual {residual:.3e}).",
        residual=residual,
        iterations=max_iterations,
    )


def f2_axis(lam: float, a: float, p: int, b: Union[float, None] = None) -> np.ndarray:
    """Closed form of ``F2(lambda, 0; a) = Q d_f G(lambda, 0)[x_a + d_g phi(lambda, 0) x_a]``.

    On blocks 1 and ``p`` the correction only changes the first component, so
    ``(Id - Q) M (u, 1) = 0`` resp. ``(Id - Q) M (u, -1) = 0`` fix ``u``.
    """

    if b is None:
        b = inner_radius(p)

    (m11, m12), (m21, m22) = multiplier(2, lam, b).entries
    u = -(m12 + m22) / (m11 + m21)
    first = m11 * u + m12
    q1 = SQRT2 * first

    (m11, m12), (m21, m22) = multiplier(2 * p, lam, b).entries
    u = (m12 - m22) / (m11 - m21)
    first = a * (m11 * u - m12)
    q2 = -SQRT2 * first

    return np.array([q1, q2])


def f2_eval(
    lam: float,
    t: float,
    a: float,
    p: int,
    N: int = DEFAULT_BLOCKS,
    M: int = DEFAULT_GRID_SIZE,
    tol: float = LS_TOLERANCE,
    initial: Union[FourierState, None] = None,
) -> np.ndarray:
    """``(Q1, Q2)`` components of ``QG(lambda, t x_a + phi) / t``."""

    if t == 0:
        return f2_axis(lam, a, p)
    result = ls_solve(lam, t, a, p, N=N, tol=tol, M=M, initial=initial)
    return np.asarray(result.q) / t


def f2_integral_form(
    lam: float,
    t: float,
    a: float,
    p: int,
    N: int = DEFAULT_BLOCKS,
    M: int = DEFAULT_GRID_SIZE,
    nodes: int = 6,
) -> np.ndarray:
    """``F2`` through its integral definition.

    ``int_0^1 Q d_f G(lambda, s t x_a + phi(s t))[x_a + d_g phi(s t) x_a] ds`` with
    Gauss-Legendre nodes in ``s`` and a central difference for ``d_g phi``.
    """

    if t == 0:
        return f2_axis(lam, a, p)

    b = inner_radius(p)
    direction_base = kernel_state(p, a, b, N)
    points, weights = np.polynomial.legendre.leggauss(nodes)
    total = np.zeros(2)
    for node, weight in zip(points, weights):
        s = 0.5 * (node + 1.0)
        amplitude = s * t
        solution = ls_solve(lam, amplitude, a, p, N=N, M=M)
        eps = 1e-3 * abs(t)
        ahead = ls_solve(lam, amplitude + eps, a, p, N=N, M=M, initial=solution.phi)
        behind = ls_solve(lam, amplitude - eps, a, p, N=N, M=M, initial=solution.phi)
        dphi = ahead.phi.minus(behind.phi).scaled(1.0 / (2.0 * eps))
        direction = direction_base.plus(dphi)
        action = jacobian_action(lam, solution.state(), direction, M)
        q1, q2, _ = project(action, p)
        total += 0.5 * weight * np.array([q1, q2])
    return total


class Jet2(BaseModel):
    """Taylor coefficients of ``(Q1 F2, Q2 F2)`` in ``(lambda - lambda_{2p}, t)``.

    ``coeffs[(i, j)]`` is the coefficient of ``dlambda^i t^j``, i.e. the mixed derivative
    divided by ``i! j!``. Exact jets hold [SqrtTwoMultiple][] values, numeric jets floats.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    p: int
    mode: JetMode
    order: int
    b: float
    a: Union[float, None] = Field(description="Fixed mixing parameter (numeric jets).", default=None)
    coeffs: Dict[JetKey, Tuple[Any, Any]] = Field(default_factory=dict)
    errors: Dict[JetKey, Tuple[float, float]] = Field(default_factory=dict)

    @property
    def is_exact(self) -> bool:
        return self.mode != JetMode.NUMERIC

    def coefficient(self, i: int, j: int) -> Tuple[Any, Any]:
        if (i, j) in self.coeffs:
            return self.coeffs[(i, j)]
        if self.is_exact:
            return (SqrtTwoMultiple(), SqrtTwoMultiple())
        return (0.0, 0.0)

    def derivative(self, i: int, j: int) -> Tuple[Any, Any]:
        factor = math.factorial(i) * math.factorial(j)
        first, second = self.coefficient(i, j)
        if self.is_exact:
            return (first.scale(factor), second.scale(factor))
        return (first * factor, second * factor)

    def numeric(self, i: int, j: int, a: Union[float, None] = None) -> np.ndarray:
        """Float value of a coefficient; exact jets are evaluated at ``b_{2p}`` and ``a``."""

        first, second = self.coefficient(i, j)
        if not self.is_exact:
            return np.array([first, second])
        value_a = a if a is not None else (self.a or 0.0)
        return np.array(
            [first.evaluate_float(self.p, value_a), second.evaluate_float(self.p, value_a)]
        )

    def keys(self) -> List[JetKey]:
        return [
            (i, total - i)
            for total in range(self.order + 1)
            for i in range(total, -1, -1)
        ]

    def to_json(self) -> Dict[str, Any]:
        entries = {}
        for i, j in self.keys():
            first, second = self.coefficient(i, j)
            if self.is_exact:
                value: Any = [first.to_json(), second.to_json()]
            else:
                value = [float(first), float(second)]
            entry: Dict[str, Any] = {"value": value}
            if (i, j) in self.errors:
                entry["error"] = list(self.errors[(i, j)])
            entries[f"{i},{j}"] = entry
        return {
            "p": self.p,
            "mode": self.mode.value,
            "order": self.order,
            "b": self.b,
            "a": self.a,
            "coefficients": entries,
        }


def _fd_weights(derivative: int, radius: int) -> np.ndarray:
    """Central finite difference weights on the offsets ``-radius..radius``."""

    offsets = np.arange(-radius, radius + 1, dtype=float)
    size = offsets.size
    vandermonde = np.vander(offsets, size, increasing=True).T
    rhs = np.zeros(size)
    rhs[derivative] = math.factorial(derivative)
    return np.linalg.solve(vandermonde, rhs)


def _error_order(derivative: int, radius: int) -> int:
    if derivative == 0:
        return 2 * radius + 2
    return 2 * radius + 2 - 2 * math.ceil(derivative / 2)


def jet_numeric(
    p: int,
    a: float,
    K: int,
    N: int = DEFAULT_BLOCKS,
    M: int = DEFAULT_GRID_SIZE,
    steps: Union[Dict[int, float], None] = None,
    threads: Union[int, None] = None,
) -> Jet2:
    """Richardson-extrapolated central differences of ``f2_eval`` on tensor stencils.

    The ``t = 0`` row comes from [f2_axis][] and needs no solve.
    """

    if K > MAX_NUMERIC_JET_ORDER:
        raise ValueError(
            f"Numeric jets are limited to order {MAX_NUMERIC_JET_ORDER}, got {K}."
        )

    b = inner_radius(p)
    lam0 = lambda_degenerate(b)
    step_table = dict(DEFAULT_JET_STEPS)
    if steps:
        step_table.update(steps)

    radius = STENCIL_RADIUS
    offsets = range(-radius, radius + 1)
    points = set()
    for total in range(1, K + 1):
        for h in (step_table[total], step_table[total] / 2.0):
            for k in offsets:
                for l in offsets:
                    points.add((k * h, l * h))

    def evaluate(point: Tuple[float, float]) -> Tuple[Tuple[float, float], np.ndarray]:
        dlam, t = point
        return point, f2_eval(lam0 + dlam, t, a, p, N=N, M=M)

    workers = threads if threads is not None else max_threads()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        values = dict(executor.map(evaluate, sorted(points)))

    weights = {d: _fd_weights(d, radius) for d in range(K + 1)}
    coeffs: Dict[JetKey, Tuple[Any, Any]] = {}
    errors: Dict[JetKey, Tuple[float, float]] = {}
    coeffs[(0, 0)] = tuple(float(x) for x in values[(0.0, 0.0)])  # type: ignore
    errors[(0, 0)] = (0.0, 0.0)

    for total in range(1, K + 1):
        for i in range(total, -1, -1):
            j = total - i
            order = min(_error_order(d, radius) for d in (i, j) if d > 0)
            estimates = []
            for h in (step_table[total], step_table[total] / 2.0):
                result = np.zeros(2)
                for k_idx, k in enumerate(offsets):
                    for l_idx, l in enumerate(offsets):
                        weight = weights[i][k_idx] * weights[j][l_idx]
                        if weight:
                            result += weight * values[(k * h, l * h)]
                estimates.append(result / h**total)
            coarse, fine = estimates
            factor = 2.0**order
            derivative = (factor * fine - coarse) / (factor - 1.0)
            error = np.abs(fine - coarse) / (factor - 1.0)
            norm = math.factorial(i) * math.factorial(j)
            coeffs[(i, j)] = (float(derivative[0] / norm), float(derivative[1] / norm))
            errors[(i, j)] = (float(error[0] / norm), float(error[1] / norm))

    log_message("reduction.jet.numeric", p=p, a=a, order=K, evaluations=len(values))
    return Jet2(p=p, mode=JetMode.NUMERIC, order=K, b=b, a=a, coeffs=coeffs, errors=errors)


def _graded_scheme(p: int, x_a: Direction, phi: Dict[JetKey, Direction]) -> PerturbationScheme:
    directions = [x_a]
    exponents = [(0, 1)]
    for key in sorted(phi.keys()):
        if not phi[key].is_zero:
            directions.append(phi[key])
            exponents.append(key)
    return PerturbationScheme(p, directions, exponents)


def _complement_rhs(
    g0: Dict[JetKey, YElement], g1: Dict[JetKey, YElement], i: int, j: int
) -> YElement:
    rhs = g0.get((i, j), YElement())
    if i >= 1:
        rhs = rhs + g1.get((i - 1, j), YElement())
    return rhs


def phi_expansion(
    p: int,
    order: int,
    a: Any,
    max_order: int = MAX_EXPANSION_ORDER,
) -> Dict[JetKey, Direction]:
    """Taylor coefficients ``phi_ij`` of ``phi(lambda_{2p} + dlambda, t x_a)``, ``i + j <= order``.

    ``phi_ij = -L0^{-1} (Id-Q) [dlambda^i t^j] (G + dlambda d_lambda G)(t x_a + phi_{<i+j})``;
    coefficients are reduced modulo the relation of ``b_{2p}``.
    """

    x_a = kernel_pair(p).xa(a)
    phi: Dict[JetKey, Direction] = {}
    for total in range(2, order + 1):
        scheme = _graded_scheme(p, x_a, phi)
        g0 = g_series(scheme, 0, total=total, max_order=max_order)
        g1 = g_series(scheme, 1, total=total - 1, max_order=max_order)
        for j in range(1, total + 1):
            i = total - j
            rhs = _complement_rhs(g0, g1, i, j)
            if rhs.is_zero:
                continue
            _, _, remainder = project(rhs, p)
            if remainder.is_zero:
                continue
            correction = -invert_linearization(remainder, p)
            correction = correction.map_coeffs(lambda c: c.reduce_mod(p))
            if not correction.is_zero:
                phi[(i, j)] = correction
        log_message("reduction.phi.order_done", p=p, order=total, terms=len(phi))
    return phi


def _symbolic_a_mode(K: int, symbolic_a: Union[bool, None]) -> bool:
    if symbolic_a is None:
        return K <= 2
    if symbolic_a and K > 2:
        raise ValueError(f"Jets symbolic in a are limited to order 2, got {K}.")
    return symbolic_a


def jet_symbolic(
    p: int,
    K: int,
    symbolic_a: Union[bool, None] = None,
    max_order: int = MAX_EXPANSION_ORDER,
) -> Jet2:
    """Exact jet ``[dlambda^i t^{j+1}] Q (G + dlambda d_lambda G)(t x_a + phi)`` for ``i + j <= K``."""

    if K < 1:
        raise ValueError(f"Invalid jet order '{K}'.")
    if K > p + 1:
        raise ValueError(f"Jet order {K} exceeds p + 1 = {p + 1}.")
    use_a = _symbolic_a_mode(K, symbolic_a)
    a = CoefExpr.a() if use_a else 0

    phi = phi_expansion(p, K, a, max_order=max_order)
    scheme = _graded_scheme(p, kernel_pair(p).xa(a), phi)
    g0 = g_series(scheme, 0, total=K + 1, max_order=max_order)
    g1 = g_series(scheme, 1, total=K, max_order=max_order)

    coeffs: Dict[JetKey, Tuple[Any, Any]] = {}
    for total in range(K + 1):
        for i in range(total, -1, -1):
            j = total - i
            rhs = _complement_rhs(g0, g1, i, j + 1)
            q1, q2, _ = project(rhs, p)
            coeffs[(i, j)] = (q1, q2)

    log_message("reduction.jet.symbolic", p=p, order=K, symbolic_a=use_a)
    return Jet2(
        p=p,
        mode=JetMode.SYMBOLIC_A if use_a else JetMode.ZERO_A,
        order=K,
        b=inner_radius(p),
        a=None if use_a else 0.0,
        coeffs=coeffs,
    )


class PhiDerivatives(BaseModel):
    """Derivatives ``d_lambda^i d_g^j phi(lambda_{2p}, 0)[x_a, ..., x_a]`` (factor ``i! j!`` applied)."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    p: int
    order: int
    general: Dict[JetKey, Direction] = Field(
        description="Orders <= 2 with symbolic a.", default_factory=dict
    )
    at_zero: Dict[JetKey, Direction] = Field(
        description="Orders up to 'order' at a = 0.", default_factory=dict
    )

    def get(self, i: int, j: int, at_zero: bool = False) -> Direction:
        source = self.at_zero if at_zero or i + j > 2 else self.general
        return source.get((i, j), zero_direction())

    @property
    def x_tilde(self) -> Direction:
        """``d_lambda d_g phi x_a``."""

        return self.get(1, 1)

    @property
    def x_bar(self) -> Direction:
        """``d_gg phi [x_a, x_a]``."""

        return self.get(0, 2)


def _as_derivatives(phi: Dict[JetKey, Direction]) -> Dict[JetKey, Direction]:
    return {
        key: direction.scale(math.factorial(key[0]) * math.factorial(key[1]))
        for key, direction in phi.items()
    }


def phi_derivatives(
    p: int, order: Union[int, None] = None, max_order: int = MAX_EXPANSION_ORDER
) -> PhiDerivatives:
    if order is None:
        order = p + 1
    general = phi_expansion(p, 2, CoefExpr.a(), max_order=max_order)
    at_zero = phi_expansion(p, order, 0, max_order=max_order) if order > 2 else {}
    return PhiDerivatives(
        p=p,
        order=order,
        general=_as_derivatives(general),
        at_zero=_as_derivatives(at_zero),
    )

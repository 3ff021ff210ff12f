# -*- coding: utf-8 -*-
from typing import Any, Union

from kiara.exceptions import KiaraException


class VStatesException(KiaraException):
    """Base class for all errors raised by the V-state analysis code."""


class DenominatorVanishes(VStatesException):
    """A denominator could not be separated from zero at the degenerate inner radius."""


class Inconclusive(VStatesException):
    """Symbolic reduction and interval evaluation of a zero test disagree."""


class PoleOnCircle(VStatesException):
    """A residue computation met a pole on the unit circle that does not cancel."""


class CurveDegenerate(VStatesException):
    """Sampled boundary curves self-intersect or touch each other."""

    def __init__(self, msg: str, separation: float, **kwargs: Any):
        self.separation = separation
        super().__init__(msg, **kwargs)


class SingularBlock(VStatesException):
    """A Fourier block of the linearized operator is not invertible."""

    def __init__(self, msg: str, block: Union[int, None] = None, **kwargs: Any):
        self.block = block
        super().__init__(msg, **kwargs)


class NumericalFailure(VStatesException):
    """A numerical solver failed to produce a result."""


class NoConvergence(NumericalFailure):
    def __init__(self, msg: str, residual: float, iterations: int, **kwargs: Any):
        self.residual = residual
        self.iterations = iterations
        super().__init__(msg, **kwargs)


class NewtonDiverged(NumericalFailure):
    pass


class BranchLost(NumericalFailure):
    def __init__(self, msg: str, a: float, **kwargs: Any):
        self.a = a
        super().__init__(msg, **kwargs)


class InsufficientSamples(VStatesException):
    pass

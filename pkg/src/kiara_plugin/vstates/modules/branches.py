# -*- coding: utf-8 -*-
from typing import Any, Mapping

from kiara.api import KiaraModule, ValueMapSchema
from kiara.exceptions import KiaraProcessingException
from kiara.models.values.value import ValueMap
from kiara_plugin.vstates.defaults import ALLOWED_SIGN_STRINGS

KIARA_METADATA = {
    "authors": [
        {"name": "Markus Binsteiner", "email": "markus@frkl.dev"},
    ],
    "description": "Modules to trace and render branches of V-states.",
}


class TraceBranchModule(KiaraModule):
    """Trace a branch of doubly-connected V-states bifurcating from the degenerate annulus.

    Samples are spaced geometrically in the mixing parameter 'a'. Each sample solves the reduced
    two-dimensional system with Newton's method and is only accepted if the reconstructed
    boundary also solves the full equation on a refined grid.
    """

    _module_type_name = "vstates.trace.branch"

    def create_inputs_schema(
        self,
    ) -> ValueMapSchema:

        inputs: Mapping[str, Any] = {
            "p": {
                "type": "integer",
                "doc": "The symmetry parameter (2, 3 or 4).",
                "optional": False,
            },
            "sign": {
                "type": "string",
                "type_config": {"allowed_strings": ALLOWED_SIGN_STRINGS},
                "doc": "The branch: t ~ sign * 2 (lambda - lambda_2p) / (b^2 - 1).",
                "optional": False,
                "default": "+",
            },
            "a_min": {
                "type": "float",
                "doc": "The start of the a-range.",
                "optional": False,
            },
            "a_max": {
                "type": "float",
                "doc": "The end of the a-range.",
                "optional": False,
            },
            "steps": {
                "type": "integer",
                "doc": "The number of samples.",
                "optional": False,
                "default": 12,
            },
            "blocks": {
                "type": "integer",
                "doc": "The number of retained Fourier blocks.",
                "optional": False,
                "default": 32,
            },
            "grid_size": {
                "type": "integer",
                "doc": "The number of quadrature nodes.",
                "optional": False,
                "default": 256,
            },
        }
        return inputs

    def create_outputs_schema(
        self,
    ) -> ValueMapSchema:

        outputs: Mapping[str, Any] = {
            "vstate_branch": {"type": "vstate_branch", "doc": "The traced branch."},
            "fitted_exponent": {
                "type": "float",
                "doc": "The exponent e of |lambda - lambda_2p| ~ C |a|^e over the smallest decade.",
                "optional": True,
            },
        }
        return outputs

    def process(self, inputs: ValueMap, outputs: ValueMap) -> None:

        from kiara_plugin.vstates.branch import trace_branch
        from kiara_plugin.vstates.exceptions import VStatesException
        from kiara_plugin.vstates.models import VStateBranch

        try:
            curve = trace_branch(
                p=inputs.get_value_data("p"),
                a_min=inputs.get_value_data("a_min"),
                a_max=inputs.get_value_data("a_max"),
                steps=inputs.get_value_data("steps"),
                sign=inputs.get_value_data("sign"),
                N=inputs.get_value_data("blocks"),
                M=inputs.get_value_data("grid_size"),
            )
        except (ValueError, VStatesException) as e:
            raise KiaraProcessingException(str(e))

        outputs.set_values(
            vstate_branch=VStateBranch.create_from_curve(curve),
            fitted_exponent=curve.fitted_exponent,
        )


class RenderShapeModule(KiaraModule):
    """Sample the two boundary curves of one V-state of a branch."""

    _module_type_name = "vstates.render.shape"

    def create_inputs_schema(
        self,
    ) -> ValueMapSchema:

        inputs: Mapping[str, Any] = {
            "vstate_branch": {
                "type": "vstate_branch",
                "doc": "The branch.",
                "optional": False,
            },
            "index": {
                "type": "integer",
                "doc": "The index of the sample.",
                "optional": False,
                "default": 0,
            },
            "grid_size": {
                "type": "integer",
                "doc": "The number of points per curve.",
                "optional": False,
                "default": 256,
            },
        }
        return inputs

    def create_outputs_schema(
        self,
    ) -> ValueMapSchema:

        outputs: Mapping[str, Any] = {
            "boundary": {
                "type": "table",
                "doc": "Boundary points with columns 'component' (1 outer, 2 inner), 'theta', 'x' and 'y'.",
            },
        }
        return outputs

    def process(self, inputs: ValueMap, outputs: ValueMap) -> None:

        from kiara.exceptions import KiaraException
        from kiara_plugin.vstates.models import VStateBranch
        from kiara_plugin.vstates.spectral import boundary_points

        branch: VStateBranch = inputs.get_value_data("vstate_branch")
        index = inputs.get_value_data("index")
        grid_size = inputs.get_value_data("grid_size")

        try:
            state = branch.sample_state(index)
            table = boundary_points(state, grid_size)
        except (ValueError, KiaraException) as e:
            raise KiaraProcessingException(str(e))

        outputs.set_value("boundary", table)

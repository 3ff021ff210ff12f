# -*- coding: utf-8 -*-
from typing import Any, Mapping

from kiara.api import KiaraModule, ValueMapSchema
from kiara.exceptions import KiaraProcessingException
from kiara.models.values.value import ValueMap
from kiara_plugin.vstates.defaults import ALLOWED_VERIFY_MODE_STRINGS

KIARA_METADATA = {
    "authors": [
        {"name": "Markus Binsteiner", "email": "markus@frkl.dev"},
    ],
    "description": "Modules to verify the jet of the reduced bifurcation equation.",
}


class VerifyJetModule(KiaraModule):
    """Compute the jet of the reduced functional F2 at the degenerate point and compare it with the closed forms.

    In 'symbolic' mode the jet is computed exactly (modulo the relation of b_2p, symbolic in 'a' up to
    order 2, at a = 0 above), in 'numeric' mode by finite differences of the Lyapunov-Schmidt
    solver, and 'both' cross-checks the two.
    """

    _module_type_name = "vstates.verify.jet"

    def create_inputs_schema(
        self,
    ) -> ValueMapSchema:

        inputs: Mapping[str, Any] = {
            "p": {
                "type": "integer",
                "doc": "The symmetry parameter (2, 3 or 4; 5 and 6 with 'experimental').",
                "optional": False,
            },
            "order": {
                "type": "integer",
                "doc": "The jet order, at most p + 1.",
                "optional": False,
                "default": 2,
            },
            "mode": {
                "type": "string",
                "type_config": {"allowed_strings": ALLOWED_VERIFY_MODE_STRINGS},
                "doc": f"How to compute the jet. Allowed values: {', '.join(ALLOWED_VERIFY_MODE_STRINGS)}.",
                "optional": False,
                "default": "symbolic",
            },
            "a": {
                "type": "float",
                "doc": "The mixing parameter for numeric jets (default: 0).",
                "optional": True,
            },
            "experimental": {
                "type": "boolean",
                "doc": "Allow p = 5, 6; the vanishing pattern is reported, not asserted.",
                "optional": False,
                "default": False,
            },
        }
        return inputs

    def create_outputs_schema(
        self,
    ) -> ValueMapSchema:

        outputs: Mapping[str, Any] = {
            "report": {
                "type": "dict",
                "doc": "The verification report, one row per derivative and component.",
            },
            "passed": {
                "type": "boolean",
                "doc": "Whether no computed value disagrees with its reference.",
            },
        }
        return outputs

    def process(self, inputs: ValueMap, outputs: ValueMap) -> None:

        from kiara_plugin.vstates.anchors import verify_jet
        from kiara_plugin.vstates.exceptions import VStatesException

        p = inputs.get_value_data("p")
        order = inputs.get_value_data("order")
        mode = inputs.get_value_data("mode")
        a = inputs.get_value_data("a")
        experimental = inputs.get_value_data("experimental")

        try:
            report = verify_jet(p, order, mode=mode, a=a, experimental=experimental)
        except (ValueError, VStatesException) as e:
            raise KiaraProcessingException(str(e))

        outputs.set_values(report=report.to_json(), passed=report.passed)

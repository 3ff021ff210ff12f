# -*- coding: utf-8 -*-
from typing import Any, Mapping

from kiara.api import KiaraModule, ValueMapSchema
from kiara.exceptions import KiaraProcessingException
from kiara.models.values.value import ValueMap

KIARA_METADATA = {
    "authors": [
        {"name": "Markus Binsteiner", "email": "markus@frkl.dev"},
    ],
    "description": "Modules for the degenerate annulus: inner radius and Fourier multipliers.",
}


class FindInnerRadiusModule(KiaraModule):
    """Isolate the degenerate inner radius b_2p, the root of b^(2p) + p b^2 - (p-1) in (0, 1).

    The root is bracketed by dyadic rationals with exact integer arithmetic, so the bracket is
    a certified enclosure of the radius at which the blocks 1 and p of the linearized
    operator degenerate simultaneously.
    """

    _module_type_name = "vstates.find.inner_radius"

    def create_inputs_schema(
        self,
    ) -> ValueMapSchema:

        inputs: Mapping[str, Any] = {
            "p": {
                "type": "integer",
                "doc": "The symmetry parameter (p >= 2).",
                "optional": False,
            },
            "precision_bits": {
                "type": "integer",
                "doc": "Width of the bracket, in bits.",
                "optional": False,
                "default": 128,
            },
        }
        return inputs

    def create_outputs_schema(
        self,
    ) -> ValueMapSchema:

        outputs: Mapping[str, Any] = {
            "inner_radius": {"type": "float", "doc": "The midpoint of the bracket."},
            "radius_interval": {
                "type": "dict",
                "doc": "The bracket, as exact rationals (numerator/denominator strings).",
            },
            "degenerate_lambda": {
                "type": "float",
                "doc": "The degenerate parameter lambda_2p = (1 + b^2) / 2.",
            },
            "angular_velocity": {
                "type": "float",
                "doc": "The angular velocity (1 - b^2) / 4 of the bifurcating V-states.",
            },
            "certified": {
                "type": "boolean",
                "doc": "Whether the relation changes sign across the bracket.",
            },
        }
        return outputs

    def process(self, inputs: ValueMap, outputs: ValueMap) -> None:

        from kiara_plugin.vstates.exactnum import find_b2p
        from kiara_plugin.vstates.exceptions import VStatesException
        from kiara_plugin.vstates.linearization import angular_velocity, lambda_degenerate

        p = inputs.get_value_data("p")
        precision_bits = inputs.get_value_data("precision_bits")

        try:
            root = find_b2p(p, precision_bits)
        except (ValueError, VStatesException) as e:
            raise KiaraProcessingException(str(e))

        lower, upper = root.interval
        relation = root.relation
        certified = lower == upper or (
            relation.evaluate_rat(lower) < 0 < relation.evaluate_rat(upper)
        )

        b = root.as_float()
        lam = lambda_degenerate(b)
        outputs.set_values(
            inner_radius=b,
            radius_interval={
                "lower": str(lower),
                "upper": str(upper),
                "precision_bits": root.precision_bits,
            },
            degenerate_lambda=lam,
            angular_velocity=angular_velocity(lam),
            certified=certified,
        )


class ComputeMultipliersModule(KiaraModule):
    """Compute the determinants of the Fourier multipliers M_2n at (lambda_2p, b_2p).

    Every determinant is reduced modulo the relation of b_2p and enclosed numerically; the
    blocks where it vanishes span the kernel of the linearized operator.
    """

    _module_type_name = "vstates.compute.multipliers"

    def create_inputs_schema(
        self,
    ) -> ValueMapSchema:

        inputs: Mapping[str, Any] = {
            "p": {
                "type": "integer",
                "doc": "The symmetry parameter (p >= 2).",
                "optional": False,
            },
            "n_max": {
                "type": "integer",
                "doc": "The largest block index.",
                "optional": False,
                "default": 50,
            },
        }
        return inputs

    def create_outputs_schema(
        self,
    ) -> ValueMapSchema:

        outputs: Mapping[str, Any] = {
            "multipliers": {
                "type": "table",
                "doc": "One row per block: n, reduced determinant, enclosure, degenerate flag.",
            },
            "kernel_dimension": {
                "type": "integer",
                "doc": "The number of degenerate blocks.",
            },
        }
        return outputs

    def process(self, inputs: ValueMap, outputs: ValueMap) -> None:

        import orjson
        import pyarrow as pa

        from kiara_plugin.vstates.exceptions import VStatesException
        from kiara_plugin.vstates.linearization import multiplier_table

        p = inputs.get_value_data("p")
        n_max = inputs.get_value_data("n_max")

        if n_max < 1:
            raise KiaraProcessingException(f"Invalid block range '{n_max}': must be >= 1.")

        try:
            rows = multiplier_table(p, n_max)
        except (ValueError, VStatesException) as e:
            raise KiaraProcessingException(str(e))

        table = pa.table(
            {
                "n": pa.array([r.n for r in rows], type=pa.int64()),
                "reduced_det": pa.array(
                    [orjson.dumps(r.reduced_det).decode() for r in rows], type=pa.string()
                ),
                "lower": pa.array([r.lower for r in rows], type=pa.float64()),
                "upper": pa.array([r.upper for r in rows], type=pa.float64()),
                "degenerate": pa.array([r.degenerate for r in rows], type=pa.bool_()),
            }
        )
        outputs.set_values(
            multipliers=table, kernel_dimension=sum(1 for r in rows if r.degenerate)
        )

# -*- coding: utf-8 -*-

"""This module contains the value type classes that are used in the ``kiara_plugin.vstates`` package.
"""
import atexit
import os
import shutil
import tempfile
from typing import TYPE_CHECKING, Any, ClassVar, Dict, Mapping, Type, Union

from rich.console import Group

from kiara.defaults import DEFAULT_PRETTY_PRINT_CONFIG
from kiara.exceptions import KiaraException
from kiara.utils.output import ArrowTabularWrap
from kiara_plugin.tabular.data_types.array import store_array
from kiara_plugin.tabular.data_types.tables import TablesType
from kiara_plugin.tabular.defaults import TABLE_COLUMN_SPLIT_MARKER
from kiara_plugin.vstates.defaults import (
    BRANCH_METADATA_KEY,
    BRANCH_SERIALIZATION_PROFILE,
    SAMPLES_TABLE_NAME,
)
from kiara_plugin.vstates.models import VStateBranch

if TYPE_CHECKING:
    from kiara.models.values.value import SerializedData, Value


class VStateBranchType(TablesType):
    """A branch of V-states bifurcating from the degenerate annulus.

    This data type extends the 'tables' type from the [kiara_plugin.tabular](https://github.com/DHARPA-Project/kiara_plugin.tabular) plugin, restricting the allowed tables to one called 'samples',
    and one called 'corrections' holding the Fourier coefficients of each sample.
    """

    _data_type_name: ClassVar[str] = "vstate_branch"
    _cached_doc: ClassVar[Union[str, None]] = None

    @classmethod
    def python_class(cls) -> Type:
        result: Type[VStateBranch] = VStateBranch
        return result

    def parse_python_obj(self, data: Any) -> VStateBranch:

        return data  # type: ignore

    def _validate(cls, value: Any) -> None:
        if not isinstance(value, VStateBranch):
            raise ValueError(
                f"Invalid type '{type(value)}': must be of 'VStateBranch' (or a sub-class)."
            )

    def _store_columns(self, data: VStateBranch, target_dir: str) -> Dict[str, Any]:

        chunk_map: Dict[str, Any] = {}
        for table_id, table in data.tables.items():
            if not table_id or TABLE_COLUMN_SPLIT_MARKER in table_id:
                raise KiaraException(f"Invalid branch table id: '{table_id}'.")

            arrow_table = table.arrow_table
            for column_name in arrow_table.column_names:
                path = os.path.join(target_dir, f"{table_id}_{column_name}")
                store_array(
                    array_obj=arrow_table.column(column_name),
                    file_name=path,
                    column_name=column_name,
                )
                key = f"{table_id}{TABLE_COLUMN_SPLIT_MARKER}{column_name}"
                chunk_map[key] = {"type": "file", "file": path, "codec": "raw"}
        return chunk_map

    def serialize(self, data: VStateBranch) -> Union[None, str, "SerializedData"]:  # type: ignore

        from kiara.models.values.value import SerializationResult

        target_dir = tempfile.mkdtemp(prefix="vstate_branch_")
        atexit.register(shutil.rmtree, target_dir, ignore_errors=True)

        chunk_map = self._store_columns(data, target_dir)
        chunk_map[BRANCH_METADATA_KEY] = {
            "type": "inline-json",
            "inline_data": {
                "p": data.p,
                "sign": data.sign,
                "b": data.b,
                "fitted_exponent": data.fitted_exponent,
                "fitted_prefactor": data.fitted_prefactor,
            },
            "codec": "json",
        }

        load_config = {
            "value_type": self.data_type_name,
            "target_profile": "python_object",
            "serialization_profile": BRANCH_SERIALIZATION_PROFILE,
        }
        return SerializationResult(
            data_type=self.data_type_name,
            data_type_config=self.type_config.model_dump(),
            data=chunk_map,
            serialization_profile=BRANCH_SERIALIZATION_PROFILE,
            metadata={
                "environment": {},
                "deserialize": {
                    "python_object": {
                        "module_type": "load.vstate_branch",
                        "module_config": load_config,
                    }
                },
            },
        )

    def pretty_print_as__terminal_renderable(
        self, value: "Value", render_config: Mapping[str, Any]
    ) -> Any:

        from rich import box
        from rich.table import Table as RichTable

        config = dict(DEFAULT_PRETTY_PRINT_CONFIG)
        config.update(render_config)
        max_rows = config.get("max_no_rows")
        edge_rows = int(max_rows / 2) if max_rows else None

        branch: VStateBranch = value.data

        details = RichTable(show_header=False, box=box.SIMPLE)
        details.add_column("Property")
        details.add_column("Value")
        details.add_row("p", str(branch.p))
        details.add_row("sign", branch.sign)
        details.add_row("b_2p", repr(branch.b))
        details.add_row("samples", str(branch.num_samples))
        details.add_row("fitted exponent", repr(branch.fitted_exponent))
        details.add_row("fitted prefactor", repr(branch.fitted_prefactor))
        details.add_row("corrections", "yes" if branch.corrections is not None else "no")

        samples = ArrowTabularWrap(branch.samples.arrow_table).as_terminal_renderable(
            rows_head=edge_rows,
            rows_tail=edge_rows,
            max_row_height=config.get("max_row_height"),
            max_cell_length=config.get("max_cell_length"),
        )
        return Group("", details, f"[b]{SAMPLES_TABLE_NAME}[/b]", samples)

# -*- coding: utf-8 -*-
from typing import Any, Dict, Mapping, Type

import orjson

from kiara.exceptions import KiaraException
from kiara.models.values.value import SerializedData
from kiara.modules.included_core_modules.serialization import DeserializeValueModule
from kiara_plugin.tabular.defaults import TABLE_COLUMN_SPLIT_MARKER
from kiara_plugin.vstates.defaults import (
    BRANCH_METADATA_KEY,
    BRANCH_SERIALIZATION_PROFILE,
    CORRECTIONS_TABLE_NAME,
    SAMPLES_TABLE_NAME,
)
from kiara_plugin.vstates.models import VStateBranch

KIARA_METADATA = {
    "authors": [
        {"name": "Markus Binsteiner", "email": "markus@frkl.dev"},
    ],
    "description": "Kiara modules for: vstates",
}


class DeserializeBranchModule(DeserializeValueModule):

    _module_type_name = "load.vstate_branch"

    @classmethod
    def retrieve_supported_target_profiles(cls) -> Mapping[str, Type]:
        return {"python_object": VStateBranch}

    @classmethod
    def retrieve_serialized_value_type(cls) -> str:
        return "vstate_branch"

    @classmethod
    def retrieve_supported_serialization_profile(cls) -> str:
        return BRANCH_SERIALIZATION_PROFILE

    def to__python_object(self, data: SerializedData, **config: Any):

        import pyarrow as pa

        tables: Dict[str, Any] = {}

        metadata_chunks = data.get_serialized_data(BRANCH_METADATA_KEY)
        chunk = next(iter(metadata_chunks.get_chunks(as_files=False)))
        branch_metadata = orjson.loads(chunk)

        for column_id in data.get_keys():

            if column_id == BRANCH_METADATA_KEY:
                continue

            if TABLE_COLUMN_SPLIT_MARKER not in column_id:
                raise KiaraException(
                    f"Invalid serialized 'vstate_branch' data, key must contain '{TABLE_COLUMN_SPLIT_MARKER}': {column_id}"
                )
            table_id, column_name = column_id.split(
                TABLE_COLUMN_SPLIT_MARKER, maxsplit=1
            )

            chunks = data.get_serialized_data(column_id)

            # TODO: support multiple chunks
            assert chunks.get_number_of_chunks() == 1
            files = list(chunks.get_chunks(as_files=True, symlink_ok=True))
            assert len(files) == 1

            file = files[0]
            with pa.memory_map(file, "r") as column_chunk:
                loaded_arrays: pa.Table = pa.ipc.open_file(column_chunk).read_all()
                column = loaded_arrays.column(column_name)
                tables.setdefault(table_id, {})[column_name] = column

        corrections = tables.get(CORRECTIONS_TABLE_NAME)
        return VStateBranch.create_from_tables(
            p=branch_metadata["p"],
            sign=branch_metadata["sign"],
            b=branch_metadata["b"],
            samples_table=pa.table(tables[SAMPLES_TABLE_NAME]),
            corrections_table=pa.table(corrections) if corrections else None,
            fitted_exponent=branch_metadata.get("fitted_exponent"),
            fitted_prefactor=branch_metadata.get("fitted_prefactor"),
        )

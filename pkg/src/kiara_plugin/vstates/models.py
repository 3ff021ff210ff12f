# -*- coding: utf-8 -*-

"""This module contains the metadata (and other) models that are used in the ``kiara_plugin.vstates`` package.

Those models are convenience wrappers that make it easier for *kiara* to find, create, manage and version metadata -- but also
other type of models -- that is attached to data, as well as *kiara* modules.

Metadata models must be a sub-class of [kiara.metadata.MetadataModel][kiara.metadata.MetadataModel]. Other models usually
sub-class a pydantic BaseModel or implement custom base classes.
"""

from typing import TYPE_CHECKING, Any, ClassVar, Dict, Iterable, List, Literal, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from kiara.exceptions import KiaraException
from kiara.models.values.value import Value
from kiara.models.values.value_metadata import ValueMetadata
from kiara_plugin.tabular.models.table import KiaraTable
from kiara_plugin.tabular.models.tables import KiaraTables
from kiara_plugin.vstates.defaults import (
    ALLOWED_OUTPUT_FORMAT_STRINGS,
    ALLOWED_SIGN_STRINGS,
    ALLOWED_VERIFY_MODE_STRINGS,
    CORRECTIONS_TABLE_NAME,
    DEFAULT_BLOCKS,
    DEFAULT_GRID_SIZE,
    DEFAULT_PRECISION_BITS,
    EXPERIMENTAL_P,
    MIN_BLOCKS,
    SAMPLES_TABLE_NAME,
    SUPPORTED_P,
)

if TYPE_CHECKING:
    from kiara_plugin.vstates.branch import BranchCurve
    from kiara_plugin.vstates.spectral import FourierState


class VStateBranch(KiaraTables):
    """A traced branch of doubly-connected V-states, one row per accepted sample."""

    _kiara_model_id: ClassVar = "instance.vstate_branch"

    @classmethod
    def create_from_tables(
        cls,
        p: int,
        sign: str,
        b: float,
        samples_table: Any,
        corrections_table: Union[Any, None] = None,
        fitted_exponent: Union[float, None] = None,
        fitted_prefactor: Union[float, None] = None,
    ) -> "VStateBranch":

        samples = KiaraTable.create_table(samples_table)
        for column in ("a", "lambda", "t", "omega", "reduced_residual", "full_residual"):
            if column not in samples.column_names:
                raise KiaraException(
                    f"Invalid branch data: '{SAMPLES_TABLE_NAME}' table does not contain a '{column}' column. Available columns: {', '.join(samples.column_names)}."
                )

        tables = {SAMPLES_TABLE_NAME: samples}
        if corrections_table is not None:
            tables[CORRECTIONS_TABLE_NAME] = KiaraTable.create_table(corrections_table)

        return cls(
            p=p,
            sign=sign,
            b=b,
            fitted_exponent=fitted_exponent,
            fitted_prefactor=fitted_prefactor,
            tables=tables,
        )

    @classmethod
    def create_from_curve(cls, curve: "BranchCurve") -> "VStateBranch":
        return cls.create_from_tables(
            p=curve.p,
            sign=curve.sign,
            b=curve.b,
            samples_table=curve.samples_table(),
            corrections_table=curve.corrections_table(),
            fitted_exponent=curve.fitted_exponent,
            fitted_prefactor=curve.fitted_prefactor,
        )

    p: int = Field(description="The symmetry parameter of the degenerate point.")
    sign: Literal["+", "-"] = Field(description="The branch of the first-component cone.")
    b: float = Field(description="The degenerate inner radius b_2p.")
    fitted_exponent: Union[float, None] = Field(
        description="Exponent e of |lambda - lambda_2p| ~ C |a|^e.", default=None
    )
    fitted_prefactor: Union[float, None] = Field(
        description="Prefactor C of |lambda - lambda_2p| ~ C |a|^e.", default=None
    )

    @property
    def samples(self) -> "KiaraTable":
        return self.tables[SAMPLES_TABLE_NAME]

    @property
    def corrections(self) -> Union["KiaraTable", None]:
        return self.tables.get(CORRECTIONS_TABLE_NAME, None)

    @property
    def num_samples(self) -> int:
        return self.samples.num_rows

    def sample_row(self, index: int) -> Dict[str, Any]:
        rows = self.samples.arrow_table.to_pylist()
        if index < 0 or index >= len(rows):
            raise KiaraException(
                f"Invalid sample index {index}: branch has {len(rows)} samples."
            )
        return rows[index]

    def sample_state(self, index: int, N: Union[int, None] = None) -> "FourierState":
        """Reconstruct the boundary perturbation ``t x_a + phi`` of one sample."""

        import numpy as np

        from kiara_plugin.vstates.linearization import kernel_state
        from kiara_plugin.vstates.spectral import FourierState

        row = self.sample_row(index)
        coefficients: Dict[int, Dict[int, float]] = {1: {}, 2: {}}
        if self.corrections is not None:
            for entry in self.corrections.arrow_table.to_pylist():
                if entry["sample"] == index:
                    coefficients[entry["component"]][entry["n"]] = entry["coefficient"]

        size = max([N or 0, DEFAULT_BLOCKS] + [n for c in coefficients.values() for n in c])
        data = np.zeros((2, size))
        for component, values in coefficients.items():
            for n, value in values.items():
                data[component - 1, n - 1] = value

        phi = FourierState(p=self.p, b=self.b, coefficients=data)
        base = kernel_state(self.p, row["a"], self.b, size).scaled(row["t"])
        return base.plus(phi)


class BranchProperties(ValueMetadata):
    """Branch stats."""

    _metadata_key: ClassVar[str] = "vstate_branch"

    number_of_samples: int = Field(description="Number of accepted samples.")
    a_range: List[float] = Field(description="Smallest and largest a of the samples.")
    max_full_residual: float = Field(description="Largest full residual of all samples.")

    @classmethod
    def retrieve_supported_data_types(cls) -> Iterable[str]:
        return ["vstate_branch"]

    @classmethod
    def create_value_metadata(cls, value: Value) -> "BranchProperties":

        branch: VStateBranch = value.data
        table = branch.samples.arrow_table
        a_values = table.column("a").to_pylist()
        residuals = table.column("full_residual").to_pylist()

        return cls(
            number_of_samples=branch.num_samples,
            a_range=[min(a_values), max(a_values)] if a_values else [],
            max_full_residual=max(residuals) if residuals else 0.0,
        )


class RunConfig(BaseModel):
    """Validated settings of one command line run."""

    subcommand: Literal["roots", "multipliers", "verify", "trace", "render"]
    p: int = Field(description="The symmetry parameter.", default=2)
    precision_bits: int = Field(description="Working precision of the root.", default=DEFAULT_PRECISION_BITS, ge=53)
    N: int = Field(description="Number of retained Fourier blocks.", default=DEFAULT_BLOCKS, ge=MIN_BLOCKS)
    M: int = Field(description="Number of quadrature nodes.", default=DEFAULT_GRID_SIZE)
    K: int = Field(description="Jet order.", default=2, ge=1)
    n_max: int = Field(description="Largest multiplier block.", default=50, ge=1)
    a: Union[float, None] = Field(description="Fixed mixing parameter.", default=None)
    a_min: Union[float, None] = None
    a_max: Union[float, None] = None
    steps: int = Field(description="Number of branch samples.", default=12, ge=2)
    sign: str = "+"
    mode: str = "symbolic"
    experimental: bool = False
    branch_path: Union[str, None] = None
    index: int = 0
    out_path: Union[str, None] = None
    format: Union[str, None] = None

    @field_validator("sign")
    @classmethod
    def _validate_sign(cls, value: str) -> str:
        if value not in ALLOWED_SIGN_STRINGS:
            raise ValueError(f"Invalid sign '{value}': must be one of {', '.join(ALLOWED_SIGN_STRINGS)}.")
        return value

    @field_validator("mode")
    @classmethod
    def _validate_mode(cls, value: str) -> str:
        if value not in ALLOWED_VERIFY_MODE_STRINGS:
            raise ValueError(
                f"Invalid mode '{value}': must be one of {', '.join(ALLOWED_VERIFY_MODE_STRINGS)}."
            )
        return value

    @field_validator("format")
    @classmethod
    def _validate_format(cls, value: Union[str, None]) -> Union[str, None]:
        if value is not None and value not in ALLOWED_OUTPUT_FORMAT_STRINGS:
            raise ValueError(
                f"Invalid format '{value}': must be one of {', '.join(ALLOWED_OUTPUT_FORMAT_STRINGS)}."
            )
        return value

    @field_validator("M")
    @classmethod
    def _validate_grid(cls, value: int) -> int:
        if value < 8 or value & (value - 1):
            raise ValueError(f"Invalid grid size {value}: must be a power of two.")
        return value

    @model_validator(mode="after")
    def _validate_combination(self) -> "RunConfig":
        allowed = SUPPORTED_P + (EXPERIMENTAL_P if self.experimental else ())
        if self.subcommand in ("verify", "trace") and self.p not in allowed:
            raise ValueError(
                f"Invalid p={self.p} for '{self.subcommand}': must be one of {', '.join(str(x) for x in allowed)}."
            )
        if self.subcommand == "trace":
            if self.p not in SUPPORTED_P:
                raise ValueError(f"Branches are only traced for p in {SUPPORTED_P}.")
            if self.a_min is None or self.a_max is None:
                raise ValueError("'trace' needs both --a-min and --a-max.")
        if self.subcommand == "render" and not self.branch_path:
            raise ValueError("'render' needs --branch.")
        if self.M < 8 * self.N:
            raise ValueError(f"Grid size M={self.M} must be >= 8N = {8 * self.N}.")
        return self

    @property
    def output_format(self) -> str:
        if self.format:
            return self.format
        if self.out_path:
            suffix = self.out_path.rsplit(".", 1)[-1].lower()
            if suffix in ALLOWED_OUTPUT_FORMAT_STRINGS:
                return suffix
        return "json" if self.subcommand in ("roots", "verify") else "csv"

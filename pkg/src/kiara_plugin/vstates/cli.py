# -*- coding: utf-8 -*-

"""Command line interface: ``vstates roots|multipliers|verify|trace|render``.

Exit codes: 0 success, 1 verification mismatch, 2 numerical failure, 64 usage error.
"""

import sys
from typing import Any, Dict, List, Union

import click
import orjson
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table as RichTable

from kiara.utils import log_message
from kiara_plugin.vstates.defaults import (
    ALLOWED_OUTPUT_FORMAT_STRINGS,
    ALLOWED_SIGN_STRINGS,
    ALLOWED_VERIFY_MODE_STRINGS,
    DEFAULT_BLOCKS,
    DEFAULT_GRID_SIZE,
    DEFAULT_PRECISION_BITS,
    EXIT_MISMATCH,
    EXIT_NUMERICAL_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    LS_TOLERANCE,
    TOL_FULL,
    TOL_REDUCED,
)
from kiara_plugin.vstates.exceptions import VStatesException
from kiara_plugin.vstates.models import RunConfig

BRANCH_CSV_COLUMNS = ["a", "lambda", "t", "reduced_residual", "full_residual"]

console = Console()
error_console = Console(stderr=True)


def _write_json(path: str, data: Any) -> None:
    content = orjson.dumps(
        data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
    )
    with open(path, "wb") as f:
        f.write(content)
        f.write(b"\n")


def _write_csv(path: str, table: Any) -> None:
    import pyarrow.csv as csv

    csv.write_csv(table, path, write_options=csv.WriteOptions(quoting_header="none"))


def _rows_table(title: str, rows: List[Dict[str, Any]], columns: List[str]) -> RichTable:
    table = RichTable(title=title)
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*[str(row.get(column, "")) for column in columns])
    return table


def _run_roots(config: RunConfig) -> int:
    from kiara_plugin.vstates.exactnum import find_b2p
    from kiara_plugin.vstates.linearization import angular_velocity, lambda_degenerate

    root = find_b2p(config.p, config.precision_bits)
    lower, upper = root.interval
    residual = root.relation.evaluate_rat(root.midpoint)
    b = root.as_float()
    lam = lambda_degenerate(b)
    data = {
        **root.to_json(),
        "midpoint": repr(b),
        "midpoint_residual": str(abs(residual)),
        "lambda": lam,
        "omega": angular_velocity(lam),
    }

    table = RichTable(show_header=False, title=f"b_{2 * config.p}")
    table.add_column("Property")
    table.add_column("Value")
    table.add_row("lower", str(lower))
    table.add_row("upper", str(upper))
    table.add_row("midpoint", repr(b))
    table.add_row("|relation(midpoint)|", f"{float(abs(residual)):.3e}")
    table.add_row("lambda_2p", repr(lam))
    table.add_row("Omega", repr(angular_velocity(lam)))
    console.print(table)

    if config.out_path:
        _write_json(config.out_path, data)
    return EXIT_OK


def _run_multipliers(config: RunConfig) -> int:
    import pyarrow as pa

    from kiara_plugin.vstates.linearization import multiplier_table

    rows = multiplier_table(config.p, config.n_max)
    data = [row.model_dump() for row in rows]
    console.print(
        _rows_table(
            f"det M_2n(lambda_{2 * config.p}) at b_{2 * config.p}",
            [
                {"n": r.n, "enclosure": f"[{r.lower:.6e}, {r.upper:.6e}]", "degenerate": r.degenerate}
                for r in rows
            ],
            ["n", "enclosure", "degenerate"],
        )
    )

    if config.out_path:
        if config.output_format == "json":
            _write_json(config.out_path, {"p": config.p, "rows": data})
        else:
            table = pa.table(
                {
                    "n": [r.n for r in rows],
                    "reduced_det": [orjson.dumps(r.reduced_det).decode() for r in rows],
                    "lower": [r.lower for r in rows],
                    "upper": [r.upper for r in rows],
                    "degenerate": [r.degenerate for r in rows],
                }
            )
            _write_csv(config.out_path, table)
    return EXIT_OK


def _run_verify(config: RunConfig) -> int:
    from kiara_plugin.vstates.anchors import verify_jet

    report = verify_jet(
        config.p,
        config.K,
        mode=config.mode,
        a=config.a,
        experimental=config.experimental,
        N=config.N,
        M=config.M,
    )
    rows = [
        {
            "derivative": row.name,
            "component": f"y{row.component}",
            "mode": row.mode,
            "expected": "" if row.expected_value is None else f"{row.expected_value:.12g}",
            "computed": f"{row.computed_value:.12g}",
            "status": row.status.value,
        }
        for row in report.rows
    ]
    console.print(
        _rows_table(
            f"Jet of F2 at (lambda_{2 * config.p}, 0), p={config.p}",
            rows,
            ["derivative", "component", "mode", "expected", "computed", "status"],
        )
    )

    if config.out_path:
        _write_json(config.out_path, report.to_json())
    return EXIT_OK if report.passed else EXIT_MISMATCH


def _run_trace(config: RunConfig) -> int:
    import pyarrow as pa

    from kiara_plugin.vstates.branch import trace_branch
    from kiara_plugin.vstates.exactnum import find_b2p

    assert config.a_min is not None and config.a_max is not None
    curve = trace_branch(
        config.p,
        config.a_min,
        config.a_max,
        steps=config.steps,
        sign=config.sign,
        N=config.N,
        M=config.M,
    )
    rows = curve.sample_rows()
    console.print(_rows_table(f"Branch p={config.p}, sign {config.sign}", rows, BRANCH_CSV_COLUMNS))
    console.print(f"fitted exponent: {curve.fitted_exponent}, prefactor: {curve.fitted_prefactor}")

    if config.out_path:
        if config.output_format == "json":
            root = find_b2p(config.p)
            _write_json(
                config.out_path,
                {
                    "p": curve.p,
                    "sign": curve.sign,
                    "b_interval": [str(x) for x in root.interval],
                    "tolerances": {
                        "ls": LS_TOLERANCE,
                        "reduced": TOL_REDUCED,
                        "full": TOL_FULL,
                    },
                    "N": config.N,
                    "M": config.M,
                    "fitted_exponent": curve.fitted_exponent,
                    "fitted_prefactor": curve.fitted_prefactor,
                    "samples": rows,
                },
            )
        else:
            table = pa.table(
                {c: pa.array([r[c] for r in rows], type=pa.float64()) for c in BRANCH_CSV_COLUMNS}
            )
            _write_csv(config.out_path, table)
    return EXIT_OK


def _load_branch_rows(path: str) -> List[Dict[str, Any]]:
    if path.endswith(".json"):
        with open(path, "rb") as f:
            return orjson.loads(f.read())["samples"]

    import pyarrow.csv as csv

    return csv.read_csv(path).to_pylist()


def _run_render(config: RunConfig) -> int:
    from kiara_plugin.vstates.reduction import ls_solve
    from kiara_plugin.vstates.spectral import boundary_points, render_svg

    assert config.branch_path is not None
    rows = _load_branch_rows(config.branch_path)
    if config.index < 0 or config.index >= len(rows):
        raise click.UsageError(
            f"Invalid sample index {config.index}: branch has {len(rows)} samples."
        )
    row = rows[config.index]
    solution = ls_solve(row["lambda"], row["t"], row["a"], config.p, N=config.N, M=config.M)
    state = solution.state()

    out_format = config.output_format
    if not config.out_path:
        console.print(f"sample {config.index}: a={row['a']}, lambda={row['lambda']}, t={row['t']}")
        return EXIT_OK
    if out_format == "svg":
        render_svg(state, config.out_path, config.M, title=f"p={config.p}, a={row['a']:.3e}")
    elif out_format == "json":
        _write_json(config.out_path, boundary_points(state, config.M).to_pylist())
    else:
        _write_csv(config.out_path, boundary_points(state, config.M))
    return EXIT_OK


_RUNNERS = {
    "roots": _run_roots,
    "multipliers": _run_multipliers,
    "verify": _run_verify,
    "trace": _run_trace,
    "render": _run_render,
}


def dispatch(config: RunConfig) -> int:
    """Run one validated command and map failures to the exit code contract."""

    try:
        code = _RUNNERS[config.subcommand](config)
    except VStatesException as e:
        log_message("cli.dispatch.failed", subcommand=config.subcommand, reason=str(e))
        error_console.print(f"[red]Numerical failure:[/red] {e}")
        return EXIT_NUMERICAL_FAILURE
    except ValueError as e:
        error_console.print(f"[red]Invalid arguments:[/red] {e}")
        return EXIT_USAGE

    log_message("cli.dispatch.finished", subcommand=config.subcommand, exit_code=code)
    return code


def _config(subcommand: str, **values: Any) -> RunConfig:
    try:
        return RunConfig(subcommand=subcommand, **{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        raise click.UsageError(str(e))


p_option = click.option("--p", "p", type=int, default=2, show_default=True, help="The symmetry parameter.")
out_option = click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Output file.")
format_option = click.option(
    "--format", "format", type=click.Choice(ALLOWED_OUTPUT_FORMAT_STRINGS), help="Output format (default: from the file suffix)."
)
blocks_option = click.option("--N", "N", type=int, default=DEFAULT_BLOCKS, show_default=True, help="Retained Fourier blocks.")
grid_option = click.option("--M", "M", type=int, default=DEFAULT_GRID_SIZE, show_default=True, help="Quadrature nodes.")


@click.group()
def cli() -> None:
    """Degenerate bifurcation of doubly-connected V-states from the annulus."""


@cli.command()
@p_option
@click.option("--precision-bits", type=int, default=DEFAULT_PRECISION_BITS, show_default=True)
@out_option
def roots(**kwargs: Any) -> int:
    """Isolate the degenerate inner radius b_2p."""

    return dispatch(_config("roots", **kwargs))


@cli.command()
@p_option
@click.option("--n-max", type=int, default=50, show_default=True, help="Largest block index.")
@out_option
@format_option
def multipliers(**kwargs: Any) -> int:
    """Determinants of the Fourier multipliers at the degenerate point."""

    return dispatch(_config("multipliers", **kwargs))


@cli.command()
@p_option
@click.option("--order", "K", type=int, default=2, show_default=True, help="Jet order, at most p + 1.")
@click.option("--mode", type=click.Choice(ALLOWED_VERIFY_MODE_STRINGS), default="symbolic", show_default=True)
@click.option("--a", "a", type=float, help="Mixing parameter for numeric jets.")
@click.option("--experimental", is_flag=True, help="Allow p = 5, 6.")
@blocks_option
@grid_option
@out_option
def verify(**kwargs: Any) -> int:
    """Compare the jet of the reduced functional with its closed forms."""

    return dispatch(_config("verify", **kwargs))


@cli.command()
@p_option
@click.option("--sign", type=click.Choice(ALLOWED_SIGN_STRINGS), default="+", show_default=True)
@click.option("--a-min", type=float, required=True)
@click.option("--a-max", type=float, required=True)
@click.option("--steps", type=int, default=12, show_default=True)
@blocks_option
@grid_option
@out_option
@format_option
def trace(**kwargs: Any) -> int:
    """Trace a branch of V-states in the mixing parameter a."""

    return dispatch(_config("trace", **kwargs))


@cli.command()
@p_option
@click.option("--branch", "branch_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--index", type=int, default=0, show_default=True)
@blocks_option
@grid_option
@out_option
@format_option
def render(**kwargs: Any) -> int:
    """Write the boundary curves of one branch sample."""

    return dispatch(_config("render", **kwargs))


def main(argv: Union[List[str], None] = None) -> int:
    try:
        result = cli.main(args=argv, prog_name="vstates", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    if isinstance(result, int):
        return result
    return EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

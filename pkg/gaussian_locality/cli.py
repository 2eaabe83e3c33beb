"""Command-line interface for gaussian-locality."""

import functools
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
from click.core import ParameterSource
from pydantic import ValidationError as PydanticValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeRemainingColumn
from rich.table import Table

from gaussian_locality import __version__
from gaussian_locality.certifier import (
    boundary_eta,
    certify_candidates,
    certify_isotropic,
    certify_separable,
    click_families,
    max_isotropic_noise,
    region_condition,
)
from gaussian_locality.chsh import evaluate_chsh, optimize_chsh
from gaussian_locality.config import Settings, load_config
from gaussian_locality.exceptions import CertificateError, ConfigError, LocalityError, ValidationError
from gaussian_locality.fock import FockOracle
from gaussian_locality.models import (
    OUTCOME_PAIRS,
    SETTING_PAIRS,
    ChshConstraint,
    ChshEvaluation,
    ChshSetting,
    SimulationReport,
    SweepConfig,
    TmssParameters,
)
from gaussian_locality.sampler import build_lhv_model, simulate
from gaussian_locality.states import GaussianStateDescriptor, load_state, lossy_tmss
from gaussian_locality.sweep import CSV_HEADER, run_sweep, summarize
from gaussian_locality.utils import (
    dump_json,
    format_duration,
    load_candidates,
    parse_complex,
    parse_grid,
    render_csv,
    write_csv,
    write_json,
)
from gaussian_locality.validators import (
    validate_config_file,
    validate_epsilon,
    validate_eta,
    validate_nu,
    validate_output_path,
    validate_sample_count,
)
from gaussian_locality.wigner import noise_threshold


console = Console(stderr=True)
logger = logging.getLogger(__name__)


# Keys accepted in a --config file, with their converters.
RUN_KEYS: Dict[str, Callable[[Any], Any]] = {
    "eta": float,
    "nu": float,
    "epsilon": float,
    "seed": int,
    "samples": int,
    "grid": str,
    "alpha0": str,
    "alpha1": str,
    "budget": int,
    "out": Path,
    "format": str,
    "workers": int,
    "optimize": bool,
    "free": bool,
    "state": Path,
    "candidates": Path,
    "eta_min": float,
    "eta_max": float,
    "nu_min": float,
    "nu_max": float,
    "route": str,
}

OUTPUT_FORMATS = ("csv", "json")
ROUTES = ("phase-space", "fock")


def setup_logging(verbose: bool = False, log_file: Optional[Path] = None) -> None:
    """Configure logging with rich handler."""
    level = logging.DEBUG if verbose else logging.INFO

    handlers: List[logging.Handler] = [
        RichHandler(
            console=console,
            show_time=True,
            show_path=verbose,
            markup=False,
            rich_tracebacks=True,
        )
    ]

    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(level=level, format="%(message)s", handlers=handlers, force=True)


def resolve_run_options(ctx: click.Context, config_path: Optional[Path], values: Dict[str, Any]) -> Dict[str, Any]:
    """Merge a flat run configuration under the command-line flags.

    Values given on the command line win; file values replace defaults.

    Raises:
        click.UsageError: On unreadable files, unknown keys or ill-typed values
    """
    if config_path is None:
        return values
    try:
        data = validate_config_file(config_path)
    except ConfigError as e:
        raise click.UsageError(_describe(e))

    unknown = sorted(set(data) - set(RUN_KEYS))
    if unknown:
        raise click.UsageError(f"Unknown configuration key '{unknown[0]}' in {config_path}")

    merged = dict(values)
    for key, raw in data.items():
        if key not in values:
            logger.debug(f"Configuration key '{key}' does not apply to this command")
            continue
        if ctx.get_parameter_source(key) == ParameterSource.COMMANDLINE:
            continue
        try:
            merged[key] = RUN_KEYS[key](raw)
        except (TypeError, ValueError):
            raise click.UsageError(f"Invalid value for '{key}' in {config_path}: {raw!r}")
    return merged


def _describe(error: LocalityError) -> str:
    details = ", ".join(f"{key}={value}" for key, value in error.details.items())
    return f"{error.message} ({details})" if details else error.message


def _checked(func: Callable[..., Any], *args: Any) -> Any:
    """Run a validator, turning its failure into a usage error."""
    try:
        return func(*args)
    except (ValidationError, PydanticValidationError) as e:
        raise click.UsageError(_describe(e) if isinstance(e, LocalityError) else str(e))


def reports_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Map package errors to exit codes: 1 for domain failures, 130 on interrupt."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except click.ClickException:
            raise
        except LocalityError as e:
            console.print(f"\n[bold red]Error:[/bold red] {e.message}")
            for key, value in e.details.items():
                console.print(f"  {key}: {value}")
            sys.exit(1)
        except KeyboardInterrupt:
            console.print("\n[yellow]Operation cancelled by user[/yellow]")
            sys.exit(130)
        except Exception as e:
            console.print(f"\n[bold red]Unexpected error:[/bold red] {e}")
            logger.exception("Unexpected error occurred")
            sys.exit(1)

    return wrapper


def run_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by every subcommand."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), help="Flat JSON/YAML run configuration; flags win"),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Artifact path (stdout when omitted)"),
        click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging"),
        click.option("--log-file", type=click.Path(dir_okay=False, path_type=Path), help="Also log to this file"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def state_options(command: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option("--eta", type=float, default=0.95, show_default=True, help="Loss transmittance"),
        click.option("--nu", type=float, default=1.4, show_default=True, help="Squeezing parameter nu >= 1"),
        click.option("--epsilon", type=float, default=0.02, show_default=True, help="Detector excitation probability"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _emit_json(payload: Any, out: Optional[Path]) -> None:
    if out is None:
        click.echo(dump_json(payload))
        return
    _checked(validate_output_path, out)
    write_json(payload, out)
    console.print(f"Wrote [cyan]{out}[/cyan]")


def _emit_csv(header: Tuple[str, ...], rows: List[List[Any]], out: Optional[Path]) -> None:
    if out is None:
        click.echo(render_csv(header, rows), nl=False)
        return
    _checked(validate_output_path, out)
    write_csv(header, rows, out)
    console.print(f"Wrote [cyan]{out}[/cyan]")


def _tmss_params(options: Dict[str, Any]) -> TmssParameters:
    return TmssParameters(eta=_checked(validate_eta, options["eta"]), nu=_checked(validate_nu, options["nu"]))


def _tmss_state(options: Dict[str, Any]) -> GaussianStateDescriptor:
    return lossy_tmss(_tmss_params(options))


def _symmetric_displacements(options: Dict[str, Any]) -> Tuple[complex, complex]:
    return (_checked(parse_complex, options["alpha0"]), _checked(parse_complex, options["alpha1"]))


def _settings() -> Settings:
    try:
        return load_config()
    except ConfigError as e:
        raise click.UsageError(_describe(e))


def _chsh_table(evaluation: ChshEvaluation) -> Table:
    table = Table(title=f"p(ab|xy), S = {evaluation.S:.6f}")
    table.add_column("xy", style="cyan")
    for a, b in OUTCOME_PAIRS:
        table.add_column(f"{'+' if a > 0 else '-'}{'+' if b > 0 else '-'}", style="green", justify="right")
    table.add_column("<ab>", style="yellow", justify="right")
    for row, (x, y) in enumerate(SETTING_PAIRS):
        cells = [f"{value:.6f}" for value in evaluation.probabilities[row]]
        table.add_row(f"{x}{y}", *cells, f"{evaluation.correlators[row]:+.6f}")
    return table


@click.group(invoke_without_command=True)
@click.pass_context
@click.version_option(version=__version__, prog_name="gaussian-locality")
def cli(ctx: click.Context) -> None:
    """Gaussian locality - certify local hidden-variable models for Gaussian states."""
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@cli.command()
@state_options
@click.option("--alpha0", default="0.12", show_default=True, help="Displacement of setting 0 (beta_0 = -alpha0)")
@click.option("--alpha1", default="-0.48", show_default=True, help="Displacement of setting 1 (beta_1 = -alpha1)")
@click.option("--state", type=click.Path(dir_okay=False, path_type=Path), help="JSON state file instead of --eta/--nu")
@click.option("--candidates", type=click.Path(dir_okay=False, path_type=Path), help="JSON list of gamma_A/gamma_B splittings to try")
@run_options
@click.pass_context
@reports_errors
def certify(ctx: click.Context, **params: Any) -> None:
    """Search for a noise-transfer certificate at one parameter point."""
    options = resolve_run_options(ctx, params.pop("config_path"), params)
    setup_logging(options["verbose"], options["log_file"])
    settings = _settings()

    epsilon = _checked(validate_epsilon, options["epsilon"])
    alphas = _symmetric_displacements(options)
    if options["state"] is not None:
        state = load_state(options["state"])
        point: Dict[str, Any] = {"state": str(options["state"])}
    else:
        state = _tmss_state(options)
        point = {"eta": options["eta"], "nu": options["nu"]}
    point["epsilon"] = epsilon

    families_a = click_families(epsilon, alphas, prefix="x")
    families_b = click_families(epsilon, [-alpha for alpha in alphas], prefix="y")

    if options["candidates"] is not None:
        candidates = load_candidates(options["candidates"])
        certificate = certify_candidates(state, families_a, families_b, candidates, settings.tolerances)
        method = "candidates"
    else:
        certificate = certify_isotropic(state, families_a, families_b, settings.tolerances)
        method = "isotropic"
    universal = certify_separable(state, settings.tolerances)

    payload: Dict[str, Any] = {
        "params": point,
        "verdict": "certified" if certificate is not None else "absent",
        "method": method,
        "t_max": max_isotropic_noise(state),
        "t_star": noise_threshold(epsilon).t_star,
        "certificate": certificate.to_json_dict() if certificate is not None else None,
        "separable_certificate": universal.to_json_dict() if universal is not None else None,
    }
    if options["state"] is None:
        payload["region_condition"] = region_condition(options["eta"], options["nu"], epsilon)
        payload["boundary_eta"] = boundary_eta(options["nu"], epsilon)

    table = Table(title="Locality certificate")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="bold")
    table.add_row("Verdict", "[green]certified" if certificate is not None else "[yellow]absent")
    table.add_row("t_max", f"{payload['t_max']:.6f}")
    table.add_row("t*(epsilon)", f"{payload['t_star']:.6f}")
    if certificate is not None:
        table.add_row("Margin", f"{certificate.margin:.3e}")
    table.add_row("Separable", "yes" if universal is not None else "no")
    console.print(table)

    _emit_json(payload, options["out"])


@cli.command()
@state_options
@click.option("--alpha0", default="0.12", show_default=True, help="Displacement of setting 0")
@click.option("--alpha1", default="-0.48", show_default=True, help="Displacement of setting 1")
@click.option("--optimize", is_flag=True, help="Maximise S over displacements")
@click.option("--free", is_flag=True, help="With --optimize, let all four complex displacements vary")
@click.option("--budget", type=int, default=None, help="Nelder-Mead evaluation budget")
@click.option("--format", "format", type=click.Choice(OUTPUT_FORMATS), default="json", show_default=True)
@click.option("--route", type=click.Choice(ROUTES), default="phase-space", show_default=True, help="Exact phase-space overlaps or the truncated Fock oracle")
@run_options
@click.pass_context
@reports_errors
def chsh(ctx: click.Context, **params: Any) -> None:
    """Compute p(ab|xy) and S for displaced click detectors."""
    options = resolve_run_options(ctx, params.pop("config_path"), params)
    setup_logging(options["verbose"], options["log_file"])
    settings = _settings()
    if options["format"] not in OUTPUT_FORMATS:
        raise click.UsageError(f"Invalid format '{options['format']}'; choose from {', '.join(OUTPUT_FORMATS)}")
    if options["route"] not in ROUTES:
        raise click.UsageError(f"Invalid route '{options['route']}'; choose from {', '.join(ROUTES)}")

    epsilon = _checked(validate_epsilon, options["epsilon"])
    state = _tmss_state(options)

    if options["optimize"]:
        optimizer = settings.optimizer
        if options["budget"] is not None:
            optimizer = optimizer.model_copy(update={"budget": options["budget"]})
        constraint = ChshConstraint.FREE if options["free"] else ChshConstraint.SYMMETRIC
        with console.status("Optimising displacements..."):
            _, evaluation = optimize_chsh(state, epsilon, constraint, optimizer)
    else:
        alpha0, alpha1 = _symmetric_displacements(options)
        setting = ChshSetting(alpha=(alpha0, alpha1), beta=(-alpha0, -alpha1), epsilon=epsilon)
        evaluation = evaluate_chsh(state, setting)

    if options["route"] == "fock":
        oracle = FockOracle(_tmss_params(options), settings.fock)
        evaluation = ChshEvaluation.from_table(evaluation.setting, oracle.table(evaluation.setting))

    console.print(_chsh_table(evaluation))
    if evaluation.violates_local_bound:
        console.print(f"[bold green]S = {evaluation.S:.4f} > 2[/bold green]")

    if options["format"] == "csv":
        rows = evaluation.csv_rows() + [["S", "", "", "", evaluation.S]]
        _emit_csv(("x", "y", "a", "b", "probability"), rows, options["out"])
    else:
        _emit_json({"params": {"eta": options["eta"], "nu": options["nu"]}, **evaluation.to_json_dict()}, options["out"])


@cli.command()
@state_options
@click.option("--alpha0", default="0.12", show_default=True, help="Displacement of setting 0")
@click.option("--alpha1", default="-0.48", show_default=True, help="Displacement of setting 1")
@click.option("--optimize", is_flag=True, help="Use the CHSH-optimal symmetric displacements")
@click.option("--samples", type=int, default=None, help="Number of trials")
@click.option("--seed", type=int, default=None, help="Root random seed")
@click.option("--workers", type=int, default=None, help="Worker threads")
@run_options
@click.pass_context
@reports_errors
def sample(ctx: click.Context, **params: Any) -> None:
    """Run the certified hidden-variable model and compare against the Born rule."""
    options = resolve_run_options(ctx, params.pop("config_path"), params)
    setup_logging(options["verbose"], options["log_file"])
    settings = _settings()

    epsilon = _checked(validate_epsilon, options["epsilon"])
    state = _tmss_state(options)
    sampler = settings.sampler.model_copy(
        update={
            key: value
            for key, value in (("samples", options["samples"]), ("seed", options["seed"]), ("max_workers", options["workers"]))
            if value is not None
        }
    )
    samples = _checked(validate_sample_count, sampler.samples)
    if options["out"] is not None:
        _checked(validate_output_path, options["out"])

    if options["optimize"]:
        setting, _ = optimize_chsh(state, epsilon, ChshConstraint.SYMMETRIC, settings.optimizer)
        alphas, betas = list(setting.alpha), list(setting.beta)
    else:
        alphas = list(_symmetric_displacements(options))
        betas = [-alpha for alpha in alphas]
    families_a = click_families(epsilon, alphas, prefix="x")
    families_b = click_families(epsilon, betas, prefix="y")

    certificate = certify_isotropic(state, families_a, families_b, settings.tolerances)
    certificate = certificate or certify_separable(state, settings.tolerances)
    if certificate is None:
        raise CertificateError(
            "No locality certificate at this point; the hidden-variable model is undefined",
            reason="uncertified",
        )

    model = build_lhv_model(certificate, state, families_a, families_b, settings.sampler.clamp_tolerance)
    start = time.perf_counter()
    with console.status(f"Simulating {samples} trials..."):
        report = simulate(model, samples, sampler.seed, sampler)
    elapsed = time.perf_counter() - start

    console.print(_report_table(report))
    console.print(f"Simulated in [blue]{format_duration(elapsed)}[/blue]")
    _emit_json(
        {
            "params": {"eta": options["eta"], "nu": options["nu"], "epsilon": epsilon},
            "setting": {"alpha": alphas, "beta": betas},
            **report.to_json_dict(),
        },
        options["out"],
    )


def _report_table(report: SimulationReport) -> Table:
    empirical_s, s_error = report.empirical_chsh()
    table = Table(title=f"Simulation ({report.samples} trials), S = {empirical_s:.4f} +/- {s_error:.4f}")
    table.add_column("xy", style="cyan")
    for a, b in OUTCOME_PAIRS:
        table.add_column(f"{'+' if a > 0 else '-'}{'+' if b > 0 else '-'} (z)", justify="right")
    for row, (x, y) in enumerate(SETTING_PAIRS):
        cells = [
            f"{report.empirical[row, col]:.5f} ({report.z_scores[row, col]:+.2f})" for col in range(4)
        ]
        table.add_row(f"{x}{y}", *cells)
    return table


@cli.command()
@click.option("--epsilon", type=float, default=0.02, show_default=True, help="Detector excitation probability")
@click.option("--grid", default="50x50", show_default=True, help="Cells as WxH (eta steps x nu steps)")
@click.option("--eta-min", type=float, default=0.0, show_default=True)
@click.option("--eta-max", type=float, default=1.0, show_default=True)
@click.option("--nu-min", type=float, default=1.0, show_default=True)
@click.option("--nu-max", type=float, default=1.5, show_default=True)
@click.option("--budget", type=int, default=200, show_default=True, help="Nelder-Mead evaluations per cell")
@click.option("--workers", type=int, default=None, help="Worker processes")
@click.option("--format", "format", type=click.Choice(OUTPUT_FORMATS), default="csv", show_default=True)
@run_options
@click.pass_context
@reports_errors
def sweep(ctx: click.Context, **params: Any) -> None:
    """Map certified and CHSH-violating regions over (eta, nu)."""
    options = resolve_run_options(ctx, params.pop("config_path"), params)
    setup_logging(options["verbose"], options["log_file"])
    settings = _settings()
    if options["format"] not in OUTPUT_FORMATS:
        raise click.UsageError(f"Invalid format '{options['format']}'; choose from {', '.join(OUTPUT_FORMATS)}")

    if options["out"] is not None:
        _checked(validate_output_path, options["out"])
    width, height = _checked(parse_grid, options["grid"])
    config = _checked(
        lambda: SweepConfig(
            eta_range=(options["eta_min"], options["eta_max"], width),
            nu_range=(options["nu_min"], options["nu_max"], height),
            epsilon=_checked(validate_epsilon, options["epsilon"]),
            optimizer_budget=options["budget"],
            max_workers=options["workers"] or settings.sweep.max_workers,
        )
    )

    start = time.perf_counter()
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
        TimeRemainingColumn(),
        console=console,
    ) as progress:
        task = progress.add_task("Evaluating cells...", total=config.cell_count)
        verdicts = run_sweep(config, settings, on_cell=lambda _: progress.advance(task))
    elapsed = time.perf_counter() - start

    table = Table(title=f"Region map ({width}x{height} cells, epsilon={config.epsilon})")
    table.add_column("Status", style="bold")
    table.add_column("Cells", justify="right")
    for status, count in summarize(verdicts).items():
        table.add_row(status, str(count))
    console.print(table)
    console.print(f"Swept in [blue]{format_duration(elapsed)}[/blue]")

    rows = [verdict.csv_row() for row in verdicts for verdict in row]
    if options["format"] == "csv":
        _emit_csv(CSV_HEADER, rows, options["out"])
    else:
        _emit_json([dict(zip(CSV_HEADER, row)) for row in rows], options["out"])


def main() -> None:
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()

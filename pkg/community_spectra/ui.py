"""Terminal UI components using Rich library.

Everything is printed to stderr; stdout is reserved for machine output.
"""

from io import StringIO
from typing import Optional

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table
from rich.text import Text

from community_spectra.models import (
    Band,
    ComparisonResult,
    DegreeStats,
    ModelSpec,
    OutlierReport,
    RecoveryResult,
    ThresholdConstants,
    Transition,
)

console = Console(stderr=True)
_logger_instance = None


def set_logger(logger):
    """Set the logger instance for dual output.

    Args:
        logger: RunLogger instance
    """
    global _logger_instance
    _logger_instance = logger


def set_quiet(quiet: bool):
    """Silence (or restore) console output."""
    console.quiet = quiet


def _log_output(renderable):
    """Mirror a renderable into the run's text log."""
    if _logger_instance:
        string_io = StringIO()
        temp_console = Console(file=string_io, width=80, legacy_windows=False)
        temp_console.print(renderable)
        _logger_instance.write_output(string_io.getvalue().rstrip())


def _show(renderable):
    console.print(renderable)
    _log_output(renderable)


def show_banner(command: str, seed: int, config_hash: Optional[str] = None):
    """Display the run header.

    Args:
        command: Subcommand being run
        seed: Random seed
        config_hash: SHA-256 of the resolved configuration
    """
    from community_spectra import __version__

    subtitle = f"v{__version__} | {command} | seed {seed}"
    if config_hash:
        subtitle += f"\nconfig {config_hash[:16]}"

    panel = Panel(
        Text(subtitle, justify="center"),
        title="[bold cyan]Community Spectra[/bold cyan]",
        border_style="cyan",
        box=box.DOUBLE
    )
    _show(panel)


def show_model(model: ModelSpec, alphas) -> None:
    """Display atoms, average degree and the alphas of <A>."""
    table = Table(title=f"Model (n={model.n}, q={model.q})", box=box.ROUNDED)
    table.add_column("#", style="cyan", justify="right")
    table.add_column("k", style="bold")
    table.add_column("weight", justify="right")
    table.add_column("group", justify="right", style="yellow")

    for idx, (atom, group) in enumerate(zip(model.atoms, model.groups)):
        vector = ", ".join(f"{v:.6g}" for v in atom.k)
        table.add_row(str(idx), f"({vector})", f"{atom.weight:.6g}", str(group))

    _show(table)

    details = f"""[bold]c[/bold]       {model.c:.8g}
[bold]2m[/bold]      {model.two_m:.8g}
[bold]alphas[/bold]  {', '.join(f'{a:.8g}' for a in alphas)}"""
    _show(Panel(details, title="[bold]Derived[/bold]", border_style="blue", box=box.ROUNDED))


def show_degree_stats(stats: list[DegreeStats], num_edges: int):
    """Display per-label degree statistics of a sample."""
    table = Table(title=f"Sampled graph ({num_edges} edges)", box=box.ROUNDED)
    table.add_column("label", style="cyan", justify="right")
    table.add_column("vertices", justify="right")
    table.add_column("mean degree", justify="right", style="green")
    table.add_column("variance", justify="right")

    for entry in stats:
        table.add_row(str(entry.label), str(entry.count), f"{entry.mean:.4f}", f"{entry.variance:.4f}")

    _show(table)


def show_band(band: Band):
    """Display band intervals."""
    lines = [f"[{lo:.6g}, {hi:.6g}]" for lo, hi in band.intervals]
    _show(Panel("\n".join(lines), title="[bold]Spectral band[/bold]", border_style="blue", box=box.ROUNDED))


def show_outliers(report: OutlierReport):
    """Display the outlier report."""
    table = Table(
        title=f"Outliers (edge {report.edge:.6g}, g_max {report.g_max:.8g})",
        box=box.ROUNDED
    )
    table.add_column("r", style="cyan", justify="right")
    table.add_column("alpha", justify="right")
    table.add_column("z", justify="right", style="bold")
    table.add_column("status")

    for entry in report.entries:
        if entry.visible:
            status = "[green]✓ visible[/green]"
        elif entry.marginal:
            status = "[yellow]⚠ marginal[/yellow]"
        else:
            status = "[dim]in band[/dim]"
        if entry.degenerate:
            status += " [yellow](degenerate)[/yellow]"
        z = f"{entry.z:.10g}" if entry.z is not None else "-"
        table.add_row(str(entry.r), f"{entry.alpha:.8g}", z, status)

    _show(table)


def show_threshold(theta: float, rows: Optional[list[dict]] = None):
    """Display the detectability threshold and an optional sweep."""
    _show(Panel(
        f"[bold]theta*[/bold]  {theta:.8g}",
        title="[bold]Detectability threshold[/bold]",
        border_style="magenta",
        box=box.ROUNDED
    ))
    if rows:
        table = Table(box=box.SIMPLE)
        table.add_column("theta", justify="right")
        table.add_column("alpha2", justify="right")
        table.add_column("visible")
        for row in rows:
            mark = "[green]✓[/green]" if row['visible'] else "[red]✗[/red]"
            table.add_row(f"{row['theta']:.6g}", f"{row['alpha2']:.6g}", mark)
        _show(table)


def show_transitions(transitions: list[Transition]):
    """Display a detectability transition sequence."""
    table = Table(title="Detectability transitions", box=box.ROUNDED)
    table.add_column("order", style="cyan", justify="right")
    table.add_column("r", justify="right")
    table.add_column("strength", justify="right", style="bold")
    for order, transition in enumerate(transitions, 1):
        table.add_row(str(order), str(transition.r), f"{transition.strength:.8g}")
    _show(table)


def show_constants(constants: ThresholdConstants):
    """Display the two-value band constants."""
    details = f"""[bold]x[/bold]            {constants.x:.12f}
[bold]y[/bold]            {constants.y:.12f}
[bold]coefficient[/bold]  {constants.coefficient:.12f}"""
    _show(Panel(details, title="[bold]Threshold constants[/bold]", border_style="blue", box=box.ROUNDED))


def show_recovery(result: RecoveryResult):
    """Display community recovery accuracy."""
    color = "green" if result.accuracy >= 0.9 else "yellow" if result.accuracy >= 0.6 else "red"
    _show(Panel(
        f"[bold]accuracy[/bold]  [{color}]{result.accuracy:.4f}[/{color}]  (q={result.q})",
        title="[bold]Community recovery[/bold]",
        border_style=color,
        box=box.ROUNDED
    ))


def show_comparison(result: ComparisonResult):
    """Display theory-versus-sample checks."""
    table = Table(title="Theory vs. sample", box=box.ROUNDED)
    table.add_column("check", style="bold")
    table.add_column("value", justify="right")
    table.add_column("limit", justify="right")
    table.add_column("", justify="center")

    def mark(ok: bool) -> str:
        return "[green]✓[/green]" if ok else "[red]✗[/red]"

    table.add_row(
        "L1 distance", f"{result.l1_distance:.4f}", f"{result.l1_tolerance}",
        mark(result.l1_distance <= result.l1_tolerance)
    )
    for idx, err in enumerate(result.outlier_errors, 1):
        table.add_row(
            f"outlier {idx} rel. error", f"{err:.4f}", f"{result.outlier_tolerance}",
            mark(err <= result.outlier_tolerance)
        )
    table.add_row(
        "eigenvalues above edge", str(result.count_above_edge), str(result.expected_visible),
        mark(result.count_above_edge == result.expected_visible)
    )
    _show(table)


def show_progress(description: str):
    """Create and return a transient spinner progress context manager.

    Args:
        description: Progress description

    Returns:
        Progress context manager
    """
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        console=console,
        transient=True
    )


def print_info(message: str):
    """Print info message."""
    console.print(f"[blue]ℹ {message}[/blue]")
    if _logger_instance:
        _logger_instance.write_output(f"ℹ {message}")


def print_success(message: str):
    """Print success message."""
    console.print(f"[green]✓ {message}[/green]")
    if _logger_instance:
        _logger_instance.write_output(f"✓ {message}")


def print_warning(message: str):
    """Print warning message."""
    console.print(f"[yellow]⚠ {message}[/yellow]")
    if _logger_instance:
        _logger_instance.write_output(f"⚠ {message}")


def print_error(message: str):
    """Print error message."""
    console.print(f"[red]✗ {message}[/red]")
    if _logger_instance:
        _logger_instance.write_output(f"✗ {message}")

"""Command-line interface: divergence tables, bound sweeps, samplers, verification.

Every command is deterministic under a fixed ``--seed`` (default 0, never
wall-clock).  Numeric cells use a fixed format so repeated runs are
byte-identical.  Options may also come from a JSON file via ``--config``;
explicit flags win over file values.
"""

from __future__ import annotations

import json
import math
import sys
import warnings
from pathlib import Path

import click
import numpy as np

from . import bounds as bounds_mod
from . import codes as codes_mod
from . import oracle as oracle_mod
from . import pfr as pfr_mod
from .distributions import DistributionPair, parse_distribution, renyi_divergence
from .errors import IterationCapError, PfrsimError, TailTooHeavyWarning
from .numerics import QuadratureSpec
from .svg import write_line_chart

_EXIT_IO = 3


def _common_options(f):
    f = click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="JSON file with default option values.")(f)
    f = click.option("--alpha-range", default=None, help="Grid as lo,hi,points.")(f)
    f = click.option("--quad-tol", type=float, default=None, help="Quadrature tolerance (absolute and relative).")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "svg", "both"]), default="csv", show_default=True)(f)
    f = click.option("--out", type=click.Path(), default=None, help="Output path (base name for --format both).")(f)
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    return f


def _apply_config(ctx: click.Context, config_path: str | None, params: dict) -> dict:
    if not config_path:
        return params
    try:
        loaded = json.loads(Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config: {exc}")
    for key, value in loaded.items():
        key = key.replace("-", "_")
        if key in params and ctx.get_parameter_source(key).name == "DEFAULT":
            params[key] = value
    return params


def _parse_pair(p_spec: str, q_spec: str) -> DistributionPair:
    try:
        return DistributionPair(parse_distribution(p_spec), parse_distribution(q_spec))
    except PfrsimError as exc:
        raise click.UsageError(str(exc))


def _quad_spec(quad_tol) -> QuadratureSpec | None:
    if quad_tol is None:
        return None
    return QuadratureSpec(abs_tol=float(quad_tol), rel_tol=float(quad_tol))


def _alpha_grid(alpha_range, pair: DistributionPair) -> np.ndarray:
    if alpha_range is None:
        return bounds_mod.default_alpha_grid(pair)
    if isinstance(alpha_range, str):
        parts = alpha_range.split(",")
        if len(parts) != 3:
            raise click.UsageError("--alpha-range must be lo,hi,points")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    else:
        lo, hi, n = float(alpha_range[0]), float(alpha_range[1]), int(alpha_range[2])
    if not (0.0 < lo < hi < 1.0) or n < 2:
        raise click.UsageError("alpha range must satisfy 0 < lo < hi < 1, points >= 2")
    return np.linspace(lo, hi, n)


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as exc:
        click.echo(f"cannot write {path}: {exc}", err=True)
        sys.exit(_EXIT_IO)


def _sweep_outputs(rows, out, fmt, title):
    import io as _io

    buf = _io.StringIO()
    bounds_mod.sweep_to_csv(rows, buf)
    csv_text = buf.getvalue()
    if fmt in ("csv", "both"):
        if out is None:
            click.echo(csv_text, nl=False)
        else:
            path = Path(out)
            if fmt == "both" or path.suffix != ".csv":
                path = path.with_suffix(".csv")
            _write_text(path, csv_text)
    if fmt in ("svg", "both"):
        if out is None:
            raise click.UsageError("--out is required for SVG output")
        alphas = [r.alpha for r in rows]
        series = [
            ("lower bound 1", alphas, [r.lb1 for r in rows]),
            ("lower bound 2", alphas, [r.lb2 for r in rows]),
            ("upper bound 1", alphas, [r.ub1 for r in rows]),
            (
                "upper bound 2",
                alphas,
                [r.ub2 if r.ub2 is not None else math.nan for r in rows],
            ),
        ]
        try:
            write_line_chart(
                Path(out).with_suffix(".svg"), title, "alpha", "bits", series
            )
        except OSError as exc:
            click.echo(f"cannot write SVG: {exc}", err=True)
            sys.exit(_EXIT_IO)
    return csv_text


@click.group()
def main() -> None:
    """Exact sampling over shared randomness: cost bounds, samplers, checks."""


@main.command()
@click.argument("p_spec")
@click.argument("q_spec")
@click.option("--order", "orders", type=float, multiple=True, required=True, help="Divergence order (repeatable).")
@click.option("--numeric", is_flag=True, help="Add a quadrature cross-check column.")
@_common_options
@click.pass_context
def divergence(ctx, p_spec, q_spec, orders, numeric, seed, out, fmt, quad_tol, alpha_range, config_path):
    """Print Renyi divergences of order ORDER between two distributions, in bits."""
    params = _apply_config(ctx, config_path, dict(quad_tol=quad_tol))
    pair = _parse_pair(p_spec, q_spec)
    spec = _quad_spec(params["quad_tol"])
    lines = ["order,bits" + (",numeric_bits" if numeric else "")]
    for order in orders:
        try:
            val = renyi_divergence(pair, order, spec)
        except PfrsimError as exc:
            raise click.UsageError(str(exc))
        row = f"{order:g},{_fmt_cell(val)}"
        if numeric:
            row += f",{_fmt_cell(renyi_divergence(pair, order, spec, force_numeric=True))}"
        lines.append(row)
    text = "\n".join(lines) + "\n"
    click.echo(text, nl=False)
    if out is not None:
        _write_text(out, text)


def _fmt_cell(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.12g}"


@main.command()
@click.argument("p_spec")
@click.argument("q_spec")
@_common_options
@click.pass_context
def sweep(ctx, p_spec, q_spec, seed, out, fmt, quad_tol, alpha_range, config_path):
    """Evaluate all four bounds over an alpha grid; write CSV and/or SVG."""
    params = _apply_config(
        ctx, config_path, dict(out=out, fmt=fmt, quad_tol=quad_tol, alpha_range=alpha_range)
    )
    pair = _parse_pair(p_spec, q_spec)
    grid = _alpha_grid(params["alpha_range"], pair)
    rows = bounds_mod.sweep(pair, grid, quad=_quad_spec(params["quad_tol"]))
    _sweep_outputs(rows, params["out"], params["fmt"], f"{p_spec} vs {q_spec}")


@main.command("entropy-figure")
@click.argument("p_spec")
@click.argument("q_spec")
@click.option("--n-max", type=int, default=1000, show_default=True, help="Index pmf truncation point.")
@_common_options
@click.pass_context
def entropy_figure(ctx, p_spec, q_spec, n_max, seed, out, fmt, quad_tol, alpha_range, config_path):
    """Bound sweep plus the truncated-pmf entropy column h_alpha_plus1."""
    params = _apply_config(
        ctx,
        config_path,
        dict(out=out, fmt=fmt, quad_tol=quad_tol, alpha_range=alpha_range, n_max=n_max),
    )
    pair = _parse_pair(p_spec, q_spec)
    quad = _quad_spec(params["quad_tol"])
    grid = _alpha_grid(params["alpha_range"], pair)
    rows = bounds_mod.sweep(pair, grid, quad=quad)
    pmf = pfr_mod.index_pmf(pair, int(params["n_max"]), quad)
    heavy = pmf.tail_mass > 1e-4
    if heavy:
        warnings.warn(
            f"tail mass {pmf.tail_mass:.3g} exceeds 1e-4; h_alpha_plus1 is only "
            "a lower bracket of the entropy",
            TailTooHeavyWarning,
            stacklevel=2,
        )
    h_col = []
    for r in rows:
        lo, hi = codes_mod.renyi_entropy(pmf, r.alpha)
        h_col.append((lo if heavy else hi) + 1.0)

    import io as _io

    buf = _io.StringIO()
    bounds_mod.sweep_to_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    lines[0] += ",h_alpha_plus1"
    for i, h in enumerate(h_col):
        lines[i + 1] += f",{_fmt_cell(h)}"
    csv_text = "\n".join(lines) + "\n"

    fmt_resolved = params["fmt"]
    out_resolved = params["out"]
    if fmt_resolved in ("csv", "both"):
        if out_resolved is None:
            click.echo(csv_text, nl=False)
        else:
            path = Path(out_resolved)
            if fmt_resolved == "both" or path.suffix != ".csv":
                path = path.with_suffix(".csv")
            _write_text(path, csv_text)
    if fmt_resolved in ("svg", "both"):
        if out_resolved is None:
            raise click.UsageError("--out is required for SVG output")
        alphas = [r.alpha for r in rows]
        series = [
            ("lower bound 1", alphas, [r.lb1 for r in rows]),
            ("lower bound 2", alphas, [r.lb2 for r in rows]),
            ("upper bound 1", alphas, [r.ub1 for r in rows]),
            ("upper bound 2", alphas, [r.ub2 if r.ub2 is not None else math.nan for r in rows]),
            ("index entropy + 1", alphas, h_col),
        ]
        try:
            write_line_chart(
                Path(out_resolved).with_suffix(".svg"),
                f"{p_spec} vs {q_spec} (N={params['n_max']})",
                "alpha",
                "bits",
                series,
            )
        except OSError as exc:
            click.echo(f"cannot write SVG: {exc}", err=True)
            sys.exit(_EXIT_IO)


@main.command()
@click.argument("p_spec")
@click.argument("q_spec")
@click.option("-n", "count", type=int, default=10, show_default=True, help="Number of draws.")
@click.option("--method", type=click.Choice(["pfr", "exact"]), default="exact", show_default=True)
@click.option("--delta", type=float, default=1e-6, show_default=True, help="Stopping slack for --method pfr.")
@_common_options
@click.pass_context
def sample(ctx, p_spec, q_spec, count, method, delta, seed, out, fmt, quad_tol, alpha_range, config_path):
    """Draw (index, accepted sample) pairs; rows are k,u_k,termination."""
    params = _apply_config(
        ctx, config_path, dict(seed=seed, out=out, count=count, method=method, delta=delta)
    )
    pair = _parse_pair(p_spec, q_spec)
    root = int(params["seed"])
    n = int(params["count"])
    lines = ["k,u_k,termination"]
    if params["method"] == "exact":
        rng = np.random.default_rng(root)
        ks, us = pfr_mod.sample_indices(pair, n, rng)
        for k, u in zip(ks, us):
            u_cell = f"{int(u)}" if pair.is_finite_kind else f"{u:.17g}"
            lines.append(f"{int(k)},{u_cell},exact")
    else:
        for i in range(n):
            rng = pfr_mod.derive_stream(root, i)
            try:
                outcome = pfr_mod.run_pfr(pair, rng, delta=float(params["delta"]))
            except IterationCapError:
                lines.append(",,iteration_cap")
                continue
            u = outcome.accepted
            u_cell = f"{int(u)}" if pair.is_finite_kind else f"{u:.17g}"
            lines.append(f"{outcome.index},{u_cell},{outcome.termination}")
    text = "\n".join(lines) + "\n"
    if params["out"] is None:
        click.echo(text, nl=False)
    else:
        _write_text(params["out"], text)


@main.command()
@click.option("--only", type=click.Choice(oracle_mod.CHECK_NAMES), default=None, help="Run a single check family.")
@click.option("--samples", type=int, default=10**6, show_default=True, help="Monte Carlo sample count per pair.")
@click.option("--corrupt-c1", is_flag=True, hidden=True, help="Deliberately break the first upper bound's constant (negative control).")
@_common_options
@click.pass_context
def verify(ctx, only, samples, corrupt_c1, seed, out, fmt, quad_tol, alpha_range, config_path):
    """Run the verification suite; exits nonzero if any check fails."""
    params = _apply_config(ctx, config_path, dict(seed=seed, samples=samples, only=only))
    reports = oracle_mod.run_suite(
        seed=int(params["seed"]),
        n_samples=int(params["samples"]),
        only=params["only"],
        c1_offset=-8.0 if corrupt_c1 else 0.0,
    )
    for r in reports:
        click.echo(r.line())
    failures = sum(not r.passed for r in reports)
    click.echo(f"{len(reports) - failures}/{len(reports)} checks passed")
    if failures:
        sys.exit(1)


if __name__ == "__main__":
    main()

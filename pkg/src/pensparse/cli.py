"""Command-line front end: fit, median, emlift, and bench subcommands.

All results go to --out (or stdout) as deterministic text/CSV/JSON with
reals at 12 significant digits; diagnostics go to stderr. Exit codes:
0 success, 2 usage error, 1 runtime failure.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import bench as bench_mod
from . import emlift as emlift_mod
from .exceptions import NumericalError
from .penalties import PUBLIC_FAMILIES, PenaltySpec
from .postmedian import Normal, SpikeSlabPrior, analytic_median, marginal_posterior
from .solver import RegressionModel, decompose, iterate, k_step


def _fmt(x: float) -> str:
    return "%.12g" % x


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


@click.group()
def cli():
    """Penalized sparse regression and posterior-median thresholding."""


@cli.command()
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False),
              help="CSV with header y,x1,...,xp.")
@click.option("--penalty", required=True, type=click.Choice(PUBLIC_FAMILIES))
@click.option("--lambda", "lam", required=True, type=float)
@click.option("--a", "shape_a", type=float, default=3.7, show_default=True,
              help="SCAD shape.")
@click.option("--k", type=int, default=None,
              help="Number of surrogate steps; omit to iterate to convergence.")
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--max-iter", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def fit(data, penalty, lam, shape_a, k, tol, max_iter, out):
    """Single penalized fit; writes per-coordinate CSV index,beta."""
    arr = np.loadtxt(data, delimiter=",", skiprows=1, ndmin=2)
    if arr.shape[1] < 2:
        raise ValueError("data needs a response column and at least one predictor")
    model = RegressionModel(X=arr[:, 1:], y=arr[:, 0])
    spec = PenaltySpec(family=penalty, lam=lam, a=shape_a, n=model.n_obs)
    if k is None:
        result = iterate(model, spec, tol=tol, max_iter=max_iter)
    else:
        result = k_step(model, spec, k=k, tol=tol)
    lines = ["index,beta"]
    lines += [f"{j},{_fmt(b)}" for j, b in enumerate(result.beta_hat)]
    _emit("\n".join(lines) + "\n", out)
    click.echo(f"steps={result.steps_taken} converged={result.converged} "
               f"objective={_fmt(result.objective_trace[-1])}", err=True)


@cli.command()
@click.option("--pi", required=True, type=float, help="Prior atom mass at zero.")
@click.option("--sigma", required=True, type=float, help="Observation noise sd.")
@click.option("--tau", required=True, type=float, help="Slab scale.")
@click.option("--y", "y_list", required=True,
              help="Comma-separated observations, one per coordinate.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def median(pi, sigma, tau, y_list, out):
    """Posterior-median thresholding; one CSV row per coordinate."""
    ys = [float(tok) for tok in y_list.split(",") if tok.strip()]
    if not ys:
        raise ValueError("--y must contain at least one value")
    prior = SpikeSlabPrior(atom_prob=pi, slab=Normal(0.0, tau))
    lines = ["index,y,pi_y,odds,delta,branch,median"]
    for j, y in enumerate(ys):
        mix = marginal_posterior(prior, y, sigma)
        res = analytic_median(mix)
        lines.append(",".join([str(j), _fmt(y), _fmt(mix.atom_prob),
                               _fmt(res.odds), _fmt(res.delta), res.branch,
                               _fmt(res.median)]))
    _emit("\n".join(lines) + "\n", out)


@cli.command()
@click.option("--penalty", required=True,
              type=click.Choice(("l1", "log", "quadratic")),
              help="Penalty with a canonical latent candidate (scad has none).")
@click.option("--lambda", "lam", type=float, default=1.0, show_default=True)
@click.option("--n", "n_mult", type=int, default=1, show_default=True,
              help="Sample-size multiplier in the penalty block.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def emlift(penalty, lam, n_mult, out):
    """Verify the canonical latent-density candidate for a penalty; prints a
    fixed-key JSON equivalence report."""
    spec = PenaltySpec(family=penalty, lam=lam, n=n_mult)
    model = RegressionModel(X=[[1.0]], y=[0.0])
    decomp = decompose(model, spec)
    if penalty == "l1":
        h = emlift_mod.PointMass(-spec.n * spec.lam)
    elif penalty == "log":
        h = emlift_mod.NegExponential(rate=spec.second_scale)
    else:
        h = emlift_mod.fit_grid_candidate(decomp, np.linspace(-10.0, 2.0, 801),
                                          np.linspace(0.0, 3.0, 31))
    report = emlift_mod.check_equivalence(decomp, h, theta_t=[1.0],
                                          theta_grid=np.linspace(-3.0, 3.0, 101))
    record = {
        "verdict": report.verdict,
        "max_constant_deviation": float(_fmt(report.max_constant_deviation)),
        "mgf_max_rel_error": float(_fmt(report.mgf_max_rel_error)),
        "concavity_ok": report.concavity_ok,
        "mean_identity_max_error": float(_fmt(report.mean_identity_max_error)),
    }
    _emit(json.dumps(record, indent=2) + "\n", out)


@cli.command(name="bench")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Metrics CSV path; overrides the config's output key.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--allow-marginal-approx", is_flag=True, default=False,
              help="Permit marginal posterior-median on correlated designs.")
def bench(config_path, out, seed, allow_marginal_approx):
    """Run the Monte Carlo comparison described by a config file."""
    from dataclasses import replace

    config = bench_mod.read_config(
        config_path,
        allow_marginal_approx=True if allow_marginal_approx else None)
    if seed is not None:
        config = replace(config, scenario=replace(config.scenario, seed=seed))
    out = out or config.output
    if out is None:
        raise click.UsageError("no output path: pass --out or set output= in the config")
    table = bench_mod.run_experiment(config)
    bench_mod.write_metrics_csv(table, out)
    click.echo(f"wrote {len(table.rows)} method rows to {out}", err=True)
    note = bench_mod.overfit_excess_note(table)
    if note is not None:
        click.echo(note, err=True)


def main(argv=None) -> int:
    """Dispatch argv, mapping usage problems to exit 2 and runtime failures
    to exit 1; diagnostics go to stderr only."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return 2
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.exceptions.Exit as exc:  # --help
        return int(exc.exit_code)
    except click.Abort:
        return 1
    except (NumericalError, OSError, click.ClickException) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

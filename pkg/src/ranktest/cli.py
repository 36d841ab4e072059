"""Command-line front end.

Reports go to stdout as JSON (tests) or CSV (experiments); a one-line human
summary goes to stderr.  Exit status is 0 whenever the computation finished,
whatever the decision.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import __version__
from .core import Setting
from .experiments import (ExperimentKind, ExperimentSpec, Model, results_csv_text,
                          run_power_curve, write_svg)
from .genmodels import (ConstructionParams, CountDistribution, Link, PLWeights,
                        parameter_based_weights, sample_comparisons, sample_counts,
                        sample_pl_rankings)
from .io import (DataFormatError, pairwise_csv_text, ranking_csv_text, read_pairwise_csv,
                 read_ranking_csv)
from .permutation import (DEFAULT_PAIRWISE_ITERATIONS, DEFAULT_RANKING_ITERATIONS,
                          PermutationConfig, Smoothing, pairwise_permutation_test,
                          ranking_permutation_test)
from .rankbreak import BreakMethod, RankBreaker, break_arrays
from .teststat import FixedTestConfig, fixed_test

SEED_ENV = "RANKTEST_SEED"

seed_option = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0,
                           envvar=SEED_ENV, show_default=True,
                           help=f"Random seed (falls back to ${SEED_ENV}).")
workers_option = click.option("--workers", type=click.IntRange(min=1), default=1,
                              show_default=True,
                              help="Worker threads; results do not depend on this.")


def _emit(payload: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        click.echo(payload, nl=False)


def _json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _summary(report: dict) -> None:
    if report["p_value"] is not None:
        detail = f"p = {report['p_value']:.4g} (alpha = {report['alpha']})"
    else:
        detail = f"threshold = {report['threshold']:.4g}"
    verdict = "reject H0" if report["reject"] else "do not reject H0"
    click.echo(f"T = {report['statistic']:.6g}, {detail}: {verdict}", err=True)


@click.group()
@click.version_option(__version__)
def main():
    """Two-sample tests for pairwise-comparison and ranking data."""


@main.group()
def test():
    """Run a two-sample test on a CSV file."""


def _test_options(default_permutations: int):
    def wrap(f):
        for opt in reversed([
            click.option("--alpha", type=click.FloatRange(0, 1, min_open=True, max_open=True),
                         default=0.05, show_default=True),
            click.option("--permutations", "-B", type=click.IntRange(min=1),
                         default=default_permutations, show_default=True,
                         help="Permutation iterations (gamma)."),
            seed_option,
            click.option("--smoothing", type=click.Choice([s.value for s in Smoothing]),
                         default=Smoothing.PAPER_EXACT.value, show_default=True),
            click.option("--fixed-threshold", is_flag=True,
                         help="Use the Chebyshev threshold instead of permutations."),
            click.option("--nu", type=click.FloatRange(0, 1, min_open=True, max_open=True),
                         default=1 / 3, show_default=True,
                         help="Total error target for the fixed threshold."),
            click.option("--paper-exact", is_flag=True,
                         help="Fixed threshold 11 d instead of d sqrt(24 (2 - nu) / nu)."),
            workers_option,
            click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
                         help="Write the JSON report here instead of stdout."),
        ]):
            f = opt(f)
        return f
    return wrap


def _run_test(x, y, *, alpha, permutations, seed, smoothing, fixed_threshold, nu, paper_exact,
              workers, permutation_fn, out=None):
    if fixed_threshold:
        report = fixed_test(x, y, FixedTestConfig(nu=nu, paper_exact=paper_exact))
    else:
        cfg = PermutationConfig(iterations=permutations, alpha=alpha, seed=seed,
                                smoothing=smoothing, workers=workers)
        report = permutation_fn(cfg)
    out = report.to_dict()
    out.update({
        "method": "fixed-threshold" if fixed_threshold else "permutation",
        "alpha": alpha,
        "permutations": None if fixed_threshold else permutations,
        "smoothing": None if fixed_threshold else Smoothing(smoothing).value,
        "nu": nu if fixed_threshold else None,
        "paper_exact": paper_exact if fixed_threshold else None,
        "seed": seed,
    })
    out.pop("iterations", None)
    return out


@test.command("pairwise")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--setting", type=click.Choice([s.value for s in Setting]),
              default=Setting.SYMMETRIC.value, show_default=True)
@click.option("--drop-ties", is_flag=True, help="Discard rows whose result is 'draw'.")
@_test_options(DEFAULT_PAIRWISE_ITERATIONS)
def test_pairwise(path, setting, drop_ties, **kw):
    """Test whether two populations of pairwise comparisons differ."""
    try:
        data = read_pairwise_csv(path, setting, drop_ties=drop_ties)
        x, y = data.p, data.q
        report = _run_test(x, y, **kw, permutation_fn=lambda cfg: pairwise_permutation_test(x, y, cfg))
    except (DataFormatError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    report.update({
        "command": "test pairwise",
        "input": str(path),
        "setting": Setting(setting).value,
        "d": x.d,
        "items": list(data.items),
        "samples": {"P": x.n_comparisons, "Q": y.n_comparisons},
        "dropped_draws": data.dropped_draws,
        "rank_breaking": None,
    })
    _emit(_json(report), kw["out"])
    _summary(report)


@test.command("ranking")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--rank-breaking", type=click.Choice([m.value for m in BreakMethod]),
              default=BreakMethod.COMPLETE.value, show_default=True)
@_test_options(DEFAULT_RANKING_ITERATIONS)
def test_ranking(path, rank_breaking, **kw):
    """Test whether two populations of (partial) rankings differ."""
    breaker = RankBreaker(rank_breaking)
    try:
        data = read_ranking_csv(path)
        s_p, s_q = data.p, data.q
        if len(s_p) == 0 or len(s_q) == 0:
            raise ValueError("both populations need at least one ranking")
        if kw["fixed_threshold"]:
            rng = np.random.default_rng(kw["seed"])
            x = break_arrays(breaker.method, s_p.flat, rng)
            y = break_arrays(breaker.method, s_q.flat, rng)
        else:
            x = y = None
        report = _run_test(x, y, **kw, permutation_fn=lambda cfg: ranking_permutation_test(
            s_p, s_q, breaker, cfg))
    except (DataFormatError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    report.update({
        "command": "test ranking",
        "input": str(path),
        "setting": Setting.SYMMETRIC.value,
        "d": s_p.d,
        "items": list(data.items),
        "samples": {"P": len(s_p), "Q": len(s_q)},
        "dropped_draws": None,
        "rank_breaking": breaker.method.value,
    })
    _emit(_json(report), kw["out"])
    _summary(report)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise click.BadParameter(f"not a comma-separated list of numbers: {text!r}") from exc


def _experiment_options(f):
    for opt in reversed([
        click.option("--d", "d", type=click.IntRange(min=2), default=20, show_default=True),
        click.option("--epsilon", type=float, default=None,
                     help="Scaled Frobenius separation (default 0.05)."),
        click.option("--epsilon2", type=float, default=None,
                     help="Give epsilon squared instead of epsilon."),
        click.option("--a", "a", type=click.FloatRange(0, 1, min_open=True), default=1.0,
                     show_default=True, help="Binomial(n, a) success probability."),
        click.option("--sweep", default="0.5,1,2,4,8", show_default=True,
                     help="Comma-separated scaling values c; n = c / (a d epsilon^2)."),
        click.option("--setting", type=click.Choice([s.value for s in Setting]), default=None,
                     help="Default: asymmetric for power-curve, symmetric for compare-models."),
        click.option("--null", "null", is_flag=True, help="Sample both populations from P."),
        click.option("--alpha", type=click.FloatRange(0, 1, min_open=True, max_open=True),
                     default=0.05, show_default=True),
        click.option("--permutations", "-B", type=click.IntRange(min=1),
                     default=DEFAULT_PAIRWISE_ITERATIONS, show_default=True),
        click.option("--smoothing", type=click.Choice([s.value for s in Smoothing]),
                     default=Smoothing.PAPER_EXACT.value, show_default=True),
        click.option("--trials", type=click.IntRange(min=1), default=400, show_default=True),
        seed_option,
        workers_option,
        click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
                     help="Write the results CSV here instead of stdout."),
        click.option("--svg", type=click.Path(dir_okay=False), default=None,
                     help="Also draw the curve(s) to this SVG file."),
    ]):
        f = opt(f)
    return f


def _epsilon(epsilon, epsilon2) -> float:
    if epsilon is not None and epsilon2 is not None:
        raise click.UsageError("give --epsilon or --epsilon2, not both")
    if epsilon2 is not None:
        return math.sqrt(epsilon2)
    return 0.05 if epsilon is None else epsilon


def _run_experiment(kind, *, d, epsilon, epsilon2, a, sweep, setting, null, alpha, permutations,
                    smoothing, trials, seed, workers, out, svg, **extra):
    default_setting = Setting.ASYMMETRIC if kind is ExperimentKind.POWER_CURVE else Setting.SYMMETRIC
    try:
        spec = ExperimentSpec(kind=kind, d=d, epsilon=_epsilon(epsilon, epsilon2), a=a,
                              sweep=_parse_grid(sweep), setting=setting or default_setting,
                              null=null, alpha=alpha, permutations=permutations,
                              smoothing=smoothing, trials=trials, seed=seed, workers=workers,
                              **extra)
        points = run_power_curve(spec)
    except (ValueError, RuntimeError) as exc:
        raise click.ClickException(str(exc)) from exc
    _emit(results_csv_text(points), out)
    if svg:
        write_svg(points, svg, alpha=alpha)
    best = max(points, key=lambda pt: pt.sweep)
    click.echo(f"{len(points)} grid points x {trials} trials; power at c={best.sweep:g}: "
               f"{best.power:.3f}", err=True)


@main.command("power-curve")
@click.option("--model", type=click.Choice([m.value for m in Model]),
              default=Model.MODEL_FREE.value, show_default=True)
@_experiment_options
def power_curve(model, **kw):
    """Power of the permutation test as the sample size scales."""
    _run_experiment(ExperimentKind.POWER_CURVE, model=model, **kw)


@main.command("compare-models")
@click.option("--models", default="btl,sst,model-free", show_default=True,
              help="Comma-separated generator names.")
@_experiment_options
def compare_models(models, **kw):
    """Power curves of the same test under several generating models."""
    try:
        chosen = tuple(Model(m.strip()) for m in models.split(",") if m.strip())
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--models") from exc
    _run_experiment(ExperimentKind.MODEL_COMPARISON, models=chosen, **kw)


@main.group()
def generate():
    """Write synthetic data sets in the CSV input formats."""


@generate.command("pairwise")
@click.option("--model", type=click.Choice([m.value for m in Model]),
              default=Model.MODEL_FREE.value, show_default=True)
@click.option("--d", "d", type=click.IntRange(min=2), default=20, show_default=True)
@click.option("--epsilon", type=click.FloatRange(min=0), default=0.0, show_default=True,
              help="Separation between the two populations (0 = same model).")
@click.option("--n", "n", type=click.IntRange(min=0), default=10, show_default=True)
@click.option("--a", "a", type=click.FloatRange(0, 1), default=1.0, show_default=True)
@click.option("--setting", type=click.Choice([s.value for s in Setting]),
              default=Setting.SYMMETRIC.value, show_default=True)
@seed_option
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None)
def generate_pairwise(model, d, epsilon, n, a, setting, seed, out):
    """Comparisons with Binomial(n, a) counts per pair slot."""
    from .experiments import generate_pair
    rng = np.random.default_rng(seed)
    try:
        p, q = generate_pair(Model(model), d, epsilon, Setting(setting), rng)
    except (ValueError, RuntimeError) as exc:
        raise click.ClickException(str(exc)) from exc
    dist = CountDistribution.binomial(n, a)
    x = sample_comparisons(p, sample_counts(dist, d, setting, rng), rng)
    y = sample_comparisons(q, sample_counts(dist, d, setting, rng), rng)
    _emit(pairwise_csv_text(x, y), out)


@generate.command("ranking")
@click.option("--d", "d", type=click.IntRange(min=2), default=10, show_default=True)
@click.option("--epsilon", type=click.FloatRange(min=0), default=0.0, show_default=True,
              help="Separation of the pairwise marginals (0 = same model).")
@click.option("--n-rankings", type=click.IntRange(min=1), default=100, show_default=True,
              help="Rankings per population.")
@click.option("--length", type=click.IntRange(min=2), default=None,
              help="Items per ranking (default: d, i.e. total rankings).")
@seed_option
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None)
def generate_ranking(d, epsilon, n_rankings, length, seed, out):
    """Plackett-Luce rankings; population Q uses the +/-delta weight construction."""
    rng = np.random.default_rng(seed)
    m = length or d
    if m > d:
        raise click.BadParameter("length cannot exceed d", param_hint="--length")
    try:
        w_q, _ = parameter_based_weights(ConstructionParams(d, epsilon, link=Link.BTL), rng)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    s_p = sample_pl_rankings(PLWeights(tuple(np.zeros(d))), n_rankings, m, rng)
    s_q = sample_pl_rankings(PLWeights(tuple(w_q)), n_rankings, m, rng)
    _emit(ranking_csv_text(s_p, s_q), out)


if __name__ == "__main__":  # pragma: no cover
    main()

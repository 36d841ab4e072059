"""Monte-Carlo power curves for the pairwise permutation test.

Each (grid point, trial) pair gets its own seed sequence,
``SeedSequence(seed, spawn_key=(grid_index, trial))``, so results do not
depend on how trials are spread over worker threads.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy import stats

from .core import ProbabilityMatrix, Setting
from .genmodels import (ConstructionParams, CountDistribution, Link, gen_model_free,
                        gen_parameter_based, gen_sst, sample_comparisons, sample_counts)
from .permutation import PermutationConfig, Smoothing, pairwise_permutation_test

RESULT_COLUMNS = ("sweep", "trials", "rejections", "power", "ci_lo", "ci_hi")


class Model(str, enum.Enum):
    MODEL_FREE = "model-free"
    BTL = "btl"
    THURSTONE = "thurstone"
    SST = "sst"


class ExperimentKind(str, enum.Enum):
    PAIRWISE_TEST = "pairwise-test"
    RANKING_TEST = "ranking-test"
    POWER_CURVE = "power-curve"
    MODEL_COMPARISON = "model-comparison"
    GENERATE = "generate"


@dataclass(frozen=True)
class ExperimentSpec:
    """Knobs for a power-curve run.

    For sweep value ``c`` the per-slot count distribution is
    Binomial(n, a) with ``n = max(1, round(c / (a d epsilon^2)))``.  With
    ``null=True`` the data come from P = Q while n still scales with
    ``epsilon``.
    """

    kind: ExperimentKind = ExperimentKind.POWER_CURVE
    d: int = 20
    epsilon: float = 0.05
    a: float = 1.0
    sweep: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0, 8.0)
    model: Model = Model.MODEL_FREE
    models: tuple[Model, ...] = (Model.BTL, Model.SST, Model.MODEL_FREE)
    setting: Setting = Setting.ASYMMETRIC
    null: bool = False
    alpha: float = 0.05
    permutations: int = 5000
    smoothing: Smoothing = Smoothing.PAPER_EXACT
    trials: int = 400
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ExperimentKind(self.kind))
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "models", tuple(Model(m) for m in self.models))
        object.__setattr__(self, "setting", Setting(self.setting))
        object.__setattr__(self, "smoothing", Smoothing(self.smoothing))
        object.__setattr__(self, "sweep", tuple(float(c) for c in self.sweep))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.sweep or any(c <= 0 or not math.isfinite(c) for c in self.sweep):
            raise ValueError("sweep values must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon sets the sample-size scale and must be positive; "
                             "use null=True for a size check")
        if not 0.0 < self.a <= 1.0:
            raise ValueError("a must lie in (0, 1]")
        if self.d < 2:
            raise ValueError("d must be at least 2")

    def sample_size(self, c: float) -> int:
        return max(1, int(round(c / (self.a * self.d * self.epsilon ** 2))))

    def to_dict(self) -> dict:
        out = asdict(self)
        for key, val in out.items():
            if isinstance(val, enum.Enum):
                out[key] = val.value
        out["models"] = [m.value for m in self.models]
        out["sweep"] = list(self.sweep)
        return out


@dataclass(frozen=True)
class PowerPoint:
    sweep: float
    trials: int
    rejections: int
    n: int = field(default=0, compare=False)
    model: Optional[Model] = None

    @property
    def power(self) -> float:
        return self.rejections / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.rejections, self.trials)


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(successes, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def generate_pair(model: Model, d: int, epsilon: float, setting: Setting,
                  rng: np.random.Generator) -> tuple[ProbabilityMatrix, ProbabilityMatrix]:
    model = Model(model)
    if model is Model.MODEL_FREE:
        return gen_model_free(d, epsilon, setting, rng)
    if Setting(setting) is not Setting.SYMMETRIC:
        raise ValueError(f"the {model.value} model is defined in the symmetric setting only")
    if model is Model.SST:
        return gen_sst(d, epsilon, rng)
    link = Link.BTL if model is Model.BTL else Link.THURSTONE
    return gen_parameter_based(ConstructionParams(d, epsilon, link=link), rng)


def run_trial(spec: ExperimentSpec, model: Model, grid_index: int, trial: int) -> bool:
    c = spec.sweep[grid_index]
    n = spec.sample_size(c)
    data_ss, perm_ss = np.random.SeedSequence(
        int(spec.seed), spawn_key=(grid_index, trial)).spawn(2)
    rng = np.random.Generator(np.random.PCG64(data_ss))
    if spec.null:
        p, _ = generate_pair(model, spec.d, 0.0, spec.setting, rng)
        q = p
    else:
        p, q = generate_pair(model, spec.d, spec.epsilon, spec.setting, rng)
    dist = CountDistribution.binomial(n, spec.a)
    x = sample_comparisons(p, sample_counts(dist, spec.d, spec.setting, rng), rng)
    y = sample_comparisons(q, sample_counts(dist, spec.d, spec.setting, rng), rng)
    perm_seed = int(perm_ss.generate_state(1, dtype=np.uint64)[0])
    cfg = PermutationConfig(iterations=spec.permutations, alpha=spec.alpha, seed=perm_seed,
                            smoothing=spec.smoothing)
    return pairwise_permutation_test(x, y, cfg).reject


def _curve(spec: ExperimentSpec, model: Model) -> list[PowerPoint]:
    tasks = [(g, t) for g in range(len(spec.sweep)) for t in range(spec.trials)]
    if spec.workers == 1:
        outcomes = [run_trial(spec, model, g, t) for g, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            outcomes = list(pool.map(lambda gt: run_trial(spec, model, *gt), tasks))
    rejects = np.asarray(outcomes, dtype=int).reshape(len(spec.sweep), spec.trials)
    return [PowerPoint(c, spec.trials, int(rejects[g].sum()), spec.sample_size(c), model)
            for g, c in enumerate(spec.sweep)]


def run_power_curve(spec: ExperimentSpec) -> list[PowerPoint]:
    """Rejection counts per sweep value (power curve) or per model and sweep value."""
    if spec.kind is ExperimentKind.POWER_CURVE:
        return _curve(spec, spec.model)
    if spec.kind is ExperimentKind.MODEL_COMPARISON:
        return [pt for m in spec.models for pt in _curve(spec, m)]
    raise ValueError(f"run_power_curve does not handle {spec.kind.value} experiments")


def _fmt(v: float) -> str:
    return repr(float(v))


def write_results_csv(points: Sequence[PowerPoint], out: TextIO) -> None:
    with_model = any(pt.model is not None for pt in points) and \
        len({pt.model for pt in points}) > 1
    w = csv.writer(out, lineterminator="\n")
    w.writerow((("model",) if with_model else ()) + RESULT_COLUMNS)
    for pt in points:
        lo, hi = pt.ci
        row = [_fmt(pt.sweep), pt.trials, pt.rejections, _fmt(pt.power), _fmt(lo), _fmt(hi)]
        w.writerow(([pt.model.value] if with_model else []) + row)


def results_csv_text(points: Sequence[PowerPoint]) -> str:
    buf = io.StringIO()
    write_results_csv(points, buf)
    return buf.getvalue()


def read_results_csv(source: TextIO) -> list[dict]:
    return list(csv.DictReader(source))


def write_svg(points: Sequence[PowerPoint], path, alpha: Optional[float] = None,
              title: str = "") -> None:
    """Power versus sweep value, one line per model, with Wilson bands."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "ranktest", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        groups: dict = {}
        for pt in points:
            groups.setdefault(pt.model, []).append(pt)
        for model, pts in groups.items():
            xs = [pt.sweep for pt in pts]
            ax.plot(xs, [pt.power for pt in pts], marker="o",
                    label=model.value if model is not None else None)
            ax.fill_between(xs, [pt.ci[0] for pt in pts], [pt.ci[1] for pt in pts], alpha=0.2)
        if alpha is not None:
            ax.axhline(alpha, color="grey", linestyle="--", linewidth=1)
        ax.set_xlabel("sample-size scaling c")
        ax.set_ylabel("power")
        ax.set_ylim(-0.02, 1.02)
        if title:
            ax.set_title(title)
        if len(groups) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

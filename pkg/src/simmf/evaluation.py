"""Rating splits, error metrics, paired t-tests, and the performance-based path weights."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from .errors import ValidationError
from .hin import RatingMatrix


@dataclass(frozen=True)
class SplitSpec:
    train_ratio: float
    trial_count: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_ratio < 1.0:
            raise ValueError(f"train_ratio must lie in (0, 1), got {self.train_ratio}")
        if self.trial_count < 1:
            raise ValueError("trial_count must be >= 1")


def split(ratings: RatingMatrix, spec: SplitSpec, trial: int) -> tuple[RatingMatrix, RatingMatrix]:
    """Uniformly partition rating entries; deterministic in (seed, trial)."""
    if not 0 <= trial < spec.trial_count:
        raise ValueError(f"trial {trial} outside [0, {spec.trial_count})")
    n = len(ratings)
    rng = np.random.default_rng([spec.seed, trial])
    perm = rng.permutation(n)
    n_train = int(round(spec.train_ratio * n))
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return ratings.subset(train_idx), ratings.subset(test_idx)


def _residuals(predictions, test: RatingMatrix) -> np.ndarray:
    pred = np.asarray(predictions, dtype=float)
    if len(test) == 0:
        raise ValidationError("empty test set")
    if pred.shape != test.values.shape:
        raise ValidationError(f"{pred.shape[0]} predictions for {len(test)} test ratings")
    return test.values - pred


def mae(predictions, test: RatingMatrix) -> float:
    return float(np.mean(np.abs(_residuals(predictions, test))))


def rmse(predictions, test: RatingMatrix) -> float:
    r = _residuals(predictions, test)
    return float(np.sqrt(np.mean(r * r)))


class TTest(NamedTuple):
    pvalue: float
    statistic: float
    degenerate: bool


def ttest(method_scores: Sequence[float], baseline_scores: Sequence[float]) -> TTest:
    """Two-tailed paired t-test on per-trial scores.

    Zero-variance differences are reported as degenerate: p = 1 when the
    differences are all zero, p = 0 when they are a nonzero constant.
    """
    a = np.asarray(method_scores, dtype=float)
    b = np.asarray(baseline_scores, dtype=float)
    if a.shape != b.shape:
        raise ValueError("score vectors differ in length")
    if len(a) < 2:
        raise ValueError("paired t-test needs at least 2 trials")
    diff = a - b
    mean = float(diff.mean())
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    if float(np.ptp(diff)) <= 1e-12 * scale:
        if abs(mean) <= 1e-12 * scale:
            return TTest(1.0, 0.0, True)
        return TTest(0.0, math.copysign(math.inf, mean), True)
    res = stats.ttest_rel(a, b)
    return TTest(float(res.pvalue), float(res.statistic), False)


def heuristic_weights(per_path_mae: Sequence[float]) -> list[float]:
    """Weights proportional to exp(max_mae - mae_l): better paths weigh more."""
    p = np.asarray(per_path_mae, dtype=float)
    if p.size == 0:
        raise ValueError("need at least one path score")
    if not np.all(np.isfinite(p)):
        raise ValueError("path scores must be finite")
    d = np.exp(p.max() - p)
    return (d / d.sum()).tolist()


def improvement(value: float, baseline: float) -> float:
    """Percent reduction of ``value`` relative to ``baseline`` (positive = better)."""
    return (baseline - value) / baseline * 100.0


# -- reports ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialResult:
    method: str
    ratio: float
    trial: int
    mae: float
    rmse: float
    seconds: float = 0.0


@dataclass(frozen=True)
class SummaryRow:
    method: str
    ratio: float
    trials: int
    mae: float
    rmse: float
    mae_improve: float | None
    rmse_improve: float | None
    mae_p: float | None
    rmse_p: float | None
    seconds: float


@dataclass
class EvalReport:
    results: list[TrialResult] = field(default_factory=list)
    complete: bool = True
    params: dict = field(default_factory=dict)

    def add(self, result: TrialResult) -> None:
        self.results.append(result)

    @property
    def methods(self) -> list[str]:
        seen = {}
        for r in self.results:
            seen.setdefault(r.method, None)
        return list(seen)

    @property
    def ratios(self) -> list[float]:
        return sorted({r.ratio for r in self.results}, reverse=True)

    def scores(self, method: str, ratio: float, metric: str) -> np.ndarray:
        rows = sorted((r for r in self.results if r.method == method and r.ratio == ratio),
                      key=lambda r: r.trial)
        return np.array([getattr(r, metric) for r in rows])

    def trials(self, method: str, ratio: float) -> list[int]:
        return sorted(r.trial for r in self.results if r.method == method and r.ratio == ratio)

    def summary(self, baseline: str | None = None) -> list[SummaryRow]:
        if baseline is not None and baseline not in self.methods:
            raise KeyError(f"baseline {baseline!r} not in report (methods: {self.methods})")
        groups = defaultdict(list)
        for r in self.results:
            groups[(r.method, r.ratio)].append(r)
        out = []
        for ratio in self.ratios:
            for method in self.methods:
                rows = groups.get((method, ratio))
                if not rows:
                    continue
                m_mae = float(np.mean([r.mae for r in rows]))
                m_rmse = float(np.mean([r.rmse for r in rows]))
                secs = float(np.mean([r.seconds for r in rows]))
                imp_mae = imp_rmse = p_mae = p_rmse = None
                if baseline is not None and (baseline, ratio) in groups:
                    base = groups[(baseline, ratio)]
                    imp_mae = improvement(m_mae, float(np.mean([r.mae for r in base])))
                    imp_rmse = improvement(m_rmse, float(np.mean([r.rmse for r in base])))
                    if method != baseline and self.trials(method, ratio) == self.trials(baseline, ratio) \
                            and len(rows) >= 2:
                        p_mae = ttest(self.scores(method, ratio, "mae"), self.scores(baseline, ratio, "mae")).pvalue
                        p_rmse = ttest(self.scores(method, ratio, "rmse"),
                                       self.scores(baseline, ratio, "rmse")).pvalue
                out.append(SummaryRow(method, ratio, len(rows), m_mae, m_rmse, imp_mae, imp_rmse,
                                      p_mae, p_rmse, secs))
        return out

    # -- CSV ----------------------------------------------------------------------------

    def write_trials_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "ratio", "trial", "mae", "rmse"])
            for r in sorted(self.results, key=lambda r: (self.methods.index(r.method), -r.ratio, r.trial)):
                w.writerow([r.method, _num(r.ratio), r.trial, _num(r.mae), _num(r.rmse)])

    def write_summary_csv(self, path, baseline: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["ratio", "method", "trials", "mae", "rmse", "mae_improve_pct", "rmse_improve_pct",
                        "mae_p", "rmse_p"])
            for s in self.summary(baseline):
                w.writerow([_num(s.ratio), s.method, s.trials, _num(s.mae), _num(s.rmse),
                            _opt(s.mae_improve), _opt(s.rmse_improve), _opt(s.mae_p), _opt(s.rmse_p)])

    def write_timing_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "ratio", "mean_seconds", "total_seconds"])
            for s in self.summary():
                total = float(sum(r.seconds for r in self.results if r.method == s.method and r.ratio == s.ratio))
                w.writerow([s.method, _num(s.ratio), f"{s.seconds:.3f}", f"{total:.3f}"])

    def write_long_csv(self, path, extra: dict[str, dict] | None = None) -> None:
        """One row per (method, ratio, metric): convenient for surface/line plots."""
        extra = extra or {}
        keys = sorted({k for d in extra.values() for k in d})
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "ratio", *keys, "metric", "value"])
            for s in self.summary():
                vals = [extra.get(s.method, {}).get(k, "") for k in keys]
                for metric in ("mae", "rmse"):
                    w.writerow([s.method, _num(s.ratio), *vals, metric, _num(getattr(s, metric))])


def _num(x: float) -> str:
    return repr(float(x))


def _opt(x) -> str:
    return "" if x is None else repr(float(x))

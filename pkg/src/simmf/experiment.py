"""Batch experiment runner: split -> similarities -> train -> evaluate, with CSV outputs.

A run is described by a YAML config (see ``simmf/recipes``).  Every
(ratio, trial) cell splits the ratings, rebuilds the rating-dependent path
similarities from the training part only, trains each configured method and
scores it on the held-out part.
"""
from __future__ import annotations

import copy
import json
import logging
import os
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .baselines import fit_mean, social_similarity
from .errors import ExperimentError, SchemaError
from .evaluation import EvalReport, SplitSpec, TrialResult, heuristic_weights, improvement, mae, rmse, split
from .hin import Dataset, RatingMatrix, load_dataset, load_schema, ratings_checksum
from .metapath import (CACHE_ENV, MetaPath, NeighborIndex, SimilarityCache, SimilarityMatrix, build_neighbor_index,
                       check_weights, fuse_similarities, parse_metapath, path_similarity, resolve_k)
from .model import RegularizationSpec, TrainConfig, train

log = logging.getLogger(__name__)

METHOD_KINDS = ("usermean", "itemmean", "pmf", "somf", "simmf")
VARIANTS = {
    "U(a)I(a)": ("average", "average"),
    "U(a)I(i)": ("average", "individual"),
    "U(i)I(a)": ("individual", "average"),
    "U(i)I(i)": ("individual", "individual"),
    "U(a)": ("average", "none"),
    "U(i)": ("individual", "none"),
    "I(a)": ("none", "average"),
    "I(i)": ("none", "individual"),
}
DUAL_VARIANTS = ("U(a)I(i)", "U(a)I(a)", "U(i)I(i)", "U(i)I(a)")


@dataclass
class MethodSpec:
    name: str
    kind: str
    user_mode: str = "none"
    item_mode: str = "none"
    alpha: float = 0.0
    beta: float = 0.0
    paths_user: list[str] | None = None
    paths_item: list[str] | None = None
    weights_user: str | list[float] | None = None
    weights_item: str | list[float] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ValueError(f"unknown method kind {self.kind!r}; expected one of {METHOD_KINDS}")
        self.alpha, self.beta = float(self.alpha), float(self.beta)

    @classmethod
    def from_dict(cls, d: dict) -> "MethodSpec":
        d = dict(d)
        variant = d.pop("variant", None)
        if variant is not None:
            if variant not in VARIANTS:
                raise ValueError(f"unknown variant {variant!r}; expected one of {list(VARIANTS)}")
            d.setdefault("user_mode", VARIANTS[variant][0])
            d.setdefault("item_mode", VARIANTS[variant][1])
            d.setdefault("kind", "simmf")
            d.setdefault("name", f"SimMF-{variant}")
        known = {f for f in cls.__dataclass_fields__}
        params = {k: d.pop(k) for k in list(d) if k not in known}
        d.setdefault("params", {}).update(params)
        if "name" not in d:
            d["name"] = d["kind"]
        return cls(**d)


@dataclass
class ExperimentConfig:
    dataset: str
    methods: list[MethodSpec]
    name: str = "experiment"
    schema: str | None = None
    baseline: str | None = "PMF"
    paths_user: list[str] = field(default_factory=list)
    paths_item: list[str] = field(default_factory=list)
    weights_user: str | list[float] = "equal"
    weights_item: str | list[float] = "equal"
    k_fraction: float = 0.05
    k_user: int | None = None
    k_item: int | None = None
    individual_support: str = "topk"
    normalize_steepness: float = 1.0
    prune: float = 0.0
    ratios: list[float] = field(default_factory=lambda: [0.8, 0.6, 0.4, 0.2])
    trials: int = 10
    seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    aggregate: dict[str, list[str]] = field(default_factory=dict)
    heuristic_validation: float = 0.1
    out: str = "results"
    cache_dir: str | None = None
    n_jobs: int = 1
    deterministic: bool = False
    base_dir: str = "."

    def __post_init__(self):
        if not self.methods:
            raise ValueError("config lists no methods")
        if not self.ratios:
            raise ValueError("ratio grid is empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.individual_support not in ("topk", "full"):
            raise ValueError("individual_support must be 'topk' or 'full'")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate method names: {names}")
        for r in self.ratios:
            SplitSpec(r, self.trials, self.seed)

    @classmethod
    def from_dict(cls, raw: dict, base_dir=".") -> "ExperimentConfig":
        raw = copy.deepcopy(raw)
        methods = [MethodSpec.from_dict(m) for m in raw.pop("methods", [])]
        sweep = raw.pop("sweep", None)
        if sweep:
            methods.extend(expand_sweep(sweep))
        grid = raw.pop("grid", None)
        if grid:
            methods.extend(expand_grid(grid))
        paths = raw.pop("paths", {}) or {}
        weights = raw.pop("weights", {}) or {}
        k = raw.pop("k", {}) or {}
        train_cfg = TrainConfig(**(raw.pop("train", {}) or {}))
        cfg = cls(
            methods=methods,
            paths_user=list(paths.get("user", [])),
            paths_item=list(paths.get("item", [])),
            weights_user=weights.get("user", "equal"),
            weights_item=weights.get("item", "equal"),
            k_fraction=float(k.get("fraction", 0.05)),
            k_user=k.get("user"),
            k_item=k.get("item"),
            train=train_cfg,
            base_dir=str(base_dir),
            **raw,
        )
        return cfg

    def to_dict(self) -> dict:
        def method(m: MethodSpec):
            d = {"name": m.name, "kind": m.kind}
            for key in ("user_mode", "item_mode", "alpha", "beta", "paths_user", "paths_item",
                        "weights_user", "weights_item"):
                v = getattr(m, key)
                if v not in (None, "none", 0.0):
                    d[key] = v
            d.update(m.params)
            return d

        return {
            "name": self.name, "dataset": self.dataset, "schema": self.schema, "baseline": self.baseline,
            "methods": [method(m) for m in self.methods],
            "paths": {"user": self.paths_user, "item": self.paths_item},
            "weights": {"user": self.weights_user, "item": self.weights_item},
            "k": {"fraction": self.k_fraction, "user": self.k_user, "item": self.k_item},
            "individual_support": self.individual_support, "normalize_steepness": self.normalize_steepness,
            "prune": self.prune, "ratios": list(self.ratios), "trials": self.trials, "seed": self.seed,
            "train": {k: getattr(self.train, k) for k in self.train.__dataclass_fields__},
            "aggregate": self.aggregate, "heuristic_validation": self.heuristic_validation,
            "out": self.out, "n_jobs": self.n_jobs, "deterministic": self.deterministic,
        }

    def resolve(self, p: str | None) -> Path | None:
        if p is None:
            return None
        path = Path(p)
        return path if path.is_absolute() else Path(self.base_dir) / path


def expand_sweep(sweep: dict) -> list[MethodSpec]:
    """Cartesian alpha x beta grid for one variant, e.g. the U(a)I(i) surface."""
    variant = sweep.get("variant", "U(a)I(i)")
    alphas, betas = sweep.get("alpha", []), sweep.get("beta", [])
    if not alphas or not betas:
        raise ValueError("sweep grids must be non-empty")
    out = []
    for a in alphas:
        for b in betas:
            out.append(MethodSpec.from_dict({"variant": variant, "name": f"SimMF-{variant}[a={a:g},b={b:g}]",
                                             "alpha": float(a), "beta": float(b)}))
    return out


def expand_grid(grid: dict) -> list[MethodSpec]:
    """All eight regularization variants (four dual, four single-sided).

    ``mode_weights`` maps a mode to the weight used on whichever side runs
    it, e.g. ``{average: 10, individual: 0.1}``; otherwise ``alpha``/``beta``
    apply to every variant.
    """
    variants = grid.get("variants", list(VARIANTS))
    per_mode = grid.get("mode_weights") or {}
    out = []
    for v in variants:
        um, im = VARIANTS[v]
        alpha = per_mode.get(um, grid.get("alpha", 0.0)) if um != "none" else 0.0
        beta = per_mode.get(im, grid.get("beta", 0.0)) if im != "none" else 0.0
        out.append(MethodSpec.from_dict({"variant": v, "alpha": float(alpha), "beta": float(beta)}))
    return out


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return ExperimentConfig.from_dict(raw, base_dir=path.parent)


def recipe_names() -> list[str]:
    files = resources.files("simmf") / "recipes"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".yaml"))


def recipe_text(name: str) -> str:
    f = resources.files("simmf") / "recipes" / f"{name}.yaml"
    if not f.is_file():
        raise KeyError(f"no bundled recipe {name!r}; available: {recipe_names()}")
    return f.read_text(encoding="utf-8")


def load_recipe(name: str, base_dir=".") -> ExperimentConfig:
    return ExperimentConfig.from_dict(yaml.safe_load(recipe_text(name)), base_dir=base_dir)


# -- similarity plumbing --------------------------------------------------------------


class SimilarityProvider:
    """Per-split path similarities, fused groups and neighbor indexes.

    Per-path matrices are memoized only on disk (when a cache directory is
    configured) so that a large fused matrix is the only one held in memory.
    """

    def __init__(self, cfg: ExperimentConfig, dataset: Dataset, train: RatingMatrix,
                 cache: SimilarityCache | None):
        self.cfg = cfg
        self.dataset = dataset
        self.store = dataset.relation_store(train)
        base = dataset.checksum() if dataset.ratings is None else \
            _checksum_without_ratings(dataset)
        # normalization and pruning settings change the stored matrices, so they are part of the key
        self.checksum = f"{base}:{ratings_checksum(train)}:s={cfg.normalize_steepness!r}:p={cfg.prune!r}"
        self.cache = cache
        self._index: dict = {}
        self._fused: dict = {}

    def path(self, label: str) -> MetaPath:
        return parse_metapath(label, self.dataset.schema)

    def similarity(self, label: str) -> SimilarityMatrix:
        return path_similarity(self.path(label), self.store, normalize=True,
                               steepness=self.cfg.normalize_steepness, prune=self.cfg.prune,
                               cache=self.cache, checksum=self.checksum)

    def fused(self, labels: Sequence[str], weights: Sequence[float]) -> SimilarityMatrix:
        key = (tuple(labels), tuple(round(w, 15) for w in weights))
        if key not in self._fused:
            self._fused[key] = fuse_similarities((self.similarity(lab) for lab in labels), weights)
        return self._fused[key]

    def neighbors(self, labels: Sequence[str], weights: Sequence[float], k: int) -> NeighborIndex:
        key = (tuple(labels), tuple(round(w, 15) for w in weights), k)
        if key not in self._index:
            self._index[key] = build_neighbor_index(self.fused(labels, weights), k)
        return self._index[key]

    def release(self) -> None:
        if self.cfg.individual_support == "topk":
            self._fused.clear()


def _checksum_without_ratings(ds: Dataset) -> str:
    return Dataset(ds.schema, ds.relations, None, ds.ids).checksum()


def resolve_weights(spec, n_paths: int, *, seed: int = 0, heuristic=None) -> list[float]:
    """Turn ``equal`` / ``random`` / ``heuristic`` / explicit lists into path weights."""
    if isinstance(spec, (list, tuple)):
        w = [float(x) for x in spec]
        if len(w) != n_paths:
            raise ValueError(f"{len(w)} explicit weights for {n_paths} paths")
        check_weights(w)
        return w
    if spec == "equal":
        return [1.0 / n_paths] * n_paths
    if spec == "random":
        raw = np.random.default_rng([seed, n_paths]).random(n_paths)
        return (raw / raw.sum()).tolist()
    if spec == "heuristic":
        if heuristic is None:
            raise ValueError("heuristic weights requested but no per-path scores available")
        return list(heuristic)
    raise ValueError(f"unknown weight scheme {spec!r}")


# -- runner ---------------------------------------------------------------------------


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9.=,-]+", "_", name)


class Runner:
    def __init__(self, cfg: ExperimentConfig, dataset: Dataset | None = None):
        self.cfg = cfg
        if dataset is None:
            root = cfg.resolve(cfg.dataset)
            schema = load_schema(cfg.resolve(cfg.schema)) if cfg.schema else None
            dataset = load_dataset(root, schema)
        self.dataset = dataset
        if dataset.ratings is None:
            raise SchemaError("dataset has no rating relation")
        self._validate_paths()
        self.out = Path(cfg.out)
        cache_dir = cfg.cache_dir
        self.cache = SimilarityCache(cache_dir) if cache_dir else _env_cache()
        self.heuristic: dict[tuple, list[float]] = {}
        self._heuristic_log: list[dict] = []

    def _validate_paths(self):
        schema = self.dataset.schema
        for m in self.cfg.methods:
            for labels, side in ((m.paths_user or self.cfg.paths_user, self.dataset.user_type),
                                 (m.paths_item or self.cfg.paths_item, self.dataset.item_type)):
                for lab in labels:
                    p = parse_metapath(lab, schema)
                    if p.endpoint != side:
                        raise SchemaError(f"path {lab} does not start at {side}")
            needs_user = m.kind == "simmf" and m.user_mode != "none"
            needs_item = m.kind == "simmf" and m.item_mode != "none"
            if needs_user and not (m.paths_user or self.cfg.paths_user):
                raise SchemaError(f"method {m.name} regularizes users but no user paths are configured")
            if needs_item and not (m.paths_item or self.cfg.paths_item):
                raise SchemaError(f"method {m.name} regularizes items but no item paths are configured")

    def k(self, side: str) -> int:
        if side == "user":
            return resolve_k(self.dataset.counts[self.dataset.user_type], self.cfg.k_user, self.cfg.k_fraction)
        return resolve_k(self.dataset.counts[self.dataset.item_type], self.cfg.k_item, self.cfg.k_fraction)

    # -- one method -------------------------------------------------------------------

    def _side(self, m: MethodSpec, side: str, mode: str, sims: SimilarityProvider, ratio: float, trial: int):
        if mode == "none":
            return None
        labels = (m.paths_user or self.cfg.paths_user) if side == "user" else \
            (m.paths_item or self.cfg.paths_item)
        wspec = (m.weights_user or self.cfg.weights_user) if side == "user" else \
            (m.weights_item or self.cfg.weights_item)
        heur = None
        if wspec == "heuristic":
            heur = self._heuristic_weights(side, labels, ratio, sims, trial)
        weights = resolve_weights(wspec, len(labels), seed=self.cfg.seed, heuristic=heur)
        if mode == "individual" and self.cfg.individual_support == "full":
            return sims.fused(labels, weights)
        return sims.neighbors(labels, weights, self.k(side))

    def _train_cfg(self, trial: int, m: MethodSpec) -> TrainConfig:
        base = {k: getattr(self.cfg.train, k) for k in self.cfg.train.__dataclass_fields__}
        base.update({k: v for k, v in m.params.items() if k in base})
        base["seed"] = self.cfg.train.seed + 1000 * self.cfg.seed + trial
        return TrainConfig(**base)

    def fit_predict(self, m: MethodSpec, train_r: RatingMatrix, test_r: RatingMatrix,
                    sims: SimilarityProvider, ratio: float, trial: int):
        scale = self.dataset.ratings.scale
        trace = None
        if m.kind in ("usermean", "itemmean"):
            model = fit_mean(train_r, "user" if m.kind == "usermean" else "item")
            return model.predict_many(test_r.users, test_r.items, clamp=scale), None
        tcfg = self._train_cfg(trial, m)
        if m.kind == "pmf":
            reg = RegularizationSpec()
        elif m.kind == "somf":
            sim = social_similarity(self.dataset)
            index = build_neighbor_index(sim, self.k("user"))
            reg = RegularizationSpec(user_mode="average", alpha=m.alpha, user_neighbors=index)
        else:
            reg = RegularizationSpec(
                user_mode=m.user_mode, item_mode=m.item_mode, alpha=m.alpha, beta=m.beta,
                user_neighbors=self._side(m, "user", m.user_mode, sims, ratio, trial),
                item_neighbors=self._side(m, "item", m.item_mode, sims, ratio, trial),
            )
        model, trace = train(train_r, reg, tcfg)
        return model.predict_many(test_r.users, test_r.items, clamp=scale), trace

    def _heuristic_weights(self, side, labels, ratio, sims: SimilarityProvider, trial):
        """Per-path validation MAE -> performance-based weights.

        Scores come from a validation slice of the trial-0 training split at
        this ratio, so test ratings never influence the weights.
        """
        key = (side, tuple(labels), ratio)
        if key in self.heuristic:
            return self.heuristic[key]
        full = self.dataset.ratings
        tr, _ = split(full, SplitSpec(ratio, self.cfg.trials, self.cfg.seed), 0)
        fit, val = split(tr, SplitSpec(1.0 - self.cfg.heuristic_validation, 1, self.cfg.seed + 7919), 0)
        inner = SimilarityProvider(self.cfg, self.dataset, fit, self.cache)
        scores = []
        for lab in labels:
            mode = "average" if side == "user" else "individual"
            probe = MethodSpec(name=f"probe-{lab}", kind="simmf",
                               user_mode=mode if side == "user" else "none",
                               item_mode=mode if side == "item" else "none",
                               alpha=self._probe_weight("user", mode), beta=self._probe_weight("item", mode),
                               paths_user=[lab] if side == "user" else None,
                               paths_item=[lab] if side == "item" else None,
                               weights_user=[1.0], weights_item=[1.0])
            pred, _ = self.fit_predict(probe, fit, val, inner, ratio, 0)
            scores.append(mae(pred, val))
        w = heuristic_weights(scores)
        self.heuristic[key] = w
        self._heuristic_log.append({"side": side, "ratio": ratio, "paths": list(labels),
                                    "val_mae": scores, "weights": w})
        return w

    def _probe_weight(self, side, mode):
        """Weight of the first configured method running ``mode`` on ``side`` (1.0 if none)."""
        attr, mattr = ("alpha", "user_mode") if side == "user" else ("beta", "item_mode")
        for m in self.cfg.methods:
            if m.kind == "simmf" and getattr(m, mattr) == mode and getattr(m, attr) > 0:
                return float(getattr(m, attr))
        return 1.0

    # -- whole run -------------------------------------------------------------------

    def run(self) -> EvalReport:
        cfg = self.cfg
        report = EvalReport(params={"config": cfg.name})
        trace_dir = self.out / "traces"
        trace_dir.mkdir(parents=True, exist_ok=True)
        ratings = self.dataset.ratings
        try:
            for ratio in cfg.ratios:
                spec = SplitSpec(ratio, cfg.trials, cfg.seed)
                for trial in range(cfg.trials):
                    train_r, test_r = split(ratings, spec, trial)
                    sims = SimilarityProvider(cfg, self.dataset, train_r, self.cache)
                    for m in cfg.methods:
                        t0 = time.perf_counter()
                        try:
                            pred, trace = self.fit_predict(m, train_r, test_r, sims, ratio, trial)
                        except Exception as exc:
                            raise ExperimentError(f"{m.name} failed at ratio={ratio} trial={trial}: {exc}",
                                                  m.name, ratio, trial) from exc
                        secs = time.perf_counter() - t0
                        report.add(TrialResult(m.name, ratio, trial, mae(pred, test_r), rmse(pred, test_r), secs))
                        if trace is not None:
                            trace.to_csv(trace_dir / f"trace_{_safe(m.name)}_{ratio:g}_{trial}.csv")
                        log.info("%s ratio=%g trial=%d mae=%.4f (%.1fs)", m.name, ratio, trial,
                                 report.results[-1].mae, secs)
                    sims.release()
        except Exception as exc:
            report.complete = False
            self.write(report, error=str(exc))
            raise
        self.write(report)
        return report

    def write(self, report: EvalReport, error: str | None = None) -> None:
        out = self.out
        out.mkdir(parents=True, exist_ok=True)
        full = with_aggregates(report, self.cfg.aggregate)
        baseline = self.cfg.baseline if self.cfg.baseline in full.methods else None
        full.write_trials_csv(out / "trials.csv")
        full.write_summary_csv(out / "summary.csv", baseline)
        report.write_timing_csv(out / "timing.csv")
        extra = {m.name: {"alpha": m.alpha, "beta": m.beta, "kind": m.kind,
                          "variant": _variant_label(m)} for m in self.cfg.methods}
        full.write_long_csv(out / "long.csv", extra)
        with open(out / "config.resolved.yaml", "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.cfg.to_dict(), fh, sort_keys=False)
        if self._heuristic_log:
            with open(out / "heuristic_weights.json", "w", encoding="utf-8") as fh:
                json.dump(self._heuristic_log, fh, indent=2)
        status = {"complete": report.complete and error is None, "rows": len(report.results)}
        if error:
            status["error"] = error
        with open(out / "status.json", "w", encoding="utf-8") as fh:
            json.dump(status, fh, indent=2, sort_keys=True)


def _variant_label(m: MethodSpec) -> str:
    if m.kind != "simmf":
        return ""
    return RegularizationSpec(m.user_mode, m.item_mode).label


def _env_cache():
    if os.environ.get(CACHE_ENV):
        return SimilarityCache(os.environ[CACHE_ENV])
    return None


def with_aggregates(report: EvalReport, groups: dict[str, list[str]]) -> EvalReport:
    """Add best/worst/average rows over a group of methods.

    For each group ``G`` three pseudo-methods are appended: ``G-min`` (the
    member with the lowest mean of each metric), ``G-max`` (highest) and
    ``G-mean`` (trial-wise average of all members).
    """
    if not groups:
        return report
    out = EvalReport(list(report.results), report.complete, dict(report.params))
    for gname, members in groups.items():
        members = [m for m in members if m in report.methods]
        if not members:
            continue
        for ratio in report.ratios:
            present = [m for m in members if len(report.scores(m, ratio, "mae"))]
            if not present:
                continue
            trials = report.trials(present[0], ratio)
            if any(report.trials(m, ratio) != trials for m in present):
                continue
            maes = np.array([report.scores(m, ratio, "mae") for m in present])
            rmses = np.array([report.scores(m, ratio, "rmse") for m in present])
            best_mae, best_rmse = np.argmin(maes.mean(1)), np.argmin(rmses.mean(1))
            worst_mae, worst_rmse = np.argmax(maes.mean(1)), np.argmax(rmses.mean(1))
            for t_idx, t in enumerate(trials):
                out.add(TrialResult(f"{gname}-mean", ratio, t, float(maes[:, t_idx].mean()),
                                    float(rmses[:, t_idx].mean())))
                out.add(TrialResult(f"{gname}-max", ratio, t, float(maes[worst_mae, t_idx]),
                                    float(rmses[worst_rmse, t_idx])))
                out.add(TrialResult(f"{gname}-min", ratio, t, float(maes[best_mae, t_idx]),
                                    float(rmses[best_rmse, t_idx])))
    return out


def run_experiment(config: ExperimentConfig, dataset: Dataset | None = None) -> EvalReport:
    return Runner(config, dataset).run()


# -- summary formatting --------------------------------------------------------------------


@dataclass
class SummaryTable:
    rows: list
    baseline: str

    def to_text(self) -> str:
        lines = [f"{'ratio':>6} {'method':<28} {'MAE':>8} {'improve':>9} {'p(MAE)':>10} "
                 f"{'RMSE':>8} {'improve':>9} {'p(RMSE)':>10}"]
        for r in self.rows:
            lines.append(f"{r.ratio:>6.0%} {r.method:<28} {r.mae:>8.4f} {_pct(r.mae_improve):>9} "
                         f"{_p(r.mae_p):>10} {r.rmse:>8.4f} {_pct(r.rmse_improve):>9} {_p(r.rmse_p):>10}")
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        return [dict(r.__dict__) for r in self.rows]


def _pct(x) -> str:
    return "" if x is None else f"{x:+.2f}%"


def _p(x) -> str:
    return "" if x is None else f"{x:.4e}"


def report_summary(report: EvalReport, baseline: str) -> SummaryTable:
    """Per-method means with improvement over ``baseline`` and paired-t p-values."""
    if baseline not in report.methods:
        raise KeyError(f"unknown baseline {baseline!r}; report has {report.methods}")
    return SummaryTable(report.summary(baseline), baseline)


__all__ = [
    "ExperimentConfig", "MethodSpec", "Runner", "run_experiment", "report_summary", "load_config",
    "load_recipe", "recipe_names", "recipe_text", "with_aggregates", "resolve_weights", "improvement",
]

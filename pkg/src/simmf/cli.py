"""Command line entry point (``simmf`` or ``python -m simmf``)."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiment import (ExperimentConfig, MethodSpec, Runner, load_config, load_recipe, recipe_names,
                         recipe_text, report_summary, with_aggregates)


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def _labels(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simmf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file or bundled recipe")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="experiment YAML file")
    src.add_argument("--recipe", help=f"bundled recipe name ({', '.join(recipe_names())})")
    run.add_argument("--dataset", help="dataset directory (overrides the config)")
    run.add_argument("--method", help="comma-separated method kinds to keep: usermean,itemmean,pmf,somf,simmf")
    run.add_argument("--ratios", type=_floats, help="training ratios, e.g. 0.8,0.6,0.4,0.2")
    run.add_argument("--trials", type=int)
    run.add_argument("--alpha", type=float, help="user regularization weight for every SimMF/SoMF method")
    run.add_argument("--beta", type=float, help="item regularization weight for every SimMF method")
    run.add_argument("--paths-user", type=_labels)
    run.add_argument("--paths-item", type=_labels)
    run.add_argument("--weights", help="equal | heuristic | random | explicit:<w1,w2,...> "
                                       "(explicit lists user-path weights first, then item-path weights)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--seed", type=int)
    run.add_argument("--jobs", type=int, help="threads for per-path similarity computation")
    run.add_argument("--deterministic", action="store_true", help="force single-threaded execution")
    run.add_argument("--max-iters", type=int)

    sub.add_parser("recipes", help="list bundled recipes")
    show = sub.add_parser("recipe", help="print a bundled recipe")
    show.add_argument("name")

    conv = sub.add_parser("convert-movielens", help="convert raw MovieLens-1M files to the dataset format")
    conv.add_argument("source", help="directory with ratings.dat, users.dat, movies.dat")
    conv.add_argument("dest")

    synth = sub.add_parser("synth", help="write a synthetic MovieLens-shaped dataset")
    synth.add_argument("dest")
    synth.add_argument("--users", type=int, default=300)
    synth.add_argument("--items", type=int, default=200)
    synth.add_argument("--ratings", type=int, default=6000)
    synth.add_argument("--seed", type=int, default=0)
    return parser


def apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.dataset:
        cfg.dataset = str(Path(args.dataset).resolve())
    if args.method:
        keep = set(_labels(args.method))
        cfg.methods = [m for m in cfg.methods if m.kind in keep]
        for kind in keep - {m.kind for m in cfg.methods}:
            if kind == "simmf":
                raise SystemExit("--method simmf needs SimMF methods in the config")
            cfg.methods.append(MethodSpec(name={"pmf": "PMF", "usermean": "UserMean", "itemmean": "ItemMean",
                                                "somf": "SoMF"}.get(kind, kind), kind=kind))
        if not cfg.methods:
            raise SystemExit("no methods left after --method filter")
    if args.ratios:
        cfg.ratios = args.ratios
    if args.trials:
        cfg.trials = args.trials
    if args.alpha is not None:
        for m in cfg.methods:
            if m.kind in ("simmf", "somf"):
                m.alpha = args.alpha
    if args.beta is not None:
        for m in cfg.methods:
            if m.kind == "simmf":
                m.beta = args.beta
    if args.paths_user:
        cfg.paths_user = args.paths_user
    if args.paths_item:
        cfg.paths_item = args.paths_item
    if args.weights:
        if args.weights.startswith("explicit:"):
            w = _floats(args.weights.split(":", 1)[1])
            nu = len(cfg.paths_user)
            if len(w) != nu + len(cfg.paths_item):
                raise SystemExit(f"--weights explicit needs {nu + len(cfg.paths_item)} values")
            cfg.weights_user, cfg.weights_item = w[:nu], w[nu:]
        else:
            cfg.weights_user = cfg.weights_item = args.weights
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs:
        cfg.n_jobs = args.jobs
    if args.max_iters:
        cfg.train.max_iters = args.max_iters
    if args.deterministic:
        cfg.deterministic = True
        cfg.n_jobs = 1
    cfg.__post_init__()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    if args.command == "recipes":
        print("\n".join(recipe_names()))
        return 0
    if args.command == "recipe":
        sys.stdout.write(recipe_text(args.name))
        return 0
    if args.command == "convert-movielens":
        from .movielens import convert_movielens_1m
        out = convert_movielens_1m(args.source, args.dest)
        print(f"wrote {out}")
        return 0
    if args.command == "synth":
        from .hin import write_dataset
        from .synthetic import movielens_like
        ds = movielens_like(args.users, args.items, args.ratings, seed=args.seed)
        print(f"wrote {write_dataset(ds, args.dest)}")
        return 0

    cfg = load_config(args.config) if args.config else load_recipe(args.recipe, base_dir=Path.cwd())
    cfg = apply_overrides(cfg, args)
    report = Runner(cfg).run()
    full = with_aggregates(report, cfg.aggregate)
    if cfg.baseline in full.methods:
        print(report_summary(full, cfg.baseline).to_text())
    print(f"results written to {Path(cfg.out).resolve()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

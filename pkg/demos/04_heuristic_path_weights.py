"""Weight meta paths by how well each one does on its own.

Each item path is first used alone as a regularizer; the per-path MAEs are
turned into weights that favor the better paths, and the weighted fusion
is compared with equal weights.

    python demos/04_heuristic_path_weights.py
"""
from simmf.evaluation import SplitSpec, heuristic_weights, mae, split
from simmf.experiment import ExperimentConfig, SimilarityProvider
from simmf.metapath import resolve_k
from simmf.model import RegularizationSpec, TrainConfig, train
from simmf.synthetic import movielens_like

ds = movielens_like(300, 200, 6000, seed=2)
train_r, test_r = split(ds.ratings, SplitSpec(0.4, 1, 0), 0)
cfg = ExperimentConfig.from_dict({"dataset": "-", "methods": [{"name": "PMF", "kind": "pmf"}]})
sims = SimilarityProvider(cfg, ds, train_r, cache=None)
k = resolve_k(ds.counts["M"])
tc = TrainConfig(d=10, max_iters=300)


def item_regularized_mae(labels, weights):
    reg = RegularizationSpec(item_mode="individual", beta=0.1, item_neighbors=sims.neighbors(labels, weights, k))
    model, _ = train(train_r, reg, tc)
    return mae(model.predict_many(test_r.users, test_r.items, clamp=(1, 5)), test_r)


paths = ["MTM", "MUM"]
# a real study would score paths on a validation slice; the test split keeps the demo short
per_path = [item_regularized_mae([p], [1.0]) for p in paths]
weights = heuristic_weights(per_path)
for p, e, w in zip(paths, per_path, weights):
    print(f"{p}: MAE alone {e:.4f} -> weight {w:.4f}")
print(f"equal weights     MAE {item_regularized_mae(paths, [0.5, 0.5]):.4f}")
print(f"heuristic weights MAE {item_regularized_mae(paths, weights):.4f}")

"""Non-HIN baselines: per-user / per-item means, and the PMF and SoMF presets of SimMF."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NotApplicableError, ValidationError
from .hin import Dataset, RatingMatrix
from .metapath import SimilarityMatrix, build_neighbor_index, normalize_similarity, resolve_k
from .model import FactorModel, RegularizationSpec, Trace, TrainConfig, train


@dataclass(frozen=True, eq=False)
class MeanModel:
    kind: str
    means: np.ndarray
    global_mean: float

    def predict_many(self, users, items, clamp=None) -> np.ndarray:
        idx = np.asarray(users) if self.kind == "user" else np.asarray(items)
        pred = self.means[idx]
        if clamp is not None:
            pred = np.clip(pred, clamp[0], clamp[1])
        return pred


def fit_mean(ratings: RatingMatrix, kind: str) -> MeanModel:
    """Mean training rating per user (``kind="user"``) or per item; global mean for the rest."""
    if kind not in ("user", "item"):
        raise ValueError(f"kind must be 'user' or 'item', got {kind!r}")
    if len(ratings) == 0:
        raise ValidationError("cannot fit a mean model on an empty training set")
    idx = ratings.users if kind == "user" else ratings.items
    size = ratings.shape[0] if kind == "user" else ratings.shape[1]
    sums = np.bincount(idx, weights=ratings.values, minlength=size)
    counts = np.bincount(idx, minlength=size)
    global_mean = float(ratings.values.mean())
    means = np.full(size, global_mean)
    seen = counts > 0
    means[seen] = sums[seen] / counts[seen]
    return MeanModel(kind, means, global_mean)


def pmf_preset(ratings: RatingMatrix, cfg: TrainConfig) -> tuple[FactorModel, Trace]:
    """Plain low-rank factorization: SimMF with both regularization weights at zero."""
    return train(ratings, RegularizationSpec(), cfg)


def social_relation(dataset: Dataset):
    """Name of the user-user relation, or ``None`` if the dataset has none."""
    u = dataset.user_type
    for rel in dataset.schema.relations:
        if rel.source == u and rel.target == u:
            return rel.name
    return None


def social_similarity(dataset: Dataset) -> SimilarityMatrix:
    """Symmetrized friendship adjacency, sigmoid-normalized like the path similarities."""
    name = social_relation(dataset)
    if name is None:
        raise NotApplicableError("SoMF is not applicable: the dataset has no user-user relation")
    adj = dataset.relations[name].matrix
    adj = (adj + adj.T).tocsr()
    adj.data[:] = 1.0
    adj.setdiag(0)
    adj.eliminate_zeros()
    adj = sp.csr_matrix(adj)
    return normalize_similarity(SimilarityMatrix(dataset.user_type, adj, False, "UU"))


def somf_preset(dataset: Dataset, ratings: RatingMatrix, cfg: TrainConfig, alpha: float,
                k: int | None = None) -> tuple[FactorModel, Trace]:
    """Social MF: average-based user regularization over the friendship path only."""
    sim = social_similarity(dataset)
    index = build_neighbor_index(sim, resolve_k(sim.shape[0], k))
    reg = RegularizationSpec(user_mode="average", alpha=alpha, user_neighbors=index)
    return train(ratings, reg, cfg)

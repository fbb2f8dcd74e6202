"""Synthetic heterogeneous networks for tests, demos and scaling runs.

``movielens_like`` mirrors the MovieLens schema (users with gender, age and
occupation; movies with one or more genres) and plants the rating signal in
those attributes, so attribute-based similarity genuinely helps prediction.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .hin import Dataset, RatingMatrix, make_dataset

MOVIELENS_TYPES = {"U": "user", "M": "movie", "G": "gender", "A": "age", "O": "occupation", "T": "genre"}


def _one_hot(labels: np.ndarray, k: int) -> sp.csr_matrix:
    n = len(labels)
    return sp.csr_matrix((np.ones(n), (np.arange(n), labels)), shape=(n, k))


def movielens_like(n_users: int = 300, n_items: int = 200, n_ratings: int = 6000, d: int = 4,
                   n_ages: int = 7, n_occupations: int = 21, n_genres: int = 18,
                   noise: float = 0.8, seed: int = 0) -> Dataset:
    """Random MovieLens-shaped dataset with attribute-driven tastes.

    A user's taste vector is the sum of gender, age and occupation effects
    plus a small personal offset; a movie's profile is the mean of its genre
    effects plus an offset.  Ratings are ``3.6 + 0.9 * taste . profile`` with
    Gaussian noise, rounded and clipped to 1..5.  Activity follows a
    heavy-tailed distribution on both sides.
    """
    rng = np.random.default_rng(seed)
    gender = rng.integers(0, 2, n_users)
    age = rng.integers(0, n_ages, n_users)
    occ = rng.integers(0, n_occupations, n_users)
    n_gen_per_item = np.minimum(1 + rng.poisson(0.6, n_items), 6)
    item_genres = [rng.choice(n_genres, size=c, replace=False) for c in n_gen_per_item]

    scale = 1.0 / np.sqrt(d)
    g_eff = rng.normal(0, 1, (2, d)) * scale
    a_eff = rng.normal(0, 1, (n_ages, d)) * scale
    o_eff = rng.normal(0, 1, (n_occupations, d)) * scale
    t_eff = rng.normal(0, 1, (n_genres, d)) * 1.5 * scale
    taste = g_eff[gender] + a_eff[age] + o_eff[occ] + rng.normal(0, 0.25, (n_users, d)) * scale
    profile = np.stack([t_eff[gs].mean(axis=0) for gs in item_genres]) \
        + rng.normal(0, 0.25, (n_items, d)) * scale

    u_act = rng.pareto(1.5, n_users) + 1.0
    i_pop = rng.pareto(1.2, n_items) + 1.0
    n_ratings = min(n_ratings, n_users * n_items)
    chosen: set[int] = set()
    p_u = u_act / u_act.sum()
    p_i = i_pop / i_pop.sum()
    # every user and item gets at least one rating before the heavy tail kicks in
    first_items = rng.choice(n_items, size=n_users, p=p_i)
    first_users = rng.choice(n_users, size=n_items, p=p_u)
    chosen.update((np.arange(n_users) * n_items + first_items).tolist())
    chosen.update((first_users * n_items + np.arange(n_items)).tolist())
    while len(chosen) < n_ratings:
        batch = n_ratings - len(chosen)
        us = rng.choice(n_users, size=batch, p=p_u)
        its = rng.choice(n_items, size=batch, p=p_i)
        chosen.update((us * n_items + its).tolist())
    keys = np.array(sorted(chosen))
    users, items = keys // n_items, keys % n_items
    raw = 3.6 + 0.9 * np.einsum("ij,ij->i", taste[users], profile[items]) * np.sqrt(d) \
        + rng.normal(0, noise, len(keys))
    values = np.clip(np.rint(raw), 1, 5)
    ratings = RatingMatrix(users, items, values, (n_users, n_items), (1.0, 5.0))

    genre_rows = np.repeat(np.arange(n_items), n_gen_per_item)
    genre_cols = np.concatenate(item_genres)
    mt = sp.csr_matrix((np.ones(len(genre_rows)), (genre_rows, genre_cols)), shape=(n_items, n_genres))
    counts = {"U": n_users, "M": n_items, "G": 2, "A": n_ages, "O": n_occupations, "T": n_genres}
    relations = [
        ("gender", "U", "G", _one_hot(gender, 2)),
        ("age", "U", "A", _one_hot(age, n_ages)),
        ("occupation", "U", "O", _one_hot(occ, n_occupations)),
        ("genre", "M", "T", mt),
    ]
    return make_dataset(counts, relations, ratings, rating_name="rating", rating_types=("U", "M"))


def with_friends(ds: Dataset, mean_degree: float = 4.0, seed: int = 0) -> Dataset:
    """Add a user-user relation linking users that share gender and age group."""
    rng = np.random.default_rng(seed)
    m = ds.counts["U"]
    gender = ds.relations["gender"].matrix.indices
    age = ds.relations["age"].matrix.indices
    group = gender * 100 + age
    rows, cols = [], []
    for i in range(m):
        peers = np.flatnonzero((group == group[i]) & (np.arange(m) != i))
        if len(peers) == 0:
            continue
        k = min(len(peers), max(1, rng.poisson(mean_degree / 2)))
        for j in rng.choice(peers, size=k, replace=False):
            rows.append(i)
            cols.append(int(j))
    uu = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    uu = ((uu + uu.T) > 0).astype(float)
    rels = [(r.name, r.source, r.target, ds.relations[r.name].matrix) for r in ds.schema.relations]
    rels.append(("friend", "U", "U", uu))
    return make_dataset(ds.counts, rels, ds.ratings, rating_name=ds.schema.rating.name, rating_types=("U", "M"))


def random_hin(rng: np.random.Generator, n_types: int = 3, max_nodes: int = 20, density: float = 0.25,
               self_relations: bool = True):
    """Small random typed graph for property tests.

    Returns ``(counts, relations)`` where relations maps (a, b) to a binary
    dense array.  Same-type relations are symmetric with empty diagonal.
    """
    names = [chr(ord("A") + i) for i in range(n_types)]
    counts = {t: int(rng.integers(1, max_nodes + 1)) for t in names}
    relations = {}
    for i, a in enumerate(names):
        for b in names[i:]:
            if a == b and not self_relations:
                continue
            if a != b or rng.random() < 0.5:
                mat = (rng.random((counts[a], counts[b])) < density).astype(float)
                if a == b:
                    mat = np.triu(mat, 1)
                    mat = mat + mat.T
                relations[(a, b)] = mat
    return counts, relations

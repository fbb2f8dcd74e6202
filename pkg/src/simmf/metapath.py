"""Meta paths, commuting matrices, PathSim, sigmoid normalization, fusion, top-k neighbors."""
from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import SchemaError, SimilarityError
from .hin import HinSchema, RelationStore

log = logging.getLogger(__name__)

CACHE_ENV = "SIMMF_CACHE_DIR"


@dataclass(frozen=True)
class MetaPath:
    types: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if len(self.types) < 2:
            raise SchemaError("a meta path needs at least two entity types")

    @property
    def label(self) -> str:
        return "".join(self.types)

    @property
    def length(self) -> int:
        """Number of relations along the path."""
        return len(self.types) - 1

    @property
    def endpoint(self) -> str:
        return self.types[0]

    def is_palindrome(self) -> bool:
        return self.types == self.types[::-1]

    def steps(self) -> list[tuple[str, str]]:
        return list(zip(self.types[:-1], self.types[1:]))

    def __str__(self):
        return self.label


def _tokenize(label: str, names: Sequence[str]) -> list[str]:
    by_len = sorted(names, key=len, reverse=True)
    out, pos = [], 0
    while pos < len(label):
        for name in by_len:
            if label.startswith(name, pos):
                out.append(name)
                pos += len(name)
                break
        else:
            raise SchemaError(f"unknown entity type at {label[pos:]!r} in meta path {label!r}")
    return out


def parse_metapath(label: str, schema: HinSchema, similarity: bool = True) -> MetaPath:
    """Parse ``"UMTMU"``-style labels against the schema's type names.

    With ``similarity`` set, the first and last types must agree.
    """
    label = label.strip()
    if not label:
        raise SchemaError("empty meta path")
    types = _tokenize(label, schema.type_names)
    if len(types) < 2:
        raise SchemaError(f"meta path {label!r} needs at least two entity types")
    for a, b in zip(types[:-1], types[1:]):
        if not schema.has_relation(a, b):
            raise SchemaError(f"meta path {label!r}: no relation between {a!r} and {b!r}")
    if similarity and types[0] != types[-1]:
        raise SchemaError(f"meta path {label!r}: endpoint types differ ({types[0]} vs {types[-1]})")
    return MetaPath(tuple(types))


def parse_metapaths(labels, schema: HinSchema) -> list[MetaPath]:
    if isinstance(labels, str):
        labels = [s for s in labels.split(",") if s.strip()]
    return [parse_metapath(s, schema) for s in labels]


# -- composition ----------------------------------------------------------------


def _prune(mat: sp.csr_matrix, threshold: float) -> sp.csr_matrix:
    if threshold > 0 and mat.nnz:
        mat = mat.copy()
        mat.data[mat.data < threshold] = 0.0
        mat.eliminate_zeros()
    return mat


def _chain(mats: list[sp.csr_matrix], prune: float, order: str) -> sp.csr_matrix:
    if order == "left":
        out = mats[0]
        for m in mats[1:]:
            if out.shape[1] != m.shape[0]:
                raise SchemaError(f"dimension mismatch {out.shape} x {m.shape}")
            out = _prune((out @ m).tocsr(), prune)
    elif order == "right":
        out = mats[-1]
        for m in reversed(mats[:-1]):
            if m.shape[1] != out.shape[0]:
                raise SchemaError(f"dimension mismatch {m.shape} x {out.shape}")
            out = _prune((m @ out).tocsr(), prune)
    else:
        raise ValueError(f"order must be 'left' or 'right', got {order!r}")
    out = sp.csr_matrix(out)
    out.sort_indices()
    return out


def commuting_matrix(path: MetaPath, relations: RelationStore, prune: float = 0.0,
                     order: str = "left") -> sp.csr_matrix:
    """Product of binary adjacency matrices along ``path``.

    Entry (i, j) counts path instances from object i to object j.  Products
    are evaluated left to right; entries below ``prune`` are dropped after
    every product (0 disables pruning).
    """
    mats = [relations.get(a, b) for a, b in path.steps()]
    result = _chain(mats, prune, order)
    if prune > 0:
        log.info("commuting matrix %s pruned at %g: nnz=%d", path.label, prune, result.nnz)
    return result


def _symmetric_commuting(path: MetaPath, relations: RelationStore) -> sp.csr_matrix:
    # palindromic path: C = P P^T (even length) or P R_mid P^T (odd length)
    steps = path.steps()
    h = len(steps) // 2
    if h == 0:
        return _chain([relations.get(*steps[0])], 0.0, "left")
    half = _chain([relations.get(a, b) for a, b in steps[:h]], 0.0, "left")
    if len(steps) % 2:
        mid = relations.get(*steps[h])
        out = (half @ mid @ half.T).tocsr()
    else:
        out = (half @ half.T).tocsr()
    out.sort_indices()
    return out


# -- similarity -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    object_type: str
    matrix: sp.csr_matrix
    normalized: bool = False
    source: str = ""

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def pathsim(path: MetaPath, relations: RelationStore, prune: float = 0.0) -> SimilarityMatrix:
    """PathSim: 2 C(i,j) / (C(i,i) + C(j,j)) on the commuting matrix C.

    Objects without a path instance back to themselves get all-zero rows.
    """
    if path.types[0] != path.types[-1] or not path.is_palindrome():
        raise SimilarityError(f"PathSim needs a palindromic path, got {path.label}")
    if prune > 0:
        c = commuting_matrix(path, relations, prune=prune)
    else:
        c = _symmetric_commuting(path, relations)
    diag = c.diagonal()
    coo = c.tocoo()
    rows, cols, vals = coo.row, coo.col, coo.data
    keep = (diag[rows] > 0) & (diag[cols] > 0) & (vals > 0)
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    sim = 2.0 * vals / (diag[rows] + diag[cols])
    mat = sp.csr_matrix((sim, (rows, cols)), shape=c.shape)
    mat.sort_indices()
    return SimilarityMatrix(path.endpoint, mat, normalized=False, source=path.label)


MEASURES: dict[str, Callable[..., SimilarityMatrix]] = {"pathsim": pathsim}


def normalize_similarity(sim: SimilarityMatrix, steepness: float = 1.0) -> SimilarityMatrix:
    """Sigmoid-center the stored entries on their mean.

    ``s' = 1 / (1 + exp(-steepness * (s - mean)))`` where the mean runs over
    stored entries only.  Absent entries stay absent.
    """
    if sim.normalized:
        raise SimilarityError("similarity is already normalized")
    mat = sim.matrix
    if mat.nnz == 0:
        raise SimilarityError("cannot normalize empty similarity")
    mean = mat.data.mean()
    out = mat.copy()
    out.data = 1.0 / (1.0 + np.exp(-steepness * (mat.data - mean)))
    return SimilarityMatrix(sim.object_type, out, normalized=True, source=sim.source)


def check_weights(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        raise SimilarityError("nothing to fuse")
    if np.any(w < 0) or np.any(w > 1) or not np.all(np.isfinite(w)):
        raise SimilarityError(f"weights must lie in [0, 1], got {list(w)}")
    if abs(w.sum() - 1.0) > 1e-9:
        raise SimilarityError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def fuse_similarities(sims, weights: Sequence[float]) -> SimilarityMatrix:
    """Weighted sum of normalized per-path similarities; weights must sum to 1.

    ``sims`` may be a lazy iterable, so large per-path matrices can be
    produced and folded in one at a time.
    """
    w = check_weights(weights)
    if hasattr(sims, "__len__") and len(sims) != len(w):
        raise SimilarityError(f"{len(sims)} similarity matrices but {len(w)} weights")
    out = first = None
    count = 0
    for s, wi in zip(sims, w):
        count += 1
        if not s.normalized:
            raise SimilarityError("fuse expects normalized similarities")
        if first is None:
            first = s
            out = s.matrix * wi
            continue
        if s.object_type != first.object_type:
            raise SimilarityError(f"cannot fuse mixed object types {first.object_type!r} and {s.object_type!r}")
        if s.shape != first.shape:
            raise SimilarityError("similarity shapes differ")
        out = out + s.matrix * wi
    if count != len(w):
        raise SimilarityError(f"{count} similarity matrices but {len(w)} weights")
    if count == 1:
        return SimilarityMatrix(first.object_type, first.matrix.copy(), True, first.source)
    out = sp.csr_matrix(out)
    out.sort_indices()
    return SimilarityMatrix(first.object_type, out, normalized=True, source="fused")


# -- neighbors ------------------------------------------------------------------


class NeighborIndex:
    """Top-k similarity lists and their reverse map.

    ``weights[i, j] = S_ij`` for every j in the top-k list of i; row i of
    ``weights`` is therefore the forward set and column j the reverse set.
    """

    def __init__(self, weights: sp.csr_matrix, k: int):
        self.weights = sp.csr_matrix(weights)
        self.weights.sort_indices()
        self.k = int(k)
        self._reverse = self.weights.T.tocsr()
        self._reverse.sort_indices()

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def plus(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbors of ``i`` with their similarities, most similar first."""
        lo, hi = self.weights.indptr[i], self.weights.indptr[i + 1]
        idx, w = self.weights.indices[lo:hi], self.weights.data[lo:hi]
        order = np.lexsort((idx, -w))
        return idx[order], w[order]

    def minus(self, i: int) -> np.ndarray:
        """Objects whose top-k list contains ``i``."""
        lo, hi = self._reverse.indptr[i], self._reverse.indptr[i + 1]
        return self._reverse.indices[lo:hi]

    def sizes(self) -> np.ndarray:
        return np.diff(self.weights.indptr)


def resolve_k(n_objects: int, k: int | None = None, fraction: float = 0.05) -> int:
    """Absolute ``k`` if given, else ``fraction`` of the object count (at least 1)."""
    if k is not None:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        return int(k)
    return max(1, int(fraction * n_objects))


def build_neighbor_index(sim: SimilarityMatrix, k: int) -> NeighborIndex:
    """Keep the ``k`` largest off-diagonal entries per row; ties go to the lower index."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    coo = sim.matrix.tocoo()
    off = coo.row != coo.col
    rows, cols, vals = coo.row[off], coo.col[off], coo.data[off]
    order = np.lexsort((cols, -vals, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    starts = np.searchsorted(rows, np.arange(sim.shape[0]))
    rank = np.arange(len(rows)) - starts[rows]
    keep = rank < k
    w = sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=sim.shape)
    return NeighborIndex(w, k)


# -- batch computation and cache -----------------------------------------------------


class SimilarityCache:
    """On-disk store of similarity matrices.

    Files are ``<sha1>.npz`` holding the CSR arrays plus a JSON header with
    the key fields; the key is (path label, measure, normalized, checksum).
    A different dataset or training split yields a different checksum and
    therefore a miss.
    """

    def __init__(self, directory=None):
        directory = directory or os.environ.get(CACHE_ENV)
        if directory is None:
            raise ValueError(f"no cache directory given and ${CACHE_ENV} is unset")
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(label: str, measure: str, normalized: bool, checksum: str) -> dict:
        return {"path": label, "measure": measure, "normalized": bool(normalized), "checksum": checksum}

    def _file(self, key: dict) -> Path:
        digest = hashlib.sha1(json.dumps(key, sort_keys=True).encode()).hexdigest()
        return self.directory / f"{digest}.npz"

    def get(self, key: dict) -> SimilarityMatrix | None:
        f = self._file(key)
        if not f.exists():
            return None
        with np.load(f, allow_pickle=False) as z:
            header = json.loads(str(z["header"]))
            if header["key"] != key:
                return None
            mat = sp.csr_matrix((z["data"], z["indices"], z["indptr"]), shape=tuple(z["shape"]))
        return SimilarityMatrix(header["object_type"], mat, header["key"]["normalized"], header["source"])

    def put(self, key: dict, sim: SimilarityMatrix) -> None:
        header = json.dumps({"key": key, "object_type": sim.object_type, "source": sim.source})
        m = sim.matrix
        tmp = self._file(key).with_suffix(".tmp.npz")
        np.savez(tmp, data=m.data, indices=m.indices, indptr=m.indptr,
                 shape=np.asarray(m.shape), header=np.asarray(header))
        os.replace(tmp, self._file(key))


def path_similarity(path: MetaPath, relations: RelationStore, measure: str = "pathsim",
                    normalize: bool = True, steepness: float = 1.0, prune: float = 0.0,
                    cache: SimilarityCache | None = None, checksum: str | None = None) -> SimilarityMatrix:
    key = None
    if cache is not None and checksum is not None:
        key = SimilarityCache.key(path.label, measure, normalize, checksum)
        hit = cache.get(key)
        if hit is not None:
            return hit
    sim = MEASURES[measure](path, relations, prune=prune)
    if normalize:
        sim = normalize_similarity(sim, steepness)
    if key is not None:
        cache.put(key, sim)
    return sim


def path_similarities(paths: Sequence[MetaPath], relations: RelationStore, n_jobs: int = 1,
                      **kwargs) -> list[SimilarityMatrix]:
    """Compute one similarity per path; independent paths may run on threads.

    Output order follows ``paths`` regardless of ``n_jobs``.
    """
    if n_jobs <= 1 or len(paths) <= 1:
        return [path_similarity(p, relations, **kwargs) for p in paths]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(lambda p: path_similarity(p, relations, **kwargs), paths))

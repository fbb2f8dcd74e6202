"""Typed heterogeneous information network: schema, relation matrices, loading.

A dataset directory holds a ``schema.yaml`` plus one tab-delimited file per
relation.  Each relation line is ``source_id<TAB>target_id[<TAB>value]``;
lines starting with ``#`` and blank lines are ignored.  The rating relation
requires the value column.  See ``README.md`` for the schema layout.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp
import yaml

from .errors import DatasetError, SchemaError, ValidationError

SCHEMA_FORMAT = "simmf-schema"
SCHEMA_VERSION = 1
DEFAULT_SCHEMA_NAME = "schema.yaml"


@dataclass(frozen=True)
class EntityType:
    name: str
    count: int | None = None
    ids_file: str | None = None

    def __post_init__(self):
        if not self.name:
            raise SchemaError("entity type name must be non-empty")
        if self.count is not None and self.count < 1:
            raise SchemaError(f"entity type {self.name!r}: count must be >= 1, got {self.count}")


@dataclass(frozen=True)
class RelationDecl:
    name: str
    source: str
    target: str
    file: str | None = None


@dataclass(frozen=True)
class HinSchema:
    """Entity types, attribute/social relations and the one rating relation.

    ``rating`` is declared separately from ``relations`` because it carries
    values and a scale; inside meta paths it behaves like any other edge type.
    """

    entity_types: tuple[EntityType, ...]
    relations: tuple[RelationDecl, ...]
    rating: RelationDecl | None = None
    rating_scale: tuple[float, float] = (1.0, 5.0)

    def __post_init__(self):
        object.__setattr__(self, "entity_types", tuple(self.entity_types))
        object.__setattr__(self, "relations", tuple(self.relations))
        names = [t.name for t in self.entity_types]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate entity type names in {names}")
        for rel in self.all_relations():
            for end in (rel.source, rel.target):
                if end not in names:
                    raise SchemaError(f"relation {rel.name!r} references undeclared entity type {end!r}")
        rel_names = [r.name for r in self.all_relations()]
        if len(set(rel_names)) != len(rel_names):
            raise SchemaError(f"duplicate relation names in {rel_names}")
        if not (len(self.entity_types) > 1 or len(rel_names) > 1):
            raise SchemaError("network is not heterogeneous: need >1 entity type or >1 relation")
        lo, hi = self.rating_scale
        if lo > hi:
            raise SchemaError(f"rating scale {self.rating_scale} is inverted")

    def all_relations(self) -> tuple[RelationDecl, ...]:
        if self.rating is None:
            return self.relations
        return (self.rating,) + self.relations

    def entity(self, name: str) -> EntityType:
        for t in self.entity_types:
            if t.name == name:
                return t
        raise SchemaError(f"unknown entity type {name!r}")

    @property
    def type_names(self) -> list[str]:
        return [t.name for t in self.entity_types]

    def has_relation(self, a: str, b: str) -> bool:
        return any((r.source, r.target) in ((a, b), (b, a)) for r in self.all_relations())

    def with_counts(self, counts: Mapping[str, int]) -> "HinSchema":
        types = tuple(replace(t, count=counts.get(t.name, t.count)) for t in self.entity_types)
        return replace(self, entity_types=types)

    # -- (de)serialization -------------------------------------------------

    def to_dict(self) -> dict:
        def rel(r, extra=None):
            d = {"name": r.name, "source": r.source, "target": r.target}
            if r.file:
                d["file"] = r.file
            d.update(extra or {})
            return d

        out = {
            "format": SCHEMA_FORMAT,
            "version": SCHEMA_VERSION,
            "entity_types": [],
            "relations": [rel(r) for r in self.relations],
        }
        for t in self.entity_types:
            d = {"name": t.name}
            if t.count is not None:
                d["count"] = int(t.count)
            if t.ids_file:
                d["ids"] = t.ids_file
            out["entity_types"].append(d)
        if self.rating is not None:
            out["rating"] = rel(self.rating, {"scale": [float(x) for x in self.rating_scale]})
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "HinSchema":
        if data.get("format", SCHEMA_FORMAT) != SCHEMA_FORMAT:
            raise SchemaError(f"not a {SCHEMA_FORMAT} document: format={data.get('format')!r}")
        version = data.get("version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise SchemaError(f"unsupported schema version {version}")
        try:
            types = [EntityType(str(t["name"]), t.get("count"), t.get("ids")) for t in data["entity_types"]]
            rels = [RelationDecl(str(r["name"]), str(r["source"]), str(r["target"]), r.get("file"))
                    for r in data.get("relations", [])]
            rating = None
            scale = (1.0, 5.0)
            if data.get("rating"):
                r = data["rating"]
                rating = RelationDecl(str(r["name"]), str(r["source"]), str(r["target"]), r.get("file"))
                if "scale" in r:
                    scale = (float(r["scale"][0]), float(r["scale"][1]))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema: {exc}") from exc
        return cls(tuple(types), tuple(rels), rating, scale)


def load_schema(path) -> HinSchema:
    path = Path(path)
    if path.is_dir():
        path = path / DEFAULT_SCHEMA_NAME
    if not path.exists():
        raise DatasetError(f"schema file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return HinSchema.from_dict(yaml.safe_load(fh))


def save_schema(schema: HinSchema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(schema.to_dict(), fh, sort_keys=False)


# -- matrices ---------------------------------------------------------------


@dataclass(frozen=True)
class RelationMatrix:
    """One edge type of the network as a sparse (source x target) matrix."""

    name: str
    source: str
    target: str
    matrix: sp.csr_matrix

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.float64)
        m.eliminate_zeros()
        m.sum_duplicates()
        m.sort_indices()
        if m.nnz and m.data.min() <= 0:
            raise ValidationError(f"relation {self.name!r} has non-positive entries")
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def check_shape(self, counts: Mapping[str, int]) -> None:
        expected = (counts[self.source], counts[self.target])
        if self.shape != expected:
            raise ValidationError(f"relation {self.name!r} has shape {self.shape}, expected {expected}")

    def transpose(self) -> "RelationMatrix":
        return transpose(self)

    def __eq__(self, other):
        if not isinstance(other, RelationMatrix):
            return NotImplemented
        return (self.name, self.source, self.target, self.shape) == (
            other.name, other.source, other.target, other.shape
        ) and (self.matrix != other.matrix).nnz == 0

    __hash__ = None


def transpose(rel: RelationMatrix) -> RelationMatrix:
    """Inverse relation: shape (target x source), entry (j, i) = entry (i, j)."""
    name = rel.name[:-2] if rel.name.endswith("^T") else rel.name + "^T"
    return RelationMatrix(name, rel.target, rel.source, rel.matrix.T.tocsr())


@dataclass(frozen=True, eq=False)
class RatingMatrix:
    """Observed ratings in coordinate form; at most one rating per (user, item)."""

    users: np.ndarray
    items: np.ndarray
    values: np.ndarray
    shape: tuple[int, int]
    scale: tuple[float, float] = (1.0, 5.0)

    def __post_init__(self):
        users = np.asarray(self.users, dtype=np.int64)
        items = np.asarray(self.items, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if not (users.shape == items.shape == values.shape) or users.ndim != 1:
            raise ValidationError("users, items and values must be 1-D arrays of equal length")
        m, n = self.shape
        if len(users):
            if users.min() < 0 or users.max() >= m or items.min() < 0 or items.max() >= n:
                raise ValidationError(f"rating index out of range for shape {self.shape}")
            lo, hi = self.scale
            bad = np.flatnonzero((values < lo) | (values > hi) | ~np.isfinite(values))
            if len(bad):
                raise ValidationError(f"rating {values[bad[0]]} at entry {bad[0]} outside scale {self.scale}")
            keys = users * n + items
            if len(np.unique(keys)) != len(keys):
                raise ValidationError("duplicate (user, item) rating")
        for name, arr in (("users", users), ("items", items), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "shape", (int(m), int(n)))
        object.__setattr__(self, "scale", (float(self.scale[0]), float(self.scale[1])))

    def __len__(self):
        return len(self.values)

    @property
    def nnz(self) -> int:
        return len(self.values)

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, (self.users, self.items)), shape=self.shape)

    def binary(self) -> sp.csr_matrix:
        """Presence matrix; rating magnitude is dropped for path composition."""
        ones = np.ones(len(self.values))
        return sp.csr_matrix((ones, (self.users, self.items)), shape=self.shape)

    def subset(self, index) -> "RatingMatrix":
        return RatingMatrix(self.users[index], self.items[index], self.values[index], self.shape, self.scale)

    def entry_set(self) -> set[tuple[int, int, float]]:
        return set(zip(self.users.tolist(), self.items.tolist(), self.values.tolist()))

    def __eq__(self, other):
        if not isinstance(other, RatingMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entry_set() == other.entry_set()

    __hash__ = None


# -- relation store -----------------------------------------------------------


class RelationStore:
    """Binary adjacency lookup by (source type, target type).

    Asking for ``(b, a)`` when only ``(a, b)`` was declared returns the
    transpose.  Same-type relations (e.g. user-user friendship) are treated
    as undirected and stored symmetrized.
    """

    def __init__(self, matrices: Mapping[tuple[str, str], sp.csr_matrix], counts: Mapping[str, int]):
        self.counts = dict(counts)
        self._mats: dict[tuple[str, str], sp.csr_matrix] = {}
        for (a, b), mat in matrices.items():
            if (a, b) in self._mats or (b, a) in self._mats:
                raise SchemaError(f"more than one relation between {a!r} and {b!r}")
            mat = sp.csr_matrix(mat, dtype=np.float64)
            if mat.shape != (self.counts[a], self.counts[b]):
                raise SchemaError(f"relation {a}{b} has shape {mat.shape}, "
                                  f"expected {(self.counts[a], self.counts[b])}")
            if a == b:
                mat = mat + mat.T
            mat = mat.tocsr()
            mat.data[:] = 1.0
            mat.eliminate_zeros()
            mat.sort_indices()
            self._mats[(a, b)] = mat

    def has(self, a: str, b: str) -> bool:
        return (a, b) in self._mats or (b, a) in self._mats

    def get(self, a: str, b: str) -> sp.csr_matrix:
        if (a, b) in self._mats:
            return self._mats[(a, b)]
        if (b, a) in self._mats:
            return self._mats[(b, a)].T.tocsr()
        raise SchemaError(f"no relation between {a!r} and {b!r}")

    def pairs(self):
        return list(self._mats)


# -- dataset ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    schema: HinSchema
    relations: dict[str, RelationMatrix]
    ratings: RatingMatrix | None
    ids: dict[str, list[str]] = field(default_factory=dict)

    @property
    def counts(self) -> dict[str, int]:
        return {t.name: int(t.count) for t in self.schema.entity_types}

    @property
    def user_type(self) -> str:
        return self.schema.rating.source

    @property
    def item_type(self) -> str:
        return self.schema.rating.target

    def index_of(self, entity_type: str, raw_id) -> int:
        try:
            return self.ids[entity_type].index(str(raw_id))
        except ValueError:
            raise KeyError(f"{entity_type} id {raw_id!r} not in dataset") from None

    def raw_id(self, entity_type: str, index: int) -> str:
        return self.ids[entity_type][index]

    def relation_store(self, ratings: RatingMatrix | None = None) -> RelationStore:
        """Adjacency store for path composition.

        ``ratings`` replaces the dataset's rating relation, so similarities can
        be built from a training split only.
        """
        mats = {}
        for rel in self.relations.values():
            mats[(rel.source, rel.target)] = rel.matrix
        rat = ratings if ratings is not None else self.ratings
        if rat is not None and self.schema.rating is not None:
            mats[(self.schema.rating.source, self.schema.rating.target)] = rat.binary()
        return RelationStore(mats, self.counts)

    def checksum(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.relations):
            m = self.relations[name].matrix
            h.update(name.encode())
            h.update(np.asarray(m.shape, dtype=np.int64).tobytes())
            h.update(m.indptr.astype(np.int64).tobytes())
            h.update(m.indices.astype(np.int64).tobytes())
        if self.ratings is not None:
            h.update(ratings_checksum(self.ratings).encode())
        return h.hexdigest()


def ratings_checksum(ratings: RatingMatrix) -> str:
    order = np.lexsort((ratings.items, ratings.users))
    h = hashlib.sha256()
    h.update(np.asarray(ratings.shape, dtype=np.int64).tobytes())
    h.update(ratings.users[order].tobytes())
    h.update(ratings.items[order].tobytes())
    h.update(ratings.values[order].tobytes())
    return h.hexdigest()


def _natural_key(s: str):
    try:
        return (0, int(s), "")
    except ValueError:
        return (1, 0, s)


def _read_pairs(path: Path, relation: str, need_value: bool):
    """Parse one relation file into (line_no, src, tgt, value) tuples."""
    if not path.exists():
        raise DatasetError(f"missing file for relation {relation!r}: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2 or (need_value and len(parts) < 3):
                raise ValidationError(f"{path.name}:{line_no}: expected "
                                      f"{'3' if need_value else '2 or 3'} tab-separated fields")
            value = 1.0
            if len(parts) >= 3 and parts[2].strip():
                try:
                    value = float(parts[2])
                except ValueError:
                    raise ValidationError(f"{path.name}:{line_no}: bad value {parts[2]!r}") from None
            rows.append((line_no, parts[0].strip(), parts[1].strip(), value))
    return rows


def _read_ids(path: Path) -> list[str]:
    if not path.exists():
        raise DatasetError(f"missing id file: {path}")
    with open(path, encoding="utf-8") as fh:
        ids = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{path.name}: duplicate ids")
    return ids


def load_dataset(dataset_path, schema: HinSchema | None = None) -> Dataset:
    """Load every relation of ``schema`` from ``dataset_path``.

    Raw IDs are remapped to dense 0-based indices.  Entity types with an
    ``ids`` file use that file's order; the rating relation fixes the user and
    item universe otherwise.  Attribute rows naming an object outside a fixed
    universe are rejected.  Remaining types collect their IDs from the files,
    sorted numerically when possible.
    """
    root = Path(dataset_path)
    if schema is None:
        schema = load_schema(root)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")

    fixed: dict[str, list[str]] = {}
    for t in schema.entity_types:
        if t.ids_file:
            fixed[t.name] = _read_ids(root / t.ids_file)

    def need_file(rel: RelationDecl) -> Path:
        return root / (rel.file or f"{rel.name}.tsv")

    rating_rows = None
    if schema.rating is not None:
        rel = schema.rating
        rating_rows = _read_pairs(need_file(rel), rel.name, need_value=True)
        if not rating_rows:
            raise DatasetError("no ratings")
        for end, col in ((rel.source, 1), (rel.target, 2)):
            if end not in fixed:
                fixed[end] = sorted({r[col] for r in rating_rows}, key=_natural_key)

    raw_rel = {rel.name: _read_pairs(need_file(rel), rel.name, need_value=False) for rel in schema.relations}

    collected: dict[str, set[str]] = {}
    for rel in schema.relations:
        for end, col in ((rel.source, 1), (rel.target, 2)):
            if end in fixed:
                known = set(fixed[end])
                for row in raw_rel[rel.name]:
                    if row[col] not in known:
                        raise ValidationError(f"{need_file(rel).name}:{row[0]}: unknown {end} id {row[col]!r}")
            else:
                collected.setdefault(end, set()).update(r[col] for r in raw_rel[rel.name])

    ids = dict(fixed)
    for name, found in collected.items():
        ids[name] = sorted(found, key=_natural_key)
    for t in schema.entity_types:
        got = len(ids.get(t.name, []))
        if t.count is not None and got != t.count:
            raise ValidationError(f"entity type {t.name!r}: schema declares {t.count} objects, found {got}")
        if got == 0:
            raise ValidationError(f"entity type {t.name!r} has no objects")
    schema = schema.with_counts({name: len(v) for name, v in ids.items()})
    counts = {t.name: t.count for t in schema.entity_types}
    lookup = {name: {raw: i for i, raw in enumerate(v)} for name, v in ids.items()}

    relations = {}
    for rel in schema.relations:
        rows = raw_rel[rel.name]
        for row in rows:
            if row[3] <= 0:
                raise ValidationError(f"{need_file(rel).name}:{row[0]}: relation values must be positive")
        src = np.array([lookup[rel.source][r[1]] for r in rows], dtype=np.int64)
        tgt = np.array([lookup[rel.target][r[2]] for r in rows], dtype=np.int64)
        mat = sp.csr_matrix((np.ones(len(rows)), (src, tgt)), shape=(counts[rel.source], counts[rel.target]))
        mat.sum_duplicates()
        mat.data[:] = 1.0
        relations[rel.name] = RelationMatrix(rel.name, rel.source, rel.target, mat)

    ratings = None
    if rating_rows is not None:
        rel = schema.rating
        lo, hi = schema.rating_scale
        seen = set()
        users, items, values = [], [], []
        for line_no, s, t, v in rating_rows:
            if s not in lookup[rel.source] or t not in lookup[rel.target]:
                raise ValidationError(f"{need_file(rel).name}:{line_no}: unknown id in rating")
            if not lo <= v <= hi:
                raise ValidationError(f"{need_file(rel).name}:{line_no}: rating {v} outside scale [{lo}, {hi}]")
            key = (s, t)
            if key in seen:
                raise ValidationError(f"{need_file(rel).name}:{line_no}: duplicate rating for {key}")
            seen.add(key)
            users.append(lookup[rel.source][s])
            items.append(lookup[rel.target][t])
            values.append(v)
        ratings = RatingMatrix(np.array(users), np.array(items), np.array(values),
                               (counts[rel.source], counts[rel.target]), schema.rating_scale)

    return Dataset(schema, relations, ratings, ids)


def load_relations(dataset_path, schema: HinSchema | None = None):
    """Return ``(relation matrices, rating matrix)`` for a dataset directory."""
    ds = load_dataset(dataset_path, schema)
    return list(ds.relations.values()), ds.ratings


# -- writing ------------------------------------------------------------------


def _fmt_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_relation(rel: RelationMatrix, path, source_ids: list[str] | None = None,
                   target_ids: list[str] | None = None) -> None:
    coo = rel.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    src = source_ids or [str(i) for i in range(rel.shape[0])]
    tgt = target_ids or [str(i) for i in range(rel.shape[1])]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {rel.name}: {rel.source} -> {rel.target}\n")
        for k in order:
            fh.write(f"{src[coo.row[k]]}\t{tgt[coo.col[k]]}\n")


def write_ratings(ratings: RatingMatrix, path, user_ids: list[str] | None = None,
                  item_ids: list[str] | None = None) -> None:
    order = np.lexsort((ratings.items, ratings.users))
    us = user_ids or [str(i) for i in range(ratings.shape[0])]
    it = item_ids or [str(i) for i in range(ratings.shape[1])]
    with open(path, "w", encoding="utf-8") as fh:
        for k in order:
            fh.write(f"{us[ratings.users[k]]}\t{it[ratings.items[k]]}\t{_fmt_value(ratings.values[k])}\n")


def write_dataset(ds: Dataset, root) -> Path:
    """Write ``ds`` as a loadable dataset directory (schema, id files, relations)."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    ids = {name: list(v) for name, v in ds.ids.items()}
    for t in ds.schema.entity_types:
        ids.setdefault(t.name, [str(i) for i in range(t.count)])
    types = []
    for t in ds.schema.entity_types:
        fname = f"ids_{t.name}.txt"
        with open(root / fname, "w", encoding="utf-8") as fh:
            fh.write("\n".join(ids[t.name]) + "\n")
        types.append(EntityType(t.name, t.count, fname))
    rels = []
    for rel in ds.schema.relations:
        fname = rel.file or f"{rel.name}.tsv"
        write_relation(ds.relations[rel.name], root / fname, ids[rel.source], ids[rel.target])
        rels.append(replace(rel, file=fname))
    rating = ds.schema.rating
    if rating is not None:
        rating = replace(rating, file=rating.file or f"{rating.name}.tsv")
        write_ratings(ds.ratings, root / rating.file, ids[rating.source], ids[rating.target])
    schema = HinSchema(tuple(types), tuple(rels), rating, ds.schema.rating_scale)
    save_schema(schema, root / DEFAULT_SCHEMA_NAME)
    return root


def make_dataset(counts: Mapping[str, int], relations: Iterable[tuple[str, str, str, sp.spmatrix]],
                 ratings: RatingMatrix | None = None, rating_name: str = "rating",
                 rating_types: tuple[str, str] | None = None) -> Dataset:
    """Assemble an in-memory dataset from already-indexed matrices."""
    types = tuple(EntityType(name, int(c)) for name, c in counts.items())
    decls, mats = [], {}
    for name, a, b, mat in relations:
        decls.append(RelationDecl(name, a, b))
        rm = RelationMatrix(name, a, b, sp.csr_matrix(mat))
        rm.check_shape(counts)
        mats[name] = rm
    rating = None
    scale = (1.0, 5.0)
    if ratings is not None:
        if rating_types is None:
            raise SchemaError("rating_types is required with ratings")
        rating = RelationDecl(rating_name, *rating_types)
        scale = ratings.scale
        if ratings.shape != (counts[rating_types[0]], counts[rating_types[1]]):
            raise ValidationError("ratings shape does not match entity counts")
    schema = HinSchema(types, tuple(decls), rating, scale)
    ids = {name: [str(i) for i in range(c)] for name, c in counts.items()}
    return Dataset(schema, mats, ratings, ids)

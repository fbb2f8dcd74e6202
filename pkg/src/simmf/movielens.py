"""Convert the raw MovieLens-1M release (``*.dat`` files) to the dataset directory format.

The release uses ``::`` as separator and Latin-1 text.  Output relations:

=================  ======  ==========================================
file               types   content
=================  ======  ==========================================
ratings.tsv        U-M     user, movie, rating 1..5
user_gender.tsv    U-G     F / M
user_age.tsv       U-A     age bucket code (1, 18, 25, ...)
user_occupation    U-O     occupation code 0..20
movie_genre.tsv    M-T     one line per (movie, genre)
=================  ======  ==========================================

Movie ids are declared as the full range 1..max id so the item count
matches the release's id space (3952), including ids no one rated.
"""
from __future__ import annotations

from pathlib import Path

from .errors import DatasetError
from .hin import EntityType, HinSchema, RelationDecl, save_schema

ENCODING = "latin-1"


def _rows(path: Path):
    if not path.exists():
        raise DatasetError(f"missing MovieLens file: {path}")
    with open(path, encoding=ENCODING) as fh:
        for line in fh:
            line = line.rstrip("\r\n")
            if line:
                yield line.split("::")


def movielens_schema() -> HinSchema:
    return HinSchema(
        entity_types=(
            EntityType("U", ids_file="ids_U.txt"),
            EntityType("M", ids_file="ids_M.txt"),
            EntityType("G"), EntityType("A"), EntityType("O"), EntityType("T"),
        ),
        relations=(
            RelationDecl("gender", "U", "G", "user_gender.tsv"),
            RelationDecl("age", "U", "A", "user_age.tsv"),
            RelationDecl("occupation", "U", "O", "user_occupation.tsv"),
            RelationDecl("genre", "M", "T", "movie_genre.tsv"),
        ),
        rating=RelationDecl("rating", "U", "M", "ratings.tsv"),
        rating_scale=(1.0, 5.0),
    )


def convert_movielens_1m(source, dest) -> Path:
    src, dst = Path(source), Path(dest)
    dst.mkdir(parents=True, exist_ok=True)

    users = list(_rows(src / "users.dat"))
    movies = list(_rows(src / "movies.dat"))
    ratings = list(_rows(src / "ratings.dat"))
    if not ratings:
        raise DatasetError("no ratings")

    user_ids = sorted({int(u[0]) for u in users} | {int(r[0]) for r in ratings})
    max_movie = max([int(m[0]) for m in movies] + [int(r[1]) for r in ratings])

    def write(name, lines):
        with open(dst / name, "w", encoding="utf-8") as fh:
            for ln in lines:
                fh.write(ln + "\n")

    write("ids_U.txt", (str(u) for u in user_ids))
    write("ids_M.txt", (str(m) for m in range(1, max_movie + 1)))
    write("ratings.tsv", (f"{r[0]}\t{r[1]}\t{r[2]}" for r in ratings))
    write("user_gender.tsv", (f"{u[0]}\t{u[1]}" for u in users))
    write("user_age.tsv", (f"{u[0]}\t{u[2]}" for u in users))
    write("user_occupation.tsv", (f"{u[0]}\t{u[3]}" for u in users))
    write("movie_genre.tsv", (f"{m[0]}\t{g}" for m in movies for g in m[2].split("|") if g))

    schema = movielens_schema()
    schema = schema.with_counts({"U": len(user_ids), "M": max_movie})
    save_schema(schema, dst / "schema.yaml")
    return dst

"""Meta-path similarity on a hand-built network.

Four users, three movies and two genres.  We count path instances along
User-Movie-User and User-Movie-Genre-Movie-User, turn counts into PathSim
scores, squash them with the sigmoid normalization, fuse the two paths and
pick each user's nearest neighbor.

    python demos/01_meta_path_similarity.py
"""
import numpy as np
import scipy.sparse as sp

from simmf.hin import RatingMatrix, make_dataset
from simmf.metapath import (build_neighbor_index, commuting_matrix, fuse_similarities, normalize_similarity,
                            parse_metapath, pathsim)

np.set_printoptions(precision=3, suppress=True)

# who rated what (values do not matter for the network, only presence)
ratings = RatingMatrix(users=[0, 0, 1, 1, 1, 2, 3], items=[0, 1, 0, 1, 2, 2, 2],
                       values=[5, 4, 4, 5, 1, 2, 3], shape=(4, 3))
genre = sp.csr_matrix(np.array([[1, 0],    # movie 0: drama
                                [1, 1],    # movie 1: drama + comedy
                                [0, 1]]))  # movie 2: comedy
ds = make_dataset({"U": 4, "M": 3, "T": 2}, [("genre", "M", "T", genre)], ratings=ratings,
                  rating_types=("U", "M"))
store = ds.relation_store()

umu = parse_metapath("UMU", ds.schema)
umtmu = parse_metapath("UMTMU", ds.schema)

print("UMU commuting matrix (shared movies):")
print(commuting_matrix(umu, store).toarray())
print("\nUMTMU commuting matrix (genre-mediated paths):")
print(commuting_matrix(umtmu, store).toarray())

# users 2 and 3 rated exactly the same movie, so their PathSim is 1
s_umu, s_genre = pathsim(umu, store), pathsim(umtmu, store)
print("\nPathSim UMU:")
print(s_umu.toarray())

# the sigmoid is centered on the mean stored score, so the average pair lands at 0.5
n_umu, n_genre = normalize_similarity(s_umu), normalize_similarity(s_genre)
print("\nnormalized UMU:")
print(n_umu.toarray())

fused = fuse_similarities([n_umu, n_genre], [0.5, 0.5])
print("\nequal-weight fusion of both paths:")
print(fused.toarray())

index = build_neighbor_index(fused, k=1)
for u in range(4):
    nbrs, w = index.plus(u)
    print(f"user {u}: nearest neighbor {nbrs.tolist()} (weight {w.round(3).tolist()}), "
          f"listed by {index.minus(u).tolist()}")

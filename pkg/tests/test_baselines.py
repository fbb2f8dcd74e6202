import numpy as np
import pytest

from simmf.baselines import fit_mean, pmf_preset, social_similarity, somf_preset
from simmf.errors import NotApplicableError, ValidationError
from simmf.hin import RatingMatrix
from simmf.model import RegularizationSpec, TrainConfig, train
from simmf.synthetic import movielens_like, with_friends


def test_user_mean_example():
    r = RatingMatrix([0, 0, 1], [0, 1, 0], [3.0, 5.0, 1.0], (3, 2))
    m = fit_mean(r, "user")
    assert m.means[0] == 4.0
    assert m.global_mean == 3.0
    # user 2 has no ratings: global mean
    assert m.predict_many([2, 2], [0, 1]).tolist() == [3.0, 3.0]


def test_item_mean_and_constant_predictions():
    r = RatingMatrix([0, 1, 2], [1, 1, 0], [2.0, 4.0, 5.0], (3, 3))
    m = fit_mean(r, "item")
    assert m.means.tolist() == [5.0, 3.0, pytest.approx(11 / 3)]
    assert len(set(m.predict_many([0, 1, 2], [1, 1, 1]).tolist())) == 1


def test_mean_model_errors():
    with pytest.raises(ValidationError):
        fit_mean(RatingMatrix([], [], [], (2, 2)), "user")
    with pytest.raises(ValueError):
        fit_mean(RatingMatrix([0], [0], [1.0], (1, 1)), "movie")


def test_mean_predictions_within_scale():
    ds = movielens_like(40, 30, 300, seed=3)
    for kind in ("user", "item"):
        m = fit_mean(ds.ratings, kind)
        p = m.predict_many(ds.ratings.users, ds.ratings.items)
        assert p.min() >= 1.0 and p.max() <= 5.0


def test_pmf_preset_equals_unregularized_train():
    ds = movielens_like(30, 20, 200, seed=1)
    cfg = TrainConfig(d=3, max_iters=40, seed=4)
    a = pmf_preset(ds.ratings, cfg)[1]
    b = train(ds.ratings, RegularizationSpec(), cfg)[1]
    assert a.objective == b.objective


def test_somf_not_applicable_without_social_relation():
    ds = movielens_like(20, 10, 60, seed=0)
    with pytest.raises(NotApplicableError, match="not applicable"):
        somf_preset(ds, ds.ratings, TrainConfig(d=2), alpha=1.0)


def test_somf_alpha_zero_is_pmf():
    ds = with_friends(movielens_like(40, 30, 300, seed=2))
    cfg = TrainConfig(d=3, max_iters=30, seed=1)
    a = somf_preset(ds, ds.ratings, cfg, alpha=0.0)[1]
    b = pmf_preset(ds.ratings, cfg)[1]
    assert a.objective == b.objective


def test_somf_runs_and_decreases_objective():
    ds = with_friends(movielens_like(40, 30, 300, seed=2))
    model, trace = somf_preset(ds, ds.ratings, TrainConfig(d=3, max_iters=30), alpha=5.0, k=3)
    assert trace.objective[-1] < trace.initial
    assert np.all(np.isfinite(model.U))


def test_social_similarity_is_symmetric_normalized():
    ds = with_friends(movielens_like(40, 30, 300, seed=2))
    s = social_similarity(ds)
    d = s.toarray()
    np.testing.assert_array_equal(d, d.T)
    assert s.normalized and np.all(np.diag(d) == 0)
    assert np.all((s.matrix.data > 0) & (s.matrix.data < 1))

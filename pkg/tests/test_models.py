import numpy as np
import pytest

from cfadvisor.models import (
    BoostedPredictor,
    FlatTree,
    ModelError,
    UncertaintyForest,
    grow_tree,
)


def test_single_tree_finds_clean_split():
    # parent SSE = 200 - 400/4 = 100; splitting at 2.5 leaves zero SSE on
    # both sides, the unique best cut
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    y = np.array([0.0, 0.0, 10.0, 10.0])
    tree = grow_tree(X, y, max_depth=1)
    assert tree.feature[0] == 0
    assert tree.threshold[0] == 2.5
    preds = tree.predict(np.array([[1.0], [2.4], [2.6], [9.0]]))
    assert preds.tolist() == [0.0, 0.0, 10.0, 10.0]


def test_split_tie_prefers_lowest_feature_index():
    # both columns produce the identical perfect split
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    y = np.array([0.0, 1.0])
    tree = grow_tree(X, y, max_depth=1)
    assert tree.feature[0] == 0


def test_split_tie_prefers_lowest_threshold():
    # gains at thresholds 0.5 and 1.5 are both exactly 1/6
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([0.0, 1.0, 0.0])
    tree = grow_tree(X, y, max_depth=1)
    assert tree.threshold[0] == 0.5


def test_constant_target_gives_single_leaf():
    X = np.arange(10.0).reshape(-1, 1)
    tree = grow_tree(X, np.zeros(10), max_depth=5)
    assert tree.n_nodes == 1
    assert tree.predict(X).tolist() == [0.0] * 10


def make_smooth(n=300, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, size=(n, 3))
    y = 2 * X[:, 0] + 3 * X[:, 1] ** 2 - X[:, 2] + 0.01 * rng.normal(size=n)
    return X, y


def test_boosted_training_mse_never_increases():
    X, y = make_smooth()
    model = BoostedPredictor(n_rounds=60, max_depth=3).fit(X, y)
    curve = model.train_mse_curve[:, 0]
    assert np.all(np.diff(curve) <= 1e-12)
    assert curve[-1] < 0.05 * curve[0]


def test_boosted_fit_quality():
    X, y = make_smooth()
    model = BoostedPredictor(n_rounds=150, max_depth=4).fit(X, y)
    pred = model.predict(X)[:, 0]
    ss_res = np.sum((y - pred) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    assert 1 - ss_res / ss_tot > 0.99


def test_boosted_multi_target_shapes_and_names():
    X, y = make_smooth()
    Y = np.column_stack([y, -y])
    model = BoostedPredictor(n_rounds=20).fit(
        X, Y, feature_names=["a", "b", "c"], target_names=["up", "down"])
    assert model.predict(X).shape == (300, 2)
    assert model.target_names == ["up", "down"]
    one = model.predict_one(X[0])
    assert one.shape == (2,)
    assert np.allclose(one, model.predict(X[:1])[0])


def test_zero_target_predicts_exactly_zero():
    X = np.arange(20.0).reshape(-1, 1)
    model = BoostedPredictor(n_rounds=30).fit(X, np.zeros(20))
    assert np.all(model.predict(X) == 0.0)


def test_predictor_is_frozen_after_fit():
    X, y = make_smooth(50)
    model = BoostedPredictor(n_rounds=5).fit(X, y)
    with pytest.raises(ModelError, match="frozen"):
        model.fit(X, y)


def test_model_hash_stable_under_prediction():
    X, y = make_smooth(80)
    model = BoostedPredictor(n_rounds=10).fit(X, y)
    h0 = model.model_hash()
    for _ in range(5):
        model.predict(X)
    assert model.model_hash() == h0


def test_fit_is_deterministic():
    X, y = make_smooth(120, seed=5)
    h1 = BoostedPredictor(n_rounds=25, seed=1).fit(X, y).model_hash()
    h2 = BoostedPredictor(n_rounds=25, seed=999).fit(X, y).model_hash()
    assert h1 == h2  # the seed is not part of the algorithm


def test_predictor_serialization_roundtrip():
    X, y = make_smooth(100)
    model = BoostedPredictor(n_rounds=15).fit(X, y)
    clone = BoostedPredictor.from_dict(model.to_dict())
    assert np.array_equal(model.predict(X), clone.predict(X))
    assert clone.model_hash() == model.model_hash()


def test_stacked_prediction_matches_per_tree_sum():
    X, y = make_smooth(150, seed=3)
    model = BoostedPredictor(n_rounds=12, max_depth=3).fit(X, y)
    stacked = model.predict(X)[:, 0]
    manual = np.full(len(X), model.base_scores[0])
    for tree in model._ensembles[0]:
        manual += model.learning_rate * tree.predict(X)
    assert np.allclose(stacked, manual, atol=1e-12)


def test_predictor_rejects_bad_hyperparameters():
    with pytest.raises(ModelError):
        BoostedPredictor(learning_rate=2.5)
    with pytest.raises(ModelError):
        BoostedPredictor(n_rounds=0)
    with pytest.raises(ModelError, match="not fitted"):
        BoostedPredictor().predict(np.zeros((1, 2)))


def test_forest_stats_shapes_and_interval():
    X, y = make_smooth(200, seed=7)
    forest = UncertaintyForest(n_trees=30, max_depth=5, seed=0).fit(X, y)
    stats = forest.predict_stats(X[:10])
    for key in ("mean", "std", "lower", "upper"):
        assert stats[key].shape == (10, 1)
    assert np.all(stats["std"] >= 0)
    assert np.allclose(stats["upper"] - stats["lower"], 2 * 1.96 * stats["std"])
    assert np.all(stats["lower"] <= stats["mean"])


def test_forest_seed_controls_bootstrap():
    X, y = make_smooth(150, seed=11)
    a = UncertaintyForest(n_trees=15, seed=0).fit(X, y).predict_stats(X[:5])
    b = UncertaintyForest(n_trees=15, seed=0).fit(X, y).predict_stats(X[:5])
    c = UncertaintyForest(n_trees=15, seed=1).fit(X, y).predict_stats(X[:5])
    assert np.array_equal(a["mean"], b["mean"])
    assert not np.array_equal(a["mean"], c["mean"])


def test_forest_serialization_roundtrip():
    X, y = make_smooth(100, seed=13)
    forest = UncertaintyForest(n_trees=10, max_depth=4, seed=2).fit(X, y)
    clone = UncertaintyForest.from_dict(forest.to_dict())
    a, b = forest.predict_stats(X[:8]), clone.predict_stats(X[:8])
    assert np.array_equal(a["mean"], b["mean"])
    assert np.array_equal(a["std"], b["std"])


def test_flat_tree_roundtrip():
    X, y = make_smooth(60, seed=17)
    tree = grow_tree(X, y, max_depth=4)
    clone = FlatTree.from_dict(tree.to_dict())
    assert np.array_equal(tree.predict(X), clone.predict(X))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegpref.classifiers import KINDS, ClassifierSpec, fit, gradient_check, predict
from eegpref.classifiers.mlp import PARAM_NAMES, init_params
from eegpref.errors import DimensionError, NumericalError, ParameterError, TrainingError

sklearn = pytest.importorskip("sklearn")
from sklearn.discriminant_analysis import QuadraticDiscriminantAnalysis  # noqa: E402
from sklearn.linear_model import RidgeClassifier as SkRidge  # noqa: E402
from sklearn.naive_bayes import GaussianNB as SkNB  # noqa: E402
from sklearn.neighbors import KNeighborsClassifier  # noqa: E402
from sklearn.preprocessing import StandardScaler  # noqa: E402

FAST = {"mlp": {"epochs": 50}, "random_forest": {"n_trees": 10}}


def spec(kind, seed=0, **hp):
    return ClassifierSpec(kind, {**FAST.get(kind, {}), **hp}, seed)


def blobs(rng, n=60, p=3, shift=2.0, labels=(0, 1)):
    y = np.array([labels[i % len(labels)] for i in range(n)])
    X = rng.standard_normal((n, p)) + shift * (y == labels[-1])[:, None]
    return X, y


# hand-built 3-NN fixture: each column is a permutation of [-2..2], so
# z-scoring divides both columns by the same sqrt(2) and keeps every ranking
KNN_POINTS = np.array([[-2, 0], [-1, 1], [0, -2], [1, 2], [2, -1]], dtype=float)
KNN_LABELS = np.array([0, 0, 1, 1, 1])
# query -> (squared raw distances to P0..P4, expected label)
KNN_TABLE = [
    ((-1, 0), (1, 1, 5, 8, 10), 0),   # P0, P1, P2 -> 0, 0, 1
    ((1, 0), (9, 5, 5, 4, 2), 1),     # P4, P3, then P1 over P2 by index -> 1, 1, 0
    ((0, 0), (4, 2, 4, 5, 5), 0),     # P1, P0, P2 -> 0, 0, 1
    ((2, 1), (17, 9, 13, 2, 4), 1),   # P3, P4, P1 -> 1, 1, 0
]


class TestKNN:
    def test_single_training_point(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        model = fit(spec("knn", k=1), X, [3, 5])
        grid = np.random.default_rng(0).uniform(-5, 5, (50, 2))
        near_first = np.linalg.norm(grid - X[0], axis=1) < np.linalg.norm(grid - X[1], axis=1)
        np.testing.assert_array_equal(model.predict(grid), np.where(near_first, 3, 5))

    def test_distance_tie_prefers_lower_row(self):
        model = fit(spec("knn", k=1), [[1.0], [1.0]], [0, 1])
        assert set(model.predict([[0.0], [9.0]])) == {0}

    def test_training_row_k1(self, rng):
        X, y = blobs(rng, shift=0.5)
        model = fit(spec("knn", k=1), X, y)
        np.testing.assert_array_equal(model.predict(X), y)

    @pytest.mark.parametrize("query,dists,label", KNN_TABLE)
    def test_distance_table_fixture(self, query, dists, label):
        assert tuple(((KNN_POINTS - query) ** 2).sum(axis=1).astype(int)) == dists
        model = fit(spec("knn", k=3), KNN_POINTS, KNN_LABELS)
        assert model.predict([query])[0] == label

    def test_tied_vote_uses_nearest(self):
        X = np.array([[0.0], [1.0], [3.0], [4.0]])
        model = fit(spec("knn", k=2), X, [0, 1, 0, 1])
        # neighbours of 0.9: row 1 (label 1) then row 0 (label 0) -> nearest wins
        assert model.predict([[0.9]])[0] == 1
        assert model.predict([[0.1]])[0] == 0

    def test_matches_sklearn(self, rng):
        X, y = blobs(rng, n=80, p=4, shift=1.0)
        Xt = rng.standard_normal((40, 4)) + 0.5
        sc = StandardScaler().fit(X)
        ref = KNeighborsClassifier(5).fit(sc.transform(X), y).predict(sc.transform(Xt))
        np.testing.assert_array_equal(fit(spec("knn"), X, y).predict(Xt), ref)


class TestTree:
    def test_xor(self):
        X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        y = np.array([0, 1, 1, 0])
        for depth in (2, 3, 10):
            model = fit(spec("decision_tree", max_depth=depth), X, y)
            np.testing.assert_array_equal(model.predict(X), y)

    def test_tie_prefers_lower_feature_and_midpoint(self):
        X = np.array([[0.0, 0.0], [2.0, 2.0]])
        model = fit(spec("decision_tree", max_depth=1), X, [0, 1])
        p = model.params()
        assert p["feature"][0] == 0
        assert p["threshold"][0] == 1.0

    def test_depth_one_stump(self, rng):
        X, y = blobs(rng, n=100, p=2, shift=0.3)
        model = fit(spec("decision_tree", max_depth=1), X, y)
        assert len(np.unique(model.apply(X))) <= 2


class TestForest:
    @pytest.mark.parametrize("seed", range(20))
    def test_single_tree_equals_tree(self, seed):
        r = np.random.default_rng(1000 + seed)
        n, p = r.integers(10, 40), r.integers(1, 6)
        X = np.round(r.standard_normal((n, p)), 1)
        y = r.integers(0, 3, size=n)
        y[:2] = [0, 1]
        hp = dict(max_depth=int(r.integers(1, 8)), min_samples_split=int(r.integers(2, 5)))
        tree = fit(ClassifierSpec("decision_tree", {**hp, "max_features": "all"}, seed), X, y)
        forest = fit(ClassifierSpec("random_forest", {**hp, "n_trees": 1, "bootstrap": False,
                                                      "max_features": "all"}, seed), X, y)
        Xq = np.vstack([X, np.round(r.standard_normal((30, p)), 1)])
        np.testing.assert_array_equal(forest.predict(Xq), tree.predict(Xq))
        tp, fp = tree.params(), forest.params()
        for key in ("feature", "threshold", "left", "right", "value"):
            np.testing.assert_array_equal(fp[f"tree0.{key}"], tp[key])

    def test_tree_seeds_follow_index(self, rng):
        X, y = blobs(rng)
        forest = fit(spec("random_forest", seed=5, n_trees=3), X, y)
        assert [t.seed for t in forest.trees_] == [5, 6, 7]

    def test_importances_normalized(self, rng):
        X, y = blobs(rng, p=4)
        imp = fit(spec("random_forest"), X, y).feature_importances_
        assert imp.shape == (4,) and abs(imp.sum() - 1) < 1e-12


class TestNaiveBayes:
    def test_separated_gaussians(self):
        r = np.random.default_rng(3)
        X = np.concatenate([r.normal(-5, 1, 100), r.normal(5, 1, 100)])[:, None]
        y = np.repeat([0, 1], 100)
        assert np.mean(fit(spec("gaussian_nb"), X, y).predict(X) == y) >= 0.99

    def test_posteriors_sum_to_one(self, rng):
        X, y = blobs(rng, p=5, labels=(0, 1, 2))
        proba = fit(spec("gaussian_nb"), X, y).predict_proba(rng.standard_normal((50, 5)) * 10)
        assert np.max(np.abs(proba.sum(axis=1) - 1)) < 1e-12

    def test_matches_sklearn(self, rng):
        X, y = blobs(rng, n=90, p=3, shift=1.0, labels=(0, 1, 2))
        Xt = rng.standard_normal((60, 3)) * 2
        ours = fit(spec("gaussian_nb", var_floor=1e-12), X, y)
        ref = SkNB(var_smoothing=1e-12).fit(X, y)
        np.testing.assert_allclose(ours.predict_proba(Xt), ref.predict_proba(Xt), atol=1e-9)

    def test_constant_feature_is_finite(self):
        X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 5.0], [1.0, 6.0]])
        model = fit(spec("gaussian_nb"), X, [0, 0, 1, 1])
        assert np.all(np.isfinite(model.predict_proba(X)))


class TestRidge:
    def test_tie_goes_to_smaller_label(self):
        X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
        model = fit(spec("ridge"), X, [7, 7, 3, 3])
        assert model.decision_function(model.scaler_.transform([[0.0]]))[0, 0] == pytest.approx(0.0, abs=1e-12)
        assert model.predict([[0.0]])[0] == 3

    @pytest.mark.parametrize("labels", [(0, 1), (0, 1, 2)])
    def test_matches_sklearn(self, rng, labels):
        X, y = blobs(rng, n=90, p=4, shift=0.8, labels=labels)
        Xt = rng.standard_normal((40, 4))
        ours = fit(spec("ridge", alpha=2.0), X, y)
        sc = StandardScaler().fit(X)
        ref = SkRidge(alpha=2.0).fit(sc.transform(X), y)
        np.testing.assert_allclose(ours.coef_, ref.coef_.reshape(ours.coef_.shape), atol=1e-10)
        np.testing.assert_array_equal(ours.predict(Xt), ref.predict(sc.transform(Xt)))


class TestQDA:
    def test_matches_sklearn_without_shrinkage(self, rng):
        X, y = blobs(rng, n=120, p=3, shift=1.0, labels=(0, 1, 2))
        X[y == 2] *= 2.5
        Xt = rng.standard_normal((50, 3)) * 2
        ours = fit(spec("qda", shrinkage=0.0), X, y)
        ref = QuadraticDiscriminantAnalysis(reg_param=0.0).fit(X, y)
        np.testing.assert_array_equal(ours.predict(Xt), ref.predict(Xt))

    def test_singular_names_class(self):
        X = np.array([[0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [0.0, 0.0], [1.0, 2.0], [2.0, 5.0]])
        with pytest.raises(NumericalError, match="'?7'?"):
            fit(spec("qda"), X, [7, 7, 7, 9, 9, 9])


class TestMLP:
    def test_seeded_gradient(self, rng):
        X = rng.standard_normal((10, 3))
        y = np.array([0, 1] * 5)
        assert gradient_check(spec("mlp", seed=4), X, y) < 1e-4

    def test_zero_weights(self, rng):
        X = rng.standard_normal((12, 4))
        y = np.arange(12) % 3
        s = spec("mlp", hidden=6)
        zeros = {k: np.zeros_like(v) for k, v in init_params(4, 6, 3, 0).items()}
        assert gradient_check(s, X, y, params=zeros) < 1e-6

    def test_single_sample(self, rng):
        assert gradient_check(spec("mlp", seed=1), rng.standard_normal((1, 5)), [1]) < 1e-4

    def test_training_reduces_loss(self, rng):
        X, y = blobs(rng)
        model = fit(spec("mlp", epochs=200, learning_rate=0.1), X, y)
        assert model.loss_curve_[-1] < model.loss_curve_[0]
        assert set(model.params()) >= set(PARAM_NAMES)


class TestContract:
    @pytest.mark.parametrize("kind", KINDS)
    def test_label_closure_and_determinism(self, kind, rng):
        X, y = blobs(rng, n=60, p=3, shift=1.0, labels=(2, 5, 9))
        Xt = rng.standard_normal((30, 3)) * 3
        a = fit(spec(kind, seed=11), X, y).predict(Xt)
        b = fit(spec(kind, seed=11), X, y).predict(Xt)
        assert set(a) <= {2, 5, 9}
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(predict(fit(spec(kind, seed=11), X, y), Xt), a)

    @pytest.mark.parametrize("kind", KINDS)
    def test_single_class(self, kind):
        with pytest.raises(TrainingError):
            fit(spec(kind), np.ones((4, 2)), [1, 1, 1, 1])

    @pytest.mark.parametrize("kind", KINDS)
    def test_dimension_mismatch(self, kind, rng):
        X, y = blobs(rng)
        model = fit(spec(kind), X, y)
        with pytest.raises(DimensionError):
            model.predict(np.zeros((2, 4)))

    @pytest.mark.parametrize("kind", ["knn", "ridge"])
    @settings(max_examples=20, deadline=None)
    @given(scale=st.lists(st.floats(1e-3, 1e3), min_size=3, max_size=3), seed=st.integers(0, 1000))
    def test_scaling_invariance(self, kind, scale, seed):
        r = np.random.default_rng(seed)
        X, y = blobs(r, n=40, p=3, shift=0.7)
        Xt = r.standard_normal((20, 3))
        k = np.array(scale)
        base = fit(spec(kind), X, y).predict(Xt)
        np.testing.assert_array_equal(fit(spec(kind), X * k, y).predict(Xt * k), base)

    @pytest.mark.parametrize("kind,hp", [("knn", {"k": 0}), ("random_forest", {"n_trees": 0}),
                                         ("mlp", {"hidden": 0}), ("qda", {"shrinkage": 2}),
                                         ("knn", {"depth": 3})])
    def test_hyperparameter_validation(self, kind, hp):
        with pytest.raises(ParameterError):
            ClassifierSpec(kind, hp)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            ClassifierSpec("svc")

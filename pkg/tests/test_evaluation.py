import numpy as np
import pytest

from clvboost import (
    DataError,
    Dataset,
    cross_validate_baseline,
    cross_validate_lmclv,
    fit,
    make_folds,
    pcr_fit,
    pls1_fit,
    predict,
    rmse,
)
from clvboost.boost import staged_predict
from clvboost.evaluation import cv_rows, cv_summary

from conftest import random_dataset


class TestRmse:
    def test_values(self):
        assert rmse([1, 2, 3], [1, 2, 3]) == 0.0
        assert rmse([0, 0], [1, -1]) == 1.0
        assert rmse([1, 2, 3], [2, 2, 2]) == pytest.approx(np.sqrt(2 / 3))

    def test_errors(self):
        with pytest.raises(ValueError):
            rmse([1, 2], [1])
        with pytest.raises(ValueError):
            rmse([], [])


def _ols(X, y):
    Xc, yc = X - X.mean(axis=0), y - y.mean()
    return np.linalg.lstsq(Xc, yc, rcond=None)[0]


class TestLatentBaselines:
    @pytest.fixture
    def xy(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((40, 6))
        y = X @ rng.standard_normal(6) + 0.3 * rng.standard_normal(40)
        return X - X.mean(axis=0), y - y.mean()

    @pytest.mark.parametrize("fitter", [pcr_fit, pls1_fit])
    def test_full_rank_is_ols(self, xy, fitter):
        X, y = xy
        np.testing.assert_allclose(fitter(X, y, 6).coefs[-1], _ols(X, y), atol=1e-8)

    def test_pls_scores_orthogonal(self, xy):
        T = pls1_fit(*xy, 5).scores
        np.testing.assert_allclose(T.T @ T, np.eye(5), atol=1e-8)

    def test_pcr_scores_orthonormal(self, xy):
        T = pcr_fit(*xy, 4).scores
        np.testing.assert_allclose(T.T @ T, np.eye(4), atol=1e-10)

    @pytest.mark.parametrize("fitter", [pcr_fit, pls1_fit])
    def test_planted_direction_one_component(self, fitter):
        rng = np.random.default_rng(5)
        w = rng.standard_normal(8)
        w /= np.linalg.norm(w)
        t = 10 * rng.standard_normal(60)
        X = np.outer(t, w) + 0.01 * rng.standard_normal((60, 8))
        X -= X.mean(axis=0)
        y = X @ w
        coef = fitter(X, y, 1).coefs[1]
        assert abs(coef @ w) / np.linalg.norm(coef) > 0.999

    def test_component_range(self, xy):
        with pytest.raises(ValueError):
            pcr_fit(*xy, 0)
        with pytest.raises(ValueError):
            pls1_fit(*xy, 7)

    def test_pls_stops_when_exhausted(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((20, 5))
        X -= X.mean(axis=0)
        model = pls1_fit(X, X[:, 0].copy(), 5)
        assert model.n_components <= 5
        np.testing.assert_allclose(X @ model.coefs[-1], X[:, 0], atol=1e-8)

    @pytest.mark.parametrize("method", ["PCR", "PLS1"])
    def test_training_error_beats_cv(self, toy_data, toy_folds, method):
        res = cross_validate_baseline(toy_data, toy_folds, method, 15)
        assert res.rmse_train.shape == res.rmse_cv.shape == (16,)
        assert res.rmse_train[0] == pytest.approx(np.std(toy_data.response))
        assert res.rmse_train[-1] < res.rmse_cv.min()
        assert np.all(np.diff(res.rmse_train) <= 1e-12)


class TestCrossValidation:
    def test_leave_one_out_by_hand(self):
        data = random_dataset(np.random.default_rng(7), n=10, p=3, groups=1)
        folds = make_folds(10, 10, seed=0)
        (curve,) = cross_validate_lmclv(data, folds, [0.5], 4)
        sq = np.zeros(5)
        for i in range(10):
            keep = np.setdiff1d(np.arange(10), [i])
            model = fit(data.subset(keep), nu=0.5, M=4)
            sq += (staged_predict(model, data.values[[i]])[:, 0] - data.response[i]) ** 2
        np.testing.assert_allclose(curve.rmse_cv, np.sqrt(sq / 10), rtol=1e-12)

    def test_no_leakage(self, toy_data, toy_folds):
        curves = cross_validate_lmclv(toy_data, toy_folds, [0.3, 0.7], 6)
        for curve in curves:
            for f in range(toy_folds.k):
                train = toy_data.subset(toy_folds.train_index(f))
                test = toy_data.subset(toy_folds.test_index(f))
                model = fit(train, nu=curve.nu, M=6)
                assert rmse(test.response, predict(model, test.values)) == pytest.approx(
                    curve.per_fold_rmse[f, -1], rel=1e-12
                )
                assert curve.selections[f] == tuple(s.members for s in model.steps)

    def test_rows_and_summary(self, toy_data, toy_folds):
        curves = cross_validate_lmclv(toy_data, toy_folds, [0.5, 0.8], 5)
        rows = cv_rows(curves)
        assert len(rows) == 2 * 6 * (toy_folds.k + 1)
        summary = cv_summary(curves, toy_data.var_names)
        best = summary["best"]
        assert best["rmse_cv"] == min(float(c.rmse_cv.min()) for c in curves)
        assert summary["selections"][0]["folds"][0][0][0].startswith("x")

    def test_rejects_bad_inputs(self, toy_data, toy_folds):
        with pytest.raises(ValueError):
            cross_validate_lmclv(toy_data, toy_folds, [0.0], 3)
        with pytest.raises(DataError):
            cross_validate_lmclv(toy_data, make_folds(50, 5), [0.5], 3)
        unlabeled = Dataset(toy_data.values, toy_data.var_names, toy_data.obs_ids)
        with pytest.raises(DataError):
            cross_validate_lmclv(unlabeled, toy_folds, [0.5], 3)

    def test_toy_curve_reported(self, toy_data, toy_folds):
        (curve,) = cross_validate_lmclv(toy_data, toy_folds, [0.7], 3)
        # informational: the held-out error after three steps
        print(f"toy RMSE_CV(nu=0.7, m=3) = {curve.rmse_cv[3]:.3f}")
        assert curve.rmse_cv[3] < curve.rmse_cv[0]

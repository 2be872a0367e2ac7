"""TF-IDF weighting and the primal-subgradient linear SVM."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from valnov.baseline import (
    DEFAULT_C,
    LinearSvm,
    TfidfModel,
    baseline_predict,
    document_text,
    fit_baseline,
    load_baseline,
    predict_corpus,
    save_baseline,
    svm_objective,
    svm_train,
    tfidf_fit,
    tfidf_transform,
)
from valnov.corpus import LabelValue, Task, mapped_value
from valnov.errors import ConfigurationError, DataError
from valnov.synthetic import make_separable_corpus

from conftest import make_instance

# the 4-point toy problem used for the brute-force objective check;
# grid oracle over (w0, w1, b) in linspace(-4, 4, 100)^3 bottoms out at
# 1.352719110294868
TOY_X = [
    {0: 1.0, 1: 0.2},
    {0: 0.6, 1: -0.3},
    {0: -0.8, 1: 0.4},
    {0: -0.5, 1: -0.6},
]
TOY_Y = [1, 1, -1, -1]
TOY_GRID_OBJECTIVE = 1.352719110294868


class TestDocumentText:
    def test_concatenation(self):
        inst = make_instance(premise="guns kill", conclusion="ban guns")
        assert document_text(inst) == "guns kill ban guns"


class TestTfidf:
    def test_empty_corpus_rejected(self):
        with pytest.raises(ConfigurationError):
            tfidf_fit([])

    def test_idf_hand_values(self):
        model = tfidf_fit(["cats run", "cats sleep"])
        assert model.document_count == 2
        assert model.vocabulary == {"cat": 0, "run": 1, "sleep": 2}
        # smoothed idf: ln((1 + N) / (1 + df)) + 1
        assert model.idf[0] == pytest.approx(math.log(3 / 3) + 1.0)
        assert model.idf[1] == pytest.approx(math.log(3 / 2) + 1.0)
        assert model.idf[2] == pytest.approx(math.log(3 / 2) + 1.0)

    def test_transform_hand_values(self):
        model = tfidf_fit(["cats run", "cats sleep"])
        vec = tfidf_transform(model, "cats run")
        w_cat = 1.0 * 1.0
        w_run = 1.0 * (math.log(3 / 2) + 1.0)
        norm = math.hypot(w_cat, w_run)
        assert vec[0] == pytest.approx(w_cat / norm)
        assert vec[1] == pytest.approx(w_run / norm)
        assert set(vec) == {0, 1}

    def test_term_frequency_counts_repeats(self):
        model = tfidf_fit(["cat", "dog"])
        vec_single = tfidf_transform(model, "cat dog")
        vec_double = tfidf_transform(model, "cat cat dog")
        # same idf, tf 2 vs 1 on "cat" tilts the normalized weight
        assert vec_double[model.vocabulary["cat"]] > vec_single[model.vocabulary["cat"]]

    def test_unseen_terms_dropped(self):
        model = tfidf_fit(["cats run"])
        assert tfidf_transform(model, "dogs bark") == {}

    def test_stemming_folds_inflections(self):
        model = tfidf_fit(["run runs running"])
        assert len(model.vocabulary) == 1
        assert tfidf_transform(model, "running") == tfidf_transform(model, "run")

    def test_document_frequency_ignores_repeats_within_doc(self):
        model = tfidf_fit(["cat cat cat", "cat", "dog"])
        # df(cat)=2 not 4
        assert model.idf[model.vocabulary["cat"]] == pytest.approx(
            math.log(4 / 3) + 1.0
        )

    @settings(max_examples=60)
    @given(st.text(alphabet="abcd ", max_size=40))
    def test_transform_norm_is_one_or_zero(self, text):
        model = tfidf_fit(["ab cd", "ab ab", "dc ba"])
        vec = tfidf_transform(model, text)
        norm = math.sqrt(sum(v * v for v in vec.values()))
        assert norm == pytest.approx(1.0) or norm == 0.0


class TestSvmObjective:
    def test_hand_value(self):
        # w=(1,0), b=0: margin of the only point is -2, hinge = 3
        value = svm_objective(np.array([1.0, 0.0]), 0.0, [{0: 2.0}], [-1], C=2.0)
        assert value == pytest.approx(0.5 * 1.0 + 2.0 * 3.0)

    def test_zero_weights(self):
        value = svm_objective(np.zeros(2), 0.0, TOY_X, TOY_Y, C=1.0)
        assert value == pytest.approx(4.0)  # every point at hinge 1


class TestSvmTrain:
    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            svm_train([{0: 1.0}, {0: 2.0}], [1, 1], dim=1, C=1.0)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            svm_train([], [], dim=1, C=1.0)

    def test_nonpositive_c_rejected(self):
        with pytest.raises(ConfigurationError):
            svm_train(TOY_X, TOY_Y, dim=2, C=0.0)

    def test_near_optimal_on_toy_problem(self):
        fit = svm_train(TOY_X, TOY_Y, dim=2, C=1.0, seed=0)
        assert fit.objective <= TOY_GRID_OBJECTIVE * 1.02
        assert fit.objective >= TOY_GRID_OBJECTIVE * 0.98

    def test_deterministic_per_seed(self):
        a = svm_train(TOY_X, TOY_Y, dim=2, C=1.0, seed=3)
        b = svm_train(TOY_X, TOY_Y, dim=2, C=1.0, seed=3)
        assert np.array_equal(a.model.weights, b.model.weights)
        assert a.model.bias == b.model.bias
        assert a.objective == b.objective

    def test_tiny_c_shrinks_weights(self):
        # projection radius is sqrt(C*n)
        fit = svm_train(TOY_X, TOY_Y, dim=2, C=1e-6, steps=400)
        assert float(np.linalg.norm(fit.model.weights)) <= math.sqrt(1e-6 * 4) + 1e-12

    def test_symmetric_1d_bias_vanishes(self):
        fit = svm_train([{0: -1.0}, {0: 1.0}], [-1, 1], dim=1, C=10.0, steps=1000)
        w = float(fit.model.weights[0])
        assert w > 0
        assert abs(fit.model.bias / w) <= 0.1

    def test_tail_average_trace_nearly_monotone(self):
        fit = svm_train(TOY_X, TOY_Y, dim=2, C=1.0, steps=4000, trace_every=50)
        assert len(fit.trace) >= 10
        for prev, cur in zip(fit.trace, fit.trace[1:]):
            assert cur <= prev + 1e-3 * max(1.0, abs(prev))
        assert fit.trace[-1] == pytest.approx(fit.objective, rel=1e-6)

    def test_trace_off_by_default(self):
        fit = svm_train(TOY_X, TOY_Y, dim=2, C=1.0, steps=200)
        assert fit.trace == ()


class TestBaselinePredict:
    def toy_models(self, bias):
        tfidf = TfidfModel(vocabulary={"cat": 0}, idf=np.array([1.0]), document_count=1)
        svm = LinearSvm(weights=np.array([2.0]), bias=bias, C=1.0)
        return svm, tfidf

    def test_positive_half_space(self):
        svm, tfidf = self.toy_models(bias=-1.0)
        inst = make_instance(premise="cat", conclusion="cat")
        pred = baseline_predict(svm, tfidf, inst, Task.VALIDITY)
        assert pred.value is LabelValue.POSITIVE
        assert pred.source == "svm"
        assert not pred.flagged

    def test_zero_score_is_negative(self):
        svm, tfidf = self.toy_models(bias=0.0)
        inst = make_instance(premise="dog", conclusion="dog")  # zero vector
        assert baseline_predict(svm, tfidf, inst, Task.VALIDITY).value is LabelValue.NEGATIVE

    def test_unseen_text_follows_bias_sign(self):
        svm_pos, tfidf = self.toy_models(bias=0.5)
        svm_neg, _ = self.toy_models(bias=-0.5)
        inst = make_instance(premise="dog", conclusion="dog")
        assert baseline_predict(svm_pos, tfidf, inst, Task.NOVELTY).value is LabelValue.POSITIVE
        assert baseline_predict(svm_neg, tfidf, inst, Task.NOVELTY).value is LabelValue.NEGATIVE

    def test_predict_corpus_shape(self):
        svm, tfidf = self.toy_models(bias=1.0)
        instances = [make_instance(id=f"i{k}") for k in range(3)]
        preds = predict_corpus(svm, tfidf, instances, Task.NOVELTY, source="svm-novelty")
        assert preds.source_tag == "svm-novelty"
        assert [p.instance_id for p in preds] == ["i0", "i1", "i2"]
        assert all(p.task is Task.NOVELTY and p.source == "svm-novelty" for p in preds)


class TestFitBaseline:
    def test_default_regularization(self):
        assert DEFAULT_C == {Task.VALIDITY: 0.09, Task.NOVELTY: 4.7}

    @pytest.mark.parametrize("task", [Task.VALIDITY, Task.NOVELTY])
    def test_separates_marker_corpus(self, task):
        train, _ = make_separable_corpus(n_train=60, n_dev=0)
        tfidf, fit = fit_baseline(train, task, C=1.0, seed=0)
        preds = predict_corpus(fit.model, tfidf, train, task)
        gold_positive = {
            inst.id for inst in train if mapped_value(inst, task) is LabelValue.POSITIVE
        }
        predicted_positive = {
            p.instance_id for p in preds if p.value is LabelValue.POSITIVE
        }
        assert predicted_positive == gold_positive

    def test_uses_task_default_c(self):
        train, _ = make_separable_corpus(n_train=24, n_dev=0)
        _, fit = fit_baseline(train, Task.NOVELTY, seed=0)
        assert fit.model.C == DEFAULT_C[Task.NOVELTY]


class TestSaveLoad:
    def test_round_trip(self, tmp_path):
        train, _ = make_separable_corpus(n_train=24, n_dev=0)
        tfidf, fit = fit_baseline(train, Task.VALIDITY, C=1.0, seed=0)
        path = tmp_path / "model.json"
        save_baseline(path, fit.model, tfidf)
        model2, tfidf2 = load_baseline(path)

        assert np.array_equal(model2.weights, fit.model.weights)
        assert model2.bias == fit.model.bias
        assert model2.C == fit.model.C
        assert tfidf2.vocabulary == tfidf.vocabulary
        assert np.array_equal(tfidf2.idf, tfidf.idf)
        assert tfidf2.document_count == tfidf.document_count

        original = predict_corpus(fit.model, tfidf, train, Task.VALIDITY)
        reloaded = predict_corpus(model2, tfidf2, train, Task.VALIDITY)
        assert list(original) == list(reloaded)

"""Estimator-level tests: sklearn API contract, training determinism,
supervision on/off equivalences, checkpointing, and the inductive path."""

import dataclasses

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hopgat import HopGATClassifier, generate_sbm
from hopgat.graphs import Graph


@pytest.fixture(scope="module")
def small_graph():
    return generate_sbm(2, 30, p_in=0.25, p_out=0.02, feature_noise=0.5, seed=1)


def fast_params(**over):
    base = dict(
        hidden_dims=(4,),
        heads=(2, 1),
        max_epochs=15,
        patience=30,
        learning_rate=0.01,
        sample_ratio=0.05,
        seed=0,
    )
    base.update(over)
    return base


def multi_graphs(seed=0, n=12, n_feat=5, n_lab=3):
    """Three tiny multi-label graphs: two train, one with val+test nodes."""
    rng = np.random.default_rng(seed)
    out = []
    for gi in range(3):
        edges = []
        for i in range(n - 1):
            edges.append((i, i + 1))
        extra = rng.integers(0, n, size=(4, 2))
        edges.extend((a, b) for a, b in extra if a != b)
        labels = (rng.random((n, n_lab)) < 0.4).astype(np.int64)
        train = np.zeros(n, bool)
        val = np.zeros(n, bool)
        test = np.zeros(n, bool)
        if gi < 2:
            train[:] = True
        else:
            val[: n // 2] = True
            test[n // 2 :] = True
        out.append(
            Graph(
                num_nodes=n,
                edges=np.asarray(edges, dtype=np.int64),
                features=rng.standard_normal((n, n_feat)),
                labels=labels,
                label_mode="multi",
                train_mask=train,
                val_mask=val,
                test_mask=test,
            )
        )
    return out


class TestSklearnContract:
    def test_get_params_returns_init_args_verbatim(self):
        est = HopGATClassifier(hidden_dims=(16,), heads=(4, 2), l2=0.01)
        params = est.get_params()
        assert params["hidden_dims"] == (16,)
        assert params["heads"] == (4, 2)
        assert params["l2"] == 0.01

    def test_clone_preserves_params(self):
        est = HopGATClassifier(attention_kind="product", max_hv=3, seed=7)
        twin = clone(est)
        assert twin.get_params() == est.get_params()

    def test_set_params_round_trip(self):
        est = HopGATClassifier()
        est.set_params(learning_rate=0.123, heads=(3, 1))
        assert est.learning_rate == 0.123
        assert est.heads == (3, 1)

    def test_predict_before_fit_raises(self, small_graph):
        with pytest.raises(NotFittedError):
            HopGATClassifier().predict(small_graph)

    def test_score_before_fit_raises(self, small_graph):
        with pytest.raises(NotFittedError):
            HopGATClassifier().score(small_graph)

    def test_fit_returns_self(self, small_graph):
        est = HopGATClassifier(**fast_params(max_epochs=2))
        assert est.fit(small_graph) is est


class TestParamValidation:
    @pytest.mark.parametrize(
        "bad",
        [
            dict(learning_rate=0.0),
            dict(l2=-1e-4),
            dict(max_epochs=0),
            dict(batch_size=0),
            dict(gamma_fixed=1.5),
            dict(snapshot_every=-1),
        ],
    )
    def test_bad_scalar_params_raise(self, small_graph, bad):
        with pytest.raises(ValueError):
            HopGATClassifier(**fast_params(**bad)).fit(small_graph)

    def test_heads_must_cover_every_layer(self, small_graph):
        with pytest.raises(ValueError, match="heads"):
            HopGATClassifier(**fast_params(hidden_dims=(4, 4), heads=(2, 1))).fit(small_graph)

    def test_transductive_rejects_multiple_graphs(self, small_graph):
        with pytest.raises(ValueError, match="one graph"):
            HopGATClassifier(**fast_params(mode="transductive")).fit([small_graph, small_graph])

    def test_inductive_rejects_single_label_data(self, small_graph):
        with pytest.raises(ValueError, match="multi-label"):
            HopGATClassifier(**fast_params(mode="inductive")).fit(small_graph)

    def test_rejects_non_graph_input(self):
        with pytest.raises(TypeError, match="Graph"):
            HopGATClassifier().fit(np.zeros((4, 4)))


class TestFittedState:
    def test_fitted_attributes(self, small_graph):
        est = HopGATClassifier(**fast_params()).fit(small_graph)
        assert est.mode_ == "transductive"
        assert est.label_mode_ == "single"
        assert est.n_features_in_ == small_graph.num_features
        assert est.n_classes_ == 2
        assert est.n_epochs_ == len(est.history_) == 15
        assert 0 <= est.best_epoch_ < est.n_epochs_
        assert np.isfinite(est.best_val_loss_)
        assert 0.0 <= est.best_val_metric_ <= 1.0

    def test_history_rows_follow_the_schedule(self, small_graph):
        est = HopGATClassifier(**fast_params(temp_decay=0.9)).fit(small_graph)
        temps = [r.temperature for r in est.history_]
        assert temps[0] == 100.0
        assert all(b <= a for a, b in zip(temps, temps[1:]))
        assert all(0.0 <= r.gamma <= 1.0 for r in est.history_)
        assert all(r.attention_loss is not None for r in est.history_)

    def test_unsupervised_history_has_no_attention_loss(self, small_graph):
        est = HopGATClassifier(**fast_params(supervised=False)).fit(small_graph)
        assert all(r.attention_loss is None for r in est.history_)
        assert all(r.gamma == 0.0 for r in est.history_)

    def test_early_stopping_can_fire(self, small_graph):
        est = HopGATClassifier(**fast_params(max_epochs=200, patience=5)).fit(small_graph)
        assert est.stopped_early_
        assert est.n_epochs_ < 200

    def test_fit_does_not_mutate_the_input_graph(self, small_graph):
        before = small_graph.label_visible.copy()
        HopGATClassifier(**fast_params(label_rate=0.4, max_epochs=2)).fit(small_graph)
        np.testing.assert_array_equal(small_graph.label_visible, before)

    def test_label_rate_shrinks_visible_labels(self, small_graph):
        est = HopGATClassifier(**fast_params(max_epochs=200, patience=3, label_rate=0.3))
        est.fit(small_graph)
        full = HopGATClassifier(**fast_params(max_epochs=200, patience=3))
        full.fit(small_graph)
        # can't observe the internal copy directly; the trajectories must differ
        assert [r.classification_loss for r in est.history_][:3] != [
            r.classification_loss for r in full.history_
        ][:3]


class TestDeterminism:
    def test_same_seed_gives_identical_trajectories(self, small_graph):
        a = HopGATClassifier(**fast_params()).fit(small_graph)
        b = HopGATClassifier(**fast_params()).fit(small_graph)
        assert [r.classification_loss for r in a.history_] == [
            r.classification_loss for r in b.history_
        ]
        np.testing.assert_array_equal(a.predict(small_graph), b.predict(small_graph))

    def test_different_seed_changes_the_trajectory(self, small_graph):
        a = HopGATClassifier(**fast_params(seed=0)).fit(small_graph)
        b = HopGATClassifier(**fast_params(seed=1)).fit(small_graph)
        assert [r.classification_loss for r in a.history_] != [
            r.classification_loss for r in b.history_
        ]


class TestSupervisionEquivalences:
    def test_gamma_zero_baseline_equals_unsupervised_run(self, small_graph):
        """Forcing the mix weight to 0 must leave the classification loop
        bit-identical to a run with the supervision machinery off."""
        kw = fast_params(attention_kind="baseline", max_epochs=8)
        sup = HopGATClassifier(**kw, gamma_fixed=0.0).fit(small_graph)
        plain = HopGATClassifier(**kw, supervised=False).fit(small_graph)
        assert [r.classification_loss for r in sup.history_] == [
            r.classification_loss for r in plain.history_
        ]
        np.testing.assert_array_equal(
            sup.decision_function(small_graph), plain.decision_function(small_graph)
        )

    def test_l2_changes_the_trajectory(self, small_graph):
        a = HopGATClassifier(**fast_params(l2=0.0, max_epochs=6)).fit(small_graph)
        b = HopGATClassifier(**fast_params(l2=0.01, max_epochs=6)).fit(small_graph)
        assert [r.classification_loss for r in a.history_] != [
            r.classification_loss for r in b.history_
        ]

    def test_scrambled_test_labels_do_not_change_training(self, small_graph):
        """Early stopping and fitting never look at test labels."""
        g = small_graph
        labels = g.labels.copy()
        labels[g.test_mask] = 1 - labels[g.test_mask]
        scrambled = dataclasses.replace(
            g, labels=labels, label_visible=g.label_visible.copy()
        )
        a = HopGATClassifier(**fast_params()).fit(g)
        b = HopGATClassifier(**fast_params()).fit(scrambled)
        assert [r.classification_loss for r in a.history_] == [
            r.classification_loss for r in b.history_
        ]
        assert a.best_epoch_ == b.best_epoch_
        np.testing.assert_array_equal(a.predict(g), b.predict(g))


@pytest.fixture(scope="module")
def fitted(small_graph):
    return HopGATClassifier(**fast_params(max_epochs=30)).fit(small_graph)


class TestInference:
    def test_predict_matches_argmax_of_proba(self, fitted, small_graph):
        proba = fitted.predict_proba(small_graph)
        np.testing.assert_array_equal(proba.argmax(axis=1), fitted.predict(small_graph))

    def test_proba_rows_sum_to_one(self, fitted, small_graph):
        proba = fitted.predict_proba(small_graph)
        assert proba.shape == (small_graph.num_nodes, 2)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, rtol=1e-12)

    def test_decision_function_shape(self, fitted, small_graph):
        z = fitted.decision_function(small_graph)
        assert z.shape == (small_graph.num_nodes, 2)

    def test_list_input_gives_list_output(self, fitted, small_graph):
        outs = fitted.predict([small_graph])
        assert isinstance(outs, list) and len(outs) == 1

    def test_score_splits(self, fitted, small_graph):
        for split in ("train", "val", "test"):
            s = fitted.score(small_graph, split=split)
            assert 0.0 <= s <= 1.0
        with pytest.raises(ValueError, match="split"):
            fitted.score(small_graph, split="dev")

    def test_attention_stats_structure(self, fitted, small_graph):
        stats = fitted.attention_stats(small_graph)[0]
        assert {(f["layer"], f["head"]) for f in stats} == {(0, 0), (0, 1), (1, 0)}
        for f in stats:
            for b in f["buckets"]:
                assert b["hop"] in (0, 1, 2)
                assert b["count"] > 0


class TestSnapshots:
    def test_snapshots_recorded_at_the_configured_cadence(self, small_graph):
        est = HopGATClassifier(**fast_params(max_epochs=10, snapshot_every=4))
        est.fit(small_graph)
        assert [s["epoch"] for s in est.snapshots_] == [0, 4, 8]

    def test_snapshots_off_by_default(self, small_graph):
        est = HopGATClassifier(**fast_params(max_epochs=3)).fit(small_graph)
        assert est.snapshots_ == []


class TestCheckpointRoundTrip:
    def test_checkpoint_restores_identical_predictions(self, small_graph, tmp_path):
        est = HopGATClassifier(**fast_params()).fit(small_graph)
        path = tmp_path / "model.json"
        est.save_checkpoint(path)
        back = HopGATClassifier.from_checkpoint(path)
        np.testing.assert_array_equal(
            est.decision_function(small_graph), back.decision_function(small_graph)
        )
        assert back.get_params() == est.get_params()
        assert back.score(small_graph, split="test") == est.score(small_graph, split="test")

    def test_checkpoint_without_fit_raises(self, tmp_path):
        with pytest.raises(NotFittedError):
            HopGATClassifier().save_checkpoint(tmp_path / "nope.json")


class TestInductiveMultiLabel:
    def test_end_to_end_micro_f1(self):
        graphs = multi_graphs()
        est = HopGATClassifier(
            **fast_params(max_epochs=20, batch_size=2, attention_kind="product")
        ).fit(graphs)
        assert est.mode_ == "inductive"
        assert est.label_mode_ == "multi"
        assert est.n_classes_ == 3
        score = est.score(graphs, split="test")
        assert 0.0 <= score <= 1.0

    def test_predictions_are_binary_indicator_matrices(self):
        graphs = multi_graphs()
        est = HopGATClassifier(**fast_params(max_epochs=5)).fit(graphs)
        preds = est.predict(graphs)
        assert len(preds) == 3
        for p, g in zip(preds, graphs):
            assert p.shape == (g.num_nodes, 3)
            assert set(np.unique(p)) <= {0, 1}

    def test_multi_label_determinism(self):
        graphs = multi_graphs()
        a = HopGATClassifier(**fast_params(max_epochs=6, batch_size=2)).fit(graphs)
        b = HopGATClassifier(**fast_params(max_epochs=6, batch_size=2)).fit(graphs)
        assert [r.classification_loss for r in a.history_] == [
            r.classification_loss for r in b.history_
        ]

    def test_batch_size_changes_step_order_not_validity(self):
        graphs = multi_graphs()
        a = HopGATClassifier(**fast_params(max_epochs=6, batch_size=1)).fit(graphs)
        b = HopGATClassifier(**fast_params(max_epochs=6, batch_size=2)).fit(graphs)
        assert np.isfinite(a.history_[-1].classification_loss)
        assert np.isfinite(b.history_[-1].classification_loss)
        assert [r.classification_loss for r in a.history_] != [
            r.classification_loss for r in b.history_
        ]


class TestVerbose:
    def test_silent_by_default(self, small_graph, capsys):
        HopGATClassifier(**fast_params(max_epochs=2)).fit(small_graph)
        assert capsys.readouterr().out == ""

    def test_verbose_prints_progress(self, small_graph, capsys):
        HopGATClassifier(**fast_params(max_epochs=2, verbose=1)).fit(small_graph)
        out = capsys.readouterr().out
        assert "epoch 0" in out

"""Scikit-learn style estimator wrapping the full training procedure."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from hopgat import validation
from hopgat.annealing import (
    ScheduleConfig,
    compute_gamma,
    initial_state,
    step_temperature,
    total_loss,
)
from hopgat.autodiff import Adam, GradientTape, Tensor
from hopgat.graphs import Graph, HopMatrix, compute_hop_matrix, subsample_labels
from hopgat.layers import (
    LayerConfig,
    config_from_dict,
    load_checkpoint,
    model_forward,
    init_model_params,
    save_checkpoint,
)
from hopgat.supervision import attention_loss, sample_pairs
from hopgat.training import (
    EarlyStopping,
    TraceRow,
    accuracy,
    attention_bucket_stats,
    classification_loss,
    micro_f1,
)


class HopGATClassifier(BaseEstimator):
    """Hop-aware supervised graph attention classifier.

    ``fit`` takes a ``Graph`` (transductive single-label) or a list of
    ``Graph`` objects (inductive multi-label); labels and split masks live
    on the graphs, so the sklearn ``y`` argument is unused. Defaults
    reproduce the published citation-network configuration; see
    ``hopgat.presets`` for the other published setups.

    Parameters mirror the published training procedure: three dropout sites
    (inputs, attention coefficients, aggregated values), L2 penalty added to
    the loss, Adam, dual-signal early stopping on validation loss and
    metric, and an annealed mixing weight between the classification loss
    and the attention-supervision loss. ``gamma_fixed`` pins that weight to
    a constant (0 disables the supervision gradient exactly);
    ``supervised=False`` skips attention supervision entirely.
    ``snapshot_every`` > 0 records periodic raw-logit histograms for later
    export.
    """

    def __init__(
        self,
        attention_kind: str = "addition",
        hidden_dims: tuple[int, ...] = (8,),
        heads: tuple[int, ...] = (8, 1),
        max_hv: int = 2,
        dp1: float = 0.2,
        dp2: float = 0.0,
        dp3: float = 0.2,
        l2: float = 1e-4,
        learning_rate: float = 0.005,
        max_epochs: int = 1000,
        patience: int = 100,
        supervised: bool = True,
        sample_ratio: float = 0.0003,
        label_rate: float = 1.0,
        temp_ini: float = 100.0,
        temp_fin: float = 1.0,
        temp_decay: float = 0.95,
        gamma_str: float = 0.25,
        gamma_fixed: float | None = None,
        leaky_slope: float = 0.2,
        batch_size: int = 1,
        mode: str = "auto",
        seed: int = 0,
        snapshot_every: int = 0,
        verbose: int = 0,
    ):
        self.attention_kind = attention_kind
        self.hidden_dims = hidden_dims
        self.heads = heads
        self.max_hv = max_hv
        self.dp1 = dp1
        self.dp2 = dp2
        self.dp3 = dp3
        self.l2 = l2
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.patience = patience
        self.supervised = supervised
        self.sample_ratio = sample_ratio
        self.label_rate = label_rate
        self.temp_ini = temp_ini
        self.temp_fin = temp_fin
        self.temp_decay = temp_decay
        self.gamma_str = gamma_str
        self.gamma_fixed = gamma_fixed
        self.leaky_slope = leaky_slope
        self.batch_size = batch_size
        self.mode = mode
        self.seed = seed
        self.snapshot_every = snapshot_every
        self.verbose = verbose

    # ------------------------------------------------------------------ fit

    def _build_configs(self, n_features: int, n_classes: int) -> list[LayerConfig]:
        hidden = tuple(int(h) for h in self.hidden_dims)
        heads = tuple(int(k) for k in self.heads)
        if len(heads) != len(hidden) + 1:
            raise ValueError(
                f"heads must have one entry per layer: got {len(heads)} heads "
                f"for {len(hidden) + 1} layers"
            )
        dims = (n_features,) + hidden + (n_classes,)
        configs = []
        for i in range(len(heads)):
            final = i == len(heads) - 1
            in_dim = dims[i] if i == 0 else dims[i] * heads[i - 1]
            configs.append(
                LayerConfig(
                    in_dim=in_dim,
                    out_dim=dims[i + 1],
                    heads=heads[i],
                    attention_kind=self.attention_kind,
                    final_layer=final,
                    dp1=self.dp1,
                    dp2=self.dp2,
                    dp3=self.dp3,
                    leaky_slope=self.leaky_slope,
                )
            )
        return configs

    def _check_params(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.gamma_fixed is not None and not 0.0 <= self.gamma_fixed <= 1.0:
            raise ValueError(f"gamma_fixed must be in [0, 1], got {self.gamma_fixed}")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0 (0 disables snapshots)")

    def fit(self, X, y=None):
        self._check_params()
        graphs = validation.as_graph_list(X)
        mode = validation.resolve_mode(graphs, self.mode)
        n_features = validation.infer_num_features(graphs)
        n_classes = validation.infer_num_classes(graphs)
        label_mode = graphs[0].label_mode
        configs = self._build_configs(n_features, n_classes)

        seq = np.random.SeedSequence(self.seed)
        s_init, s_drop, s_sample, s_label, s_batch = seq.spawn(5)
        init_rng = np.random.default_rng(s_init)
        dropout_rng = np.random.default_rng(s_drop)
        sampling_rng = np.random.default_rng(s_sample)
        batch_rng = np.random.default_rng(s_batch)

        if self.label_rate < 1.0:
            graphs = subsample_labels(graphs, self.label_rate, int(s_label.generate_state(1)[0]))

        hops = [compute_hop_matrix(g, self.max_hv) for g in graphs]
        params = init_model_params(configs, self.max_hv, init_rng)
        tensors = params.parameters()
        opt = Adam(tensors, learning_rate=self.learning_rate)
        sched_cfg = ScheduleConfig(
            temp_ini=self.temp_ini,
            temp_fin=self.temp_fin,
            decay=self.temp_decay,
            gamma_str=self.gamma_str,
        )
        state = initial_state(sched_cfg)
        stopper = EarlyStopping(self.patience)

        train_ids = [i for i, g in enumerate(graphs) if g.label_visible.any()]
        if not train_ids:
            raise ValueError("no graph has visible training labels")
        val_ids = [i for i, g in enumerate(graphs) if g.val_mask.any()]
        if not val_ids:
            raise ValueError("no validation nodes: early stopping needs a val split")

        history: list[TraceRow] = []
        snapshots: list[dict] = []
        best_data = [t.data.copy() for t in tensors]
        best_epoch = -1
        best_val_loss = np.inf
        best_val_metric = -np.inf
        stopped_early = False

        for epoch in range(self.max_epochs):
            if epoch > 0:
                state = step_temperature(state, sched_cfg)
            order = (
                batch_rng.permutation(train_ids)
                if len(train_ids) > 1
                else np.asarray(train_ids)
            )
            batch_cls, batch_att, batch_gamma = [], [], []
            for start in range(0, len(order), self.batch_size):
                batch = order[start : start + self.batch_size]
                with GradientTape() as tape:
                    l_cls = None
                    l_att = None
                    for gi in batch:
                        g = graphs[gi]
                        scores, fields = model_forward(
                            g.features, hops[gi], configs, params, True, dropout_rng
                        )
                        term = classification_loss(scores, g.labels, g.label_visible, label_mode)
                        l_cls = term if l_cls is None else l_cls + term
                        if self.supervised:
                            sample = sample_pairs(hops[gi], self.sample_ratio, sampling_rng)
                            att = attention_loss([f.logits for f in fields], hops[gi], sample)
                            l_att = att if l_att is None else l_att + att
                    if self.supervised:
                        gamma = (
                            self.gamma_fixed
                            if self.gamma_fixed is not None
                            else compute_gamma(l_att.item(), state, sched_cfg)
                        )
                        loss = total_loss(l_cls, l_att, gamma)
                    else:
                        gamma = 0.0
                        loss = l_cls
                    if self.l2 > 0:
                        reg = None
                        for t in params.weights():
                            sq = (t * t).sum()
                            reg = sq if reg is None else reg + sq
                        loss = loss + self.l2 * reg
                    tape.backward(loss)
                opt.step()
                batch_cls.append(l_cls.item())
                batch_gamma.append(gamma)
                if l_att is not None:
                    batch_att.append(l_att.item())

            val_losses = []
            val_scores: list[np.ndarray] = []
            first_fields = None
            for gi in val_ids:
                g = graphs[gi]
                scores, fields = model_forward(g.features, hops[gi], configs, params, False, None)
                val_losses.append(
                    classification_loss(scores, g.labels, g.val_mask, label_mode).item()
                )
                val_scores.append(scores.data)
                if first_fields is None:
                    first_fields = fields
            val_loss = float(np.mean(val_losses))
            if not np.isfinite(val_loss):
                raise FloatingPointError(
                    f"validation loss became non-finite at epoch {epoch}"
                )
            if label_mode == "single":
                val_metric = accuracy(val_scores[0], graphs[val_ids[0]].labels, graphs[val_ids[0]].val_mask)
            else:
                val_metric = _pooled_micro_f1(
                    val_scores, [graphs[gi] for gi in val_ids], "val"
                )

            history.append(
                TraceRow(
                    epoch=epoch,
                    temperature=state.temperature,
                    gamma=float(np.mean(batch_gamma)),
                    classification_loss=float(np.mean(batch_cls)),
                    attention_loss=float(np.mean(batch_att)) if batch_att else None,
                )
            )
            if self.snapshot_every > 0 and epoch % self.snapshot_every == 0:
                snapshots.append(
                    {
                        "epoch": epoch,
                        "fields": attention_bucket_stats(first_fields, hops[val_ids[0]]),
                    }
                )
            if self.verbose and epoch % 50 == 0:
                print(
                    f"epoch {epoch}: val_loss={val_loss:.4f} val_metric={val_metric:.4f} "
                    f"gamma={history[-1].gamma:.4f}"
                )

            stop, is_best = stopper.update(val_loss, val_metric)
            if is_best:
                best_data = [t.data.copy() for t in tensors]
                best_epoch = epoch
                best_val_loss = val_loss
                best_val_metric = val_metric
            if stop:
                stopped_early = True
                break

        for t, d in zip(tensors, best_data):
            t.data[:] = d

        self.params_ = params
        self.configs_ = configs
        self.mode_ = mode
        self.label_mode_ = label_mode
        self.n_features_in_ = n_features
        self.n_classes_ = n_classes
        self.history_ = history
        self.snapshots_ = snapshots
        self.best_epoch_ = best_epoch
        self.best_val_loss_ = best_val_loss
        self.best_val_metric_ = best_val_metric
        self.n_epochs_ = len(history)
        self.stopped_early_ = stopped_early
        return self

    # ------------------------------------------------------------ inference

    def _check_fitted(self) -> None:
        if not hasattr(self, "params_"):
            raise NotFittedError(
                "this HopGATClassifier instance is not fitted yet; call fit first"
            )

    def _forward_scores(self, graph: Graph) -> np.ndarray:
        hops = compute_hop_matrix(graph, self.max_hv)
        scores, _ = model_forward(
            graph.features, hops, self.configs_, self.params_, False, None
        )
        return scores.data

    def decision_function(self, X) -> np.ndarray | list[np.ndarray]:
        """Raw class scores per node: one array, or a list for multiple graphs."""
        self._check_fitted()
        graphs = validation.as_graph_list(X)
        outs = [self._forward_scores(g) for g in graphs]
        return outs[0] if isinstance(X, Graph) else outs

    def predict_proba(self, X) -> np.ndarray | list[np.ndarray]:
        """Softmax (single-label) or sigmoid (multi-label) probabilities."""
        self._check_fitted()
        graphs = validation.as_graph_list(X)
        outs = []
        for g in graphs:
            z = self._forward_scores(g)
            if self.label_mode_ == "single":
                z = z - z.max(axis=1, keepdims=True)
                e = np.exp(z)
                outs.append(e / e.sum(axis=1, keepdims=True))
            else:
                outs.append(np.where(z >= 0, 1 / (1 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1 + np.exp(-np.abs(z)))))
        return outs[0] if isinstance(X, Graph) else outs

    def predict(self, X) -> np.ndarray | list[np.ndarray]:
        """Class ids (single-label) or 0/1 indicator matrices (multi-label)."""
        self._check_fitted()
        graphs = validation.as_graph_list(X)
        outs = []
        for g in graphs:
            z = self._forward_scores(g)
            if self.label_mode_ == "single":
                outs.append(z.argmax(axis=1))
            else:
                outs.append((z >= 0.0).astype(np.int64))  # sigmoid(z) >= 0.5
        return outs[0] if isinstance(X, Graph) else outs

    def score(self, X, y=None, split: str = "test") -> float:
        """Accuracy (transductive) or micro-F1 (inductive) on a split."""
        self._check_fitted()
        validation.check_split(split)
        graphs = validation.as_graph_list(X)
        scored = [g for g in graphs if validation.split_mask(g, split).any()]
        if not scored:
            raise ValueError(f"no nodes in split {split!r}")
        scores = [self._forward_scores(g) for g in scored]
        if self.label_mode_ == "single":
            if len(scored) != 1:
                raise ValueError("single-label scoring expects one graph")
            return accuracy(scores[0], scored[0].labels, validation.split_mask(scored[0], split))
        return _pooled_micro_f1(scores, scored, split)

    def attention_stats(self, X) -> list[list[dict]]:
        """Final-model raw-logit bucket stats per graph (evaluation mode)."""
        self._check_fitted()
        graphs = validation.as_graph_list(X)
        out = []
        for g in graphs:
            hops = compute_hop_matrix(g, self.max_hv)
            _, fields = model_forward(
                g.features, hops, self.configs_, self.params_, False, None
            )
            out.append(attention_bucket_stats(fields, hops))
        return out

    # ----------------------------------------------------------- persistence

    def save_checkpoint(self, path) -> None:
        """Write parameters plus enough metadata to reload and predict."""
        self._check_fitted()
        save_checkpoint(
            path,
            self.params_,
            self.configs_,
            self.max_hv,
            extra_meta={
                "estimator_params": _jsonable_params(self.get_params()),
                "mode": self.mode_,
                "label_mode": self.label_mode_,
                "n_classes": self.n_classes_,
                "n_features": self.n_features_in_,
                "best_epoch": self.best_epoch_,
                "best_val_metric": self.best_val_metric_,
            },
        )

    @classmethod
    def from_checkpoint(cls, path) -> "HopGATClassifier":
        params, configs, max_hv, meta = load_checkpoint(path)
        init = dict(meta["estimator_params"])
        for key in ("hidden_dims", "heads"):
            init[key] = tuple(init[key])
        est = cls(**init)
        est.params_ = params
        est.configs_ = configs
        est.mode_ = meta["mode"]
        est.label_mode_ = meta["label_mode"]
        est.n_classes_ = int(meta["n_classes"])
        est.n_features_in_ = int(meta["n_features"])
        est.best_epoch_ = meta.get("best_epoch", -1)
        est.best_val_metric_ = meta.get("best_val_metric", float("nan"))
        est.history_ = []
        est.snapshots_ = []
        return est


def _pooled_micro_f1(scores: list[np.ndarray], graphs: list[Graph], split: str) -> float:
    """Micro-F1 with TP/FP/FN pooled across graphs (not averaged per graph)."""
    pooled_scores = []
    pooled_labels = []
    for z, g in zip(scores, graphs):
        mask = validation.split_mask(g, split)
        pooled_scores.append(z[mask])
        pooled_labels.append(np.asarray(g.labels)[mask])
    z = np.concatenate(pooled_scores, axis=0)
    y = np.concatenate(pooled_labels, axis=0)
    return micro_f1(z, y, np.ones(len(z), dtype=bool))


def _jsonable_params(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, tuple):
            out[k] = list(v)
        elif isinstance(v, (np.integer,)):
            out[k] = int(v)
        elif isinstance(v, (np.floating,)):
            out[k] = float(v)
        else:
            out[k] = v
    return out

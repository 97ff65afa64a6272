"""Shared test helpers: finite-difference oracles and tiny graph builders."""

from __future__ import annotations

import numpy as np

from hopgat.autodiff import Tensor


GRAD_STEP = 1e-6
GRAD_TOL = 1e-5


def numeric_grad(f, x: np.ndarray, step: float = GRAD_STEP) -> np.ndarray:
    """Central-difference gradient of scalar-valued ``f`` w.r.t. ``x``.

    ``x`` is perturbed in place one entry at a time and restored, so ``f``
    must re-read it on every call. This is the independent oracle the
    analytic gradients are judged against.
    """
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        fplus = f()
        flat[i] = orig - step
        fminus = f()
        flat[i] = orig
        gflat[i] = (fplus - fminus) / (2.0 * step)
    return g


def assert_grad_close(analytic: np.ndarray, numeric: np.ndarray, tol: float = GRAD_TOL) -> None:
    """Elementwise |a - n| <= tol * max(1, |a|, |n|)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    scale = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    err = np.abs(analytic - numeric)
    worst = float((err / scale).max()) if err.size else 0.0
    assert np.all(err <= tol * scale), f"gradient mismatch, worst rel err {worst:.3e}"


def check_gradients(build_loss, params: list[Tensor], tol: float = GRAD_TOL) -> None:
    """Compare tape gradients of ``build_loss()`` against central differences.

    ``build_loss`` must construct the loss from the current ``params`` data
    under a fresh tape each call (finite differences mutate the data in
    place between calls).
    """
    from hopgat.autodiff import GradientTape

    with GradientTape() as tape:
        loss = build_loss()
        tape.backward(loss)
    analytic = [None if p.grad is None else p.grad.copy() for p in params]
    for p in params:
        p.grad = None

    def forward() -> float:
        return build_loss().item()

    for p, a in zip(params, analytic):
        n = numeric_grad(forward, p.data)
        assert a is not None, "parameter never received a gradient"
        assert_grad_close(a, n, tol=tol)


def simple_graph(num_nodes: int, edges, labels=None, mode: str = "single"):
    """Small hand-specified graph with default masks, shared across test files."""
    from hopgat.graphs import Graph

    n = num_nodes
    labels = np.zeros(n, dtype=np.int64) if labels is None else np.asarray(labels)
    train = np.zeros(n, dtype=bool)
    train[: max(1, n // 2)] = True
    val = np.zeros(n, dtype=bool)
    test = np.zeros(n, dtype=bool)
    if n > 2:
        val[-2] = True
        test[-1] = True
    return Graph(
        num_nodes=n,
        edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        features=np.random.default_rng(0).standard_normal((n, 3)),
        labels=labels,
        label_mode=mode,
        train_mask=train,
        val_mask=val,
        test_mask=test,
    )

"""Published per-dataset hyperparameter presets plus the synthetic fixture.

Each preset is a dict of ``HopGATClassifier`` keyword arguments. The final
layer width always comes from the data (number of classes), so presets list
hidden widths only.
"""

from __future__ import annotations

_COMMON = dict(
    max_hv=2,
    temp_ini=100.0,
    temp_fin=1.0,
    gamma_str=0.25,
    patience=100,
    supervised=True,
)

PRESETS: dict[str, dict] = {
    "cora": dict(
        _COMMON,
        attention_kind="addition",
        hidden_dims=(8,),
        heads=(8, 1),
        dp1=0.2,
        dp2=0.0,
        dp3=0.2,
        l2=1e-4,
        learning_rate=0.005,
        temp_decay=0.95,
        sample_ratio=0.0003,
        batch_size=1,
        mode="transductive",
    ),
    "citeseer": dict(
        _COMMON,
        attention_kind="addition",
        hidden_dims=(8,),
        heads=(8, 1),
        dp1=0.6,
        dp2=0.2,
        dp3=0.6,
        l2=0.0,
        learning_rate=0.005,
        temp_decay=0.85,
        sample_ratio=0.0005,
        batch_size=1,
        mode="transductive",
    ),
    "pubmed": dict(
        _COMMON,
        attention_kind="addition",
        hidden_dims=(8,),
        heads=(8, 8),
        dp1=0.0,
        dp2=0.0,
        dp3=0.0,
        l2=0.0,
        learning_rate=0.01,
        temp_decay=0.85,
        sample_ratio=0.0001,
        batch_size=1,
        mode="transductive",
    ),
    "ppi": dict(
        _COMMON,
        attention_kind="product",
        hidden_dims=(256, 256),
        heads=(4, 4, 6),
        dp1=0.0,
        dp2=0.0,
        dp3=0.0,
        l2=0.0,
        learning_rate=0.005,
        temp_decay=0.85,
        sample_ratio=0.0005,
        batch_size=2,
        mode="inductive",
    ),
    # synthetic two-community benchmark used by the test suite
    "sbm": dict(
        _COMMON,
        attention_kind="addition",
        hidden_dims=(8,),
        heads=(4, 1),
        dp1=0.0,
        dp2=0.0,
        dp3=0.0,
        l2=1e-4,
        learning_rate=0.01,
        temp_fin=5.0,
        temp_decay=0.9,
        sample_ratio=0.1,
        batch_size=1,
        mode="transductive",
        patience=50,
        max_epochs=400,
    ),
}


def get_preset(name: str) -> dict:
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None

"""Shared fixtures: seeded generators, random joints and small nanoformer configs."""

import numpy as np
import pytest
from hypothesis import strategies as st

from src.core_engine import Categorical
from src.model_engine import TransformerConfig, init_params
from src.oracle_engine import ExactConditionalModel, JointTable


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def joint(rng):
    """A generic D=3, |S|=2 joint."""
    return JointTable.random(3, 2, rng)


@pytest.fixture
def table_model(joint):
    return ExactConditionalModel(joint)


def small_transformer(layers: int = 1, seq_len: int = 8, alphabet_size: int = 4, **overrides) -> TransformerConfig:
    values = {
        "layers": layers,
        "d_model": 16,
        "d_k": 8,
        "d_ff": 32,
        "heads": 2,
        "alphabet_size": alphabet_size,
        "seq_len": seq_len,
        **overrides,
    }
    return TransformerConfig(**values)


@pytest.fixture
def small_params():
    return init_params(7, small_transformer(layers=2))


def categoricals(min_size: int = 1, max_size: int = 8):
    """Hypothesis strategy for strictly positive probability vectors."""
    return st.lists(
        st.floats(min_value=0.01, max_value=1.0, allow_nan=False, allow_infinity=False),
        min_size=min_size,
        max_size=max_size,
    ).map(lambda w: Categorical(np.asarray(w) / np.sum(w)))

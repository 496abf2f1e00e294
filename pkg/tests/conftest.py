import os

# Settings are read at import time; pin them before paradigmlab is imported.
os.environ.setdefault("PARADIGM_LAB_THREADS", "1")
os.environ.setdefault("LOG_LEVEL", "WARNING")
os.environ.setdefault("LOG_FORMAT", "text")

import pytest

from paradigmlab.params import ModelParams, tcp


@pytest.fixture
def tcp_params() -> ModelParams:
    return tcp(p=0.01)


@pytest.fixture
def sqrt_params() -> ModelParams:
    """alpha=0, beta=1/2, c1=c2=1: gamma=2, nu=2, tau=1/2, c0=1, mu=1/2, sigma=1."""
    return ModelParams(c1=1.0, c2=1.0, alpha=0.0, beta=0.5, ell=0.01, p=0.01)


@pytest.fixture
def small_limit_config() -> dict:
    return {
        "scenario": "limit_beta1",
        "params": {"c1": 1.0, "c2": 0.5, "alpha": -1.0, "beta": 1.0, "ell": 0.0, "p": [0.05, 0.02]},
        "horizon": 2.0,
        "replicates": 40,
        "seed": 7,
    }

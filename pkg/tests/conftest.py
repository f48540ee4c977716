import numpy as np
import pytest

import topopriv as tp


@pytest.fixture(scope="session")
def seven_node_w():
    """The 7-node Laplacian-rule topology used by the experiment protocol."""
    adj = tp.random_digraph(7, 0.4, seed=42)
    return tp.laplacian_weights(adj, 0.5)


@pytest.fixture(scope="session")
def small_w3():
    adj = tp.random_digraph(3, 0.7, seed=9)
    return tp.laplacian_weights(adj, 0.5)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)

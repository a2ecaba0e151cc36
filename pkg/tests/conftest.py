import numpy as np
import pytest

import hierwalk as hw


@pytest.fixture(scope="session")
def p2():
    return hw.path_graph(2)


@pytest.fixture(scope="session")
def c3():
    return hw.cycle_graph(3)


@pytest.fixture(scope="session")
def model_d0():
    """Single self-loop global vertex driving one path-graph walker."""
    return hw.hierarchical_model(hw.loop_vertex(), [hw.path_graph(2)])


@pytest.fixture(scope="session")
def model_p2p2():
    """Loopy complete global graph on 2 vertices, q=(1/2,1/2), two P2 walkers."""
    return hw.hierarchical_model(hw.kbar_graph([0.5, 0.5]),
                                 [hw.path_graph(2), hw.path_graph(2)])


@pytest.fixture(scope="session")
def model_p2c3():
    """Same global graph driving a P2 walker and a C3 walker."""
    return hw.hierarchical_model(hw.kbar_graph([0.5, 0.5]),
                                 [hw.path_graph(2), hw.cycle_graph(3)])


@pytest.fixture(scope="session")
def reference_models(model_d0, model_p2p2, model_p2c3):
    return {"d0": model_d0, "p2p2": model_p2p2, "p2c3": model_p2c3}


def global_hamiltonian(model):
    """I - L_H; equals the rank-1 sqrt(q) outer product on loopy-complete graphs."""
    return np.eye(model.branching) - model.global_walk.laplacian

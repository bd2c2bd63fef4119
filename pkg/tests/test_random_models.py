import numpy as np
import pytest

from edgesem.errors import GenerationFailed
from edgesem.random_models import random_admg, random_model, random_parameters


def test_same_seed_same_model():
    g1, p1 = random_model(3, 6, p_directed=0.5, p_bidirected=0.3)
    g2, p2 = random_model(3, 6, p_directed=0.5, p_bidirected=0.3)
    assert g1 == g2 and p1.lam == p2.lam and p1.omega == p2.omega


def test_density_extremes():
    rng = np.random.default_rng(0)
    g = random_admg(rng, 5, 0.0, 0.0)
    assert not g.directed and not g.bidirected
    g = random_admg(rng, 5, 1.0, 1.0)
    assert len(g.directed) == 10 and len(g.bidirected) == 10


def test_edge_caps():
    rng = np.random.default_rng(1)
    for _ in range(50):
        g = random_admg(rng, 8, 0.8, 0.8, max_directed=12, max_bidirected=6)
        assert len(g.directed) <= 12 and len(g.bidirected) <= 6


def test_parameter_ranges_and_pd():
    rng = np.random.default_rng(2)
    for _ in range(50):
        g = random_admg(rng, 6, 0.5, 0.5)
        p = random_parameters(rng, g)
        assert all(abs(x) <= 0.4 for x in p.lam.values())
        assert np.all(np.linalg.eigvalsh(p.omega_matrix()) > 0)
        assert all(1.0 <= p.omega[v] <= 2.0 for v in g.vertices)


def test_generation_gives_up():
    g = random_admg(np.random.default_rng(3), 6, 0.0, 1.0)
    with pytest.raises(GenerationFailed):
        random_parameters(np.random.default_rng(4), g, omega_range=50.0, max_retries=3)

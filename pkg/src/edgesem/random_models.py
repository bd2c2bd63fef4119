"""Seeded random ADMGs and SEM parameters for tests and fixtures."""

from __future__ import annotations

import numpy as np

from .errors import GenerationFailed, NotPositiveDefinite
from .graph import Admg, canonical_pair
from .sem import SemParameters

LAMBDA_RANGE = 0.4
OMEGA_RANGE = 0.4
VARIANCE_RANGE = (1.0, 2.0)
MAX_RETRIES = 100


def random_admg(
    rng: np.random.Generator,
    n: int,
    p_directed: float = 0.3,
    p_bidirected: float = 0.2,
    max_directed: int | None = None,
    max_bidirected: int | None = None,
) -> Admg:
    """Random ADMG on labels ``"1".."n"``.

    A random causal order is drawn first, so label order and topological
    order generally differ. Edge caps are enforced by keeping a random subset.
    """
    labels = [str(i + 1) for i in range(n)]
    order = [labels[i] for i in rng.permutation(n)]
    pairs = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
    directed = [e for e in pairs if rng.random() < p_directed]
    bidirected = [canonical_pair(*e) for e in pairs if rng.random() < p_bidirected]
    if max_directed is not None and len(directed) > max_directed:
        keep = sorted(rng.choice(len(directed), max_directed, replace=False))
        directed = [directed[k] for k in keep]
    if max_bidirected is not None and len(bidirected) > max_bidirected:
        keep = sorted(rng.choice(len(bidirected), max_bidirected, replace=False))
        bidirected = [bidirected[k] for k in keep]
    return Admg(labels, directed, bidirected)


def random_parameters(
    rng: np.random.Generator,
    g: Admg,
    lam_range: float = LAMBDA_RANGE,
    omega_range: float = OMEGA_RANGE,
    var_range: tuple[float, float] = VARIANCE_RANGE,
    max_retries: int = MAX_RETRIES,
) -> SemParameters:
    """Draw ``λ, ω_ij ~ U[-r, r]`` and ``ω_ii ~ U[var_range]``; redraw until ``Ω`` is PD.

    Raises:
        GenerationFailed: after ``max_retries`` non-PD draws of ``Ω``.
    """
    lam = {e: float(rng.uniform(-lam_range, lam_range)) for e in g.sorted_directed()}
    for _ in range(max_retries):
        omega = {v: float(rng.uniform(*var_range)) for v in g.vertices}
        for e in g.sorted_bidirected():
            omega[e] = float(rng.uniform(-omega_range, omega_range))
        try:
            return SemParameters(g, lam, omega)
        except NotPositiveDefinite:
            continue
    raise GenerationFailed(f"no positive definite Omega after {max_retries} draws")


def random_model(seed: int, n: int, **kwargs) -> tuple[Admg, SemParameters]:
    """Graph and parameters from one seed; keyword arguments go to :func:`random_admg`."""
    rng = np.random.default_rng(seed)
    g = random_admg(rng, n, **kwargs)
    return g, random_parameters(rng, g)


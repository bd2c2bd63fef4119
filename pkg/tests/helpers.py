"""Shared oracles and instance generators for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from edgesem.graph import Admg, canonical_pair
from edgesem.identify import check_add_directed, check_remove_bidirected, check_remove_directed
from edgesem.random_models import random_admg, random_parameters
from edgesem.sem import CovMatrix, SemParameters, covariance_from_params


def rel_err(x, y) -> float:
    """Max absolute difference scaled by the largest entry of ``y`` (at least 1)."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    y = np.asarray(getattr(y, "values", y), dtype=float)
    return float(np.max(np.abs(x - y)) / max(1.0, float(np.max(np.abs(y)))))


def cov_by_matrix_inverse(p: SemParameters) -> np.ndarray:
    """``(I - Λ)^{-T} Ω (I - Λ)^{-1}`` via a dense inverse, in graph vertex order."""
    lam = p.lambda_matrix()
    inv = np.linalg.inv(np.eye(len(lam)) - lam)
    return inv.T @ p.omega_matrix() @ inv


def subsets(xs):
    for r in range(len(xs) + 1):
        yield from itertools.combinations(xs, r)


def random_instances(seed: int, kind: str, count: int, n_range=(3, 7), method="regression",
                     reversible: bool = False):
    """Yield ``(g, p, edge)`` where the check for ``kind`` passes.

    ``kind`` is "remove", "add" or "remove-bidirected". With ``reversible``,
    an added edge must also pass the removal check in the enlarged graph.
    """
    rng = np.random.default_rng(seed)
    found = 0
    while found < count:
        n = int(rng.integers(*n_range))
        g = random_admg(rng, n, p_directed=0.4, p_bidirected=0.25)
        if kind == "remove":
            cands = g.sorted_directed()
        elif kind == "add":
            order = g.topological_order()
            cands = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)
                     if not g.has_directed(order[i], order[j])]
        else:
            cands = g.sorted_bidirected()
        if not cands:
            continue
        edge = cands[int(rng.integers(len(cands)))]
        check = {"remove": check_remove_directed, "add": check_add_directed,
                 "remove-bidirected": check_remove_bidirected}[kind]
        if not check(g, *edge, method=method).ok:
            continue
        if reversible and kind == "add" and not check_remove_directed(g.with_directed(*edge), *edge).ok:
            continue
        p = random_parameters(rng, g)
        found += 1
        yield g, p, edge


def forward_after(p: SemParameters, kind: str, edge, lam: float | None = None) -> CovMatrix:
    """Covariance of the modified model computed from parameters, never from ``Σ``."""
    if kind == "remove":
        q = p.without_directed(*edge)
    elif kind == "add":
        q = p.with_directed(*edge, lam)
    else:
        q = p.without_bidirected(*edge)
    return covariance_from_params(q)


def all_admgs(n: int, max_edges: int | None = None):
    """Every ADMG on labels ``1..n`` whose directed part respects label order.

    Each directed acyclic graph is a relabelling of one of these, which is
    enough for label-invariant properties.
    """
    labels = [str(i + 1) for i in range(n)]
    pairs = list(itertools.combinations(labels, 2))
    for dmask in range(1 << len(pairs)):
        directed = [pairs[k] for k in range(len(pairs)) if dmask >> k & 1]
        if max_edges is not None and len(directed) > max_edges:
            continue
        for bmask in range(1 << len(pairs)):
            bidirected = [pairs[k] for k in range(len(pairs)) if bmask >> k & 1]
            if max_edges is not None and len(bidirected) > max_edges:
                continue
            yield Admg(labels, directed, bidirected)


def omega_of(p: SemParameters, u: str, v: str) -> float:
    return p.omega[canonical_pair(u, v)]


def matching_adjustment(g: Admg, draws, target: str, a: str, b: str, tol: float = 1e-4):
    """First ``S ⊆ V \\ {a, b}`` whose single regression equals the parameter on every draw.

    ``target`` is "lambda" (``β_ab·S`` vs ``λ_ab``), "path" (``β_ab·S`` vs
    ``σ(D_ab)``) or "omega" (``σ_ab·S`` vs ``ω_ab``). ``draws`` holds
    ``(params, cov)`` pairs. Returns None when no set matches.
    """
    from edgesem.sem import conditional_cov, path_sum, regression_coef

    others = [v for v in g.vertices if v not in (a, b)]
    for z in subsets(others):
        for p, s in draws:
            if target == "lambda":
                est, true = regression_coef(s, a, b, z), p.lam[(a, b)]
            elif target == "path":
                est, true = regression_coef(s, a, b, z), path_sum(p, a, b).value
            else:
                est, true = conditional_cov(s, a, b, z), omega_of(p, a, b)
            if abs(est - true) > tol:
                break
        else:
            return z
    return None


def draws_for(g: Admg, rng, k: int):
    out = []
    for _ in range(k):
        p = random_parameters(rng, g)
        out.append((p, covariance_from_params(p)))
    return out


def sampling_sd(s: CovMatrix, n: int) -> np.ndarray:
    """Standard deviation of each Gaussian sample-covariance entry: ``sqrt((σ_ii σ_jj + σ_ij²) / n)``."""
    d = np.diag(s.values)
    return np.sqrt((np.outer(d, d) + s.values**2) / n)

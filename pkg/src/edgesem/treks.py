"""Trek enumeration and trek-rule covariance.

The matrix formula in :mod:`edgesem.sem` is the production path; this
module is an independent oracle that sums one monomial per trek. The inner
pair loop runs in a compiled kernel when available.

Set ``EDGESEM_PURE_PYTHON=1`` to force the pure-Python kernel.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import TrekExplosion, UnknownVertex
from .graph import Admg, canonical_pair, label_key
from .sem import CovMatrix, SemParameters

DEFAULT_CAP = 10**6

if os.environ.get("EDGESEM_PURE_PYTHON") == "1":
    from ._treks_py import accumulate_pairs
    BACKEND = "python"
else:
    try:
        from ._treks_ext import accumulate_pairs
        BACKEND = "cython"
    except ImportError:
        from ._treks_py import accumulate_pairs
        BACKEND = "python"


@dataclass(frozen=True)
class Trek:
    """A collider-free walk between two vertices.

    ``left`` runs from the source to the left endpoint and ``right`` from the
    source to the right endpoint. ``source`` is a vertex, or an ordered pair
    ``(i, j)`` for a bidirected source edge, in which case ``left`` starts at
    ``i`` and ``right`` starts at ``j``.
    """

    left: tuple
    right: tuple
    source: object

    @property
    def is_bidirected(self) -> bool:
        return isinstance(self.source, tuple)

    def monomial(self, p: SemParameters) -> float:
        if self.is_bidirected:
            i, j = self.source
            value = p.omega[canonical_pair(i, j)]
        else:
            value = p.omega[self.source]
        for side in (self.left, self.right):
            for t, h in zip(side, side[1:]):
                value *= p.lam[(t, h)]
        return value

    def __str__(self):
        left = "<-".join(reversed(self.left))
        right = "->".join(self.right)
        if self.is_bidirected:
            return f"{left}<->{right}"
        return left + right[len(self.right[0]):]


def _paths_from(g: Admg, s: str) -> list[tuple]:
    out, stack = [], [(s,)]
    while stack:
        path = stack.pop()
        out.append(path)
        for c in g.children(path[-1]):
            stack.append(path + (c,))
    return out


def _path_counts(g: Admg) -> dict[str, dict[str, int]]:
    """``counts[s][v]`` = number of directed paths from ``s`` to ``v``."""
    order = g.topological_order()
    counts = {}
    for s in order:
        c = {s: 1}
        for v in order[order.index(s) + 1:]:
            n = sum(c.get(t, 0) for t in g.parents(v))
            if n:
                c[v] = n
        counts[s] = c
    return counts


def _ordered_bidirected(g: Admg):
    for u, v in g.sorted_bidirected():
        yield u, v
        yield v, u


def count_treks(g: Admg, v: str | None = None, w: str | None = None) -> int:
    """Number of treks between ``v`` and ``w``, or over all ordered pairs when both are None."""
    counts = _path_counts(g)
    if v is None:
        tot = {s: sum(c.values()) for s, c in counts.items()}
        return sum(t * t for t in tot.values()) + sum(tot[i] * tot[j] for i, j in _ordered_bidirected(g))
    n = sum(c.get(v, 0) * c.get(w, 0) for c in counts.values())
    return n + sum(counts[i].get(v, 0) * counts[j].get(w, 0) for i, j in _ordered_bidirected(g))


def enumerate_treks(g: Admg, v: str, w: str, cap: int = DEFAULT_CAP) -> list[Trek]:
    """All treks between ``v`` and ``w``, each once, in lexicographic order.

    Raises:
        TrekExplosion: if the count exceeds ``cap``.
    """
    missing = [x for x in (v, w) if x not in g]
    if missing:
        raise UnknownVertex(missing)
    total = count_treks(g, v, w)
    if total > cap:
        raise TrekExplosion(f"{total} treks between {v!r} and {w!r} exceed the cap of {cap}")
    ending = {s: ([p for p in _paths_from(g, s) if p[-1] == v], [p for p in _paths_from(g, s) if p[-1] == w])
              for s in g.vertices}
    treks = [Trek(lp, rp, s) for s in g.vertices for lp in ending[s][0] for rp in ending[s][1]]
    for i, j in _ordered_bidirected(g):
        treks += [Trek(lp, rp, (i, j)) for lp in ending[i][0] for rp in ending[j][1]]

    def key(t: Trek):
        return ([label_key(x) for x in t.left], [label_key(x) for x in t.right], t.is_bidirected)

    return sorted(treks, key=key)


def covariance_via_treks(p: SemParameters, cap: int = DEFAULT_CAP) -> CovMatrix:
    """Sum one monomial per trek for every ordered vertex pair."""
    g = p.graph
    total = count_treks(g)
    if total > cap:
        raise TrekExplosion(f"{total} treks exceed the cap of {cap}")
    labels = list(g.vertices)
    idx = {v: k for k, v in enumerate(labels)}
    n = len(labels)
    sides = {}
    for s in labels:
        paths = _paths_from(g, s)
        ends = [idx[q[-1]] for q in paths]
        prods = []
        for q in paths:
            x = 1.0
            for t, h in zip(q, q[1:]):
                x *= p.lam[(t, h)]
            prods.append(x)
        sides[s] = (ends, prods)

    if BACKEND == "cython":
        sides = {s: (np.asarray(e, dtype=np.int_), np.asarray(q, dtype=float)) for s, (e, q) in sides.items()}
        out = np.zeros((n, n))
    else:
        out = [[0.0] * n for _ in range(n)]

    visited = 0
    for s in labels:
        e, q = sides[s]
        visited += accumulate_pairs(e, q, e, q, p.omega[s], out)
    for i, j in _ordered_bidirected(g):
        weight = p.omega[canonical_pair(i, j)]
        visited += accumulate_pairs(sides[i][0], sides[i][1], sides[j][0], sides[j][1], weight, out)
    assert visited == total
    return CovMatrix(labels, np.asarray(out, dtype=float))

"""Acyclic directed mixed graphs and their purely graphical queries."""

from __future__ import annotations

import heapq
import re
from collections import deque
from functools import cached_property
from typing import Iterable, Union

from .errors import (
    CycleDetected,
    DuplicateEdge,
    InvalidGraph,
    NotADescendant,
    ParseError,
    UnknownVertex,
    VertexNotInSubset,
)

VertexArg = Union[str, Iterable[str]]

_DIGITS = re.compile(r"^-?\d+$")


def label_key(label: str):
    """Sort key: integer-looking labels compare numerically, before other labels."""
    if _DIGITS.match(label):
        return (0, int(label), label)
    return (1, 0, label)


def sort_labels(labels: Iterable[str]) -> list[str]:
    return sorted(labels, key=label_key)


def canonical_pair(u: str, v: str) -> tuple[str, str]:
    return (u, v) if label_key(u) <= label_key(v) else (v, u)


class Admg:
    """An acyclic directed mixed graph ``G = (V, D, B)``.

    Instances are immutable; edge edits return new graphs. Bidirected edges
    are stored as canonical pairs (lower label first).

    Args:
        vertices: vertex labels. Order is kept for display and file output.
        directed: ``(tail, head)`` pairs.
        bidirected: unordered pairs.

    Raises:
        InvalidGraph: on loops.
        DuplicateEdge: if an edge is listed twice within one edge set.
        UnknownVertex: if an endpoint is not a declared vertex.
        CycleDetected: if the directed part has a cycle.
    """

    def __init__(self, vertices: Iterable[str], directed=(), bidirected=()):
        verts = tuple(str(v) for v in vertices)
        if len(set(verts)) != len(verts):
            dupes = sorted({v for v in verts if verts.count(v) > 1})
            raise InvalidGraph(f"duplicate vertex label(s): {', '.join(dupes)}")
        vset = frozenset(verts)
        dir_list = [(str(t), str(h)) for t, h in directed]
        bi_list = [canonical_pair(str(u), str(v)) for u, v in bidirected]
        for kind, edges in (("directed", dir_list), ("bidirected", bi_list)):
            unknown = {x for e in edges for x in e if x not in vset}
            if unknown:
                raise UnknownVertex(unknown)
            loops = [e for e in edges if e[0] == e[1]]
            if loops:
                raise InvalidGraph(f"{kind} loop at vertex {loops[0][0]!r}")
            if len(set(edges)) != len(edges):
                seen, dup = set(), None
                for e in edges:
                    if e in seen:
                        dup = e
                        break
                    seen.add(e)
                sep = "->" if kind == "directed" else "<->"
                raise DuplicateEdge(f"duplicate {kind} edge {dup[0]}{sep}{dup[1]}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "directed", frozenset(dir_list))
        object.__setattr__(self, "bidirected", frozenset(bi_list))
        object.__setattr__(self, "_vset", vset)
        self.topological_order()

    def __setattr__(self, name, value):
        raise AttributeError("Admg is immutable")

    def __eq__(self, other):
        if not isinstance(other, Admg):
            return NotImplemented
        return (
            self._vset == other._vset
            and self.directed == other.directed
            and self.bidirected == other.bidirected
        )

    def __hash__(self):
        return hash((self._vset, self.directed, self.bidirected))

    def __repr__(self):
        d = ", ".join(f"{t}->{h}" for t, h in self.sorted_directed())
        b = ", ".join(f"{u}<->{v}" for u, v in self.sorted_bidirected())
        return f"Admg(V=[{', '.join(self.vertices)}]; {d}; {b})"

    def __contains__(self, v):
        return v in self._vset

    def __len__(self):
        return len(self.vertices)

    # -- adjacency -----------------------------------------------------

    @cached_property
    def _pa(self) -> dict[str, frozenset]:
        pa = {v: set() for v in self.vertices}
        for t, h in self.directed:
            pa[h].add(t)
        return {v: frozenset(s) for v, s in pa.items()}

    @cached_property
    def _ch(self) -> dict[str, frozenset]:
        ch = {v: set() for v in self.vertices}
        for t, h in self.directed:
            ch[t].add(h)
        return {v: frozenset(s) for v, s in ch.items()}

    @cached_property
    def _sib(self) -> dict[str, frozenset]:
        sib = {v: set() for v in self.vertices}
        for u, v in self.bidirected:
            sib[u].add(v)
            sib[v].add(u)
        return {v: frozenset(s) for v, s in sib.items()}

    def _as_set(self, s: VertexArg) -> frozenset:
        out = frozenset([s]) if isinstance(s, str) else frozenset(s)
        unknown = out - self._vset
        if unknown:
            raise UnknownVertex(unknown)
        return out

    def _check_vertex(self, v: str) -> None:
        if v not in self._vset:
            raise UnknownVertex([v])

    def sorted_directed(self) -> list[tuple[str, str]]:
        return sorted(self.directed, key=lambda e: (label_key(e[0]), label_key(e[1])))

    def sorted_bidirected(self) -> list[tuple[str, str]]:
        return sorted(self.bidirected, key=lambda e: (label_key(e[0]), label_key(e[1])))

    def has_directed(self, tail: str, head: str) -> bool:
        return (tail, head) in self.directed

    def has_bidirected(self, u: str, v: str) -> bool:
        return canonical_pair(u, v) in self.bidirected

    def parents(self, s: VertexArg) -> frozenset:
        s = self._as_set(s)
        return frozenset().union(*(self._pa[v] for v in s))

    def children(self, s: VertexArg) -> frozenset:
        s = self._as_set(s)
        return frozenset().union(*(self._ch[v] for v in s))

    def siblings(self, v: str) -> frozenset:
        self._check_vertex(v)
        return self._sib[v]

    # -- ordering and closures ------------------------------------------

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; among ready vertices the smallest label goes first."""
        if "_topo" in self.__dict__:
            return list(self.__dict__["_topo"])
        indeg = {v: 0 for v in self.vertices}
        ch = {v: [] for v in self.vertices}
        for t, h in self.directed:
            indeg[h] += 1
            ch[t].append(h)
        heap = [(label_key(v), v) for v, k in indeg.items() if k == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            _, v = heapq.heappop(heap)
            order.append(v)
            for h in ch[v]:
                indeg[h] -= 1
                if indeg[h] == 0:
                    heapq.heappush(heap, (label_key(h), h))
        if len(order) != len(self.vertices):
            raise CycleDetected(self._find_cycle({v for v, k in indeg.items() if k > 0}))
        self.__dict__["_topo"] = tuple(order)
        return order

    def _find_cycle(self, remaining: set) -> list[str]:
        # Every vertex left after Kahn has a parent that is also left.
        pa = {v: sort_labels(t for t, h in self.directed if h == v and t in remaining)
              for v in remaining}
        v = sort_labels(remaining)[0]
        seen = {}
        walk = []
        while v not in seen:
            seen[v] = len(walk)
            walk.append(v)
            v = pa[v][0]
        cycle = walk[seen[v]:]
        cycle.reverse()
        return cycle + [cycle[0]]

    @cached_property
    def _topo_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.topological_order())}

    def _closure(self, start: frozenset, step: dict) -> frozenset:
        seen = set(start)
        stack = list(start)
        while stack:
            v = stack.pop()
            for w in step[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return frozenset(seen)

    def ancestors(self, s: VertexArg) -> frozenset:
        """Ancestors of ``s``, including ``s`` itself."""
        return self._closure(self._as_set(s), self._pa)

    def descendants(self, s: VertexArg) -> frozenset:
        """Descendants of ``s``, including ``s`` itself."""
        return self._closure(self._as_set(s), self._ch)

    def nondescendants(self, v: str) -> frozenset:
        return self._vset - self.descendants(v)

    # -- districts, blankets, fixability --------------------------------

    def _within(self, within) -> frozenset:
        return self._vset if within is None else self._as_set(within)

    def district(self, v: str, within: VertexArg | None = None) -> frozenset:
        """Bidirected-connected component of ``v`` in the induced subgraph on ``within``."""
        self._check_vertex(v)
        w = self._within(within)
        if v not in w:
            raise VertexNotInSubset(f"{v!r} is not in the subset")
        seen = {v}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for x in self._sib[u]:
                if x in w and x not in seen:
                    seen.add(x)
                    queue.append(x)
        return frozenset(seen)

    def districts(self, within: VertexArg | None = None) -> list[frozenset]:
        w = self._within(within)
        out, done = [], set()
        for v in self.topological_order():
            if v in w and v not in done:
                d = self.district(v, w)
                done |= d
                out.append(d)
        return out

    def markov_blanket(self, v: str, within: VertexArg | None = None) -> frozenset:
        """``pa(dis(v)) ∪ dis(v) \\ {v}``, computed in the induced subgraph on ``within``."""
        w = self._within(within)
        dis = self.district(v, w)
        pa = frozenset(p for p in self.parents(dis) if p in w)
        return (pa | dis) - {v}

    def is_fixable(self, v: str, within: VertexArg | None = None) -> bool:
        """True when no descendant of ``v`` other than itself shares its district."""
        w = self._within(within)
        dis = self.district(v, w)
        de = self.induced_subgraph(w).descendants(v) if within is not None else self.descendants(v)
        return dis & de == {v}

    def fixability_witness(self, v: str, within: VertexArg | None = None) -> frozenset:
        """Descendants of ``v`` (other than ``v``) in its district; empty iff fixable."""
        w = self._within(within)
        sub = self.induced_subgraph(w) if within is not None else self
        return (sub.district(v) & sub.descendants(v)) - {v}

    # -- structure ------------------------------------------------------

    def induced_subgraph(self, s: VertexArg) -> "Admg":
        s = self._as_set(s)
        if s == self._vset:
            return self
        return Admg(
            [v for v in self.vertices if v in s],
            [e for e in self.directed if e[0] in s and e[1] in s],
            [e for e in self.bidirected if e[0] in s and e[1] in s],
        )

    def cut_vertices(self, a: str, b: str) -> list[str]:
        """Cut vertices between ``a`` and its descendant ``b``.

        The candidate graph is the directed-edges-only subgraph induced on
        ``an(b) ∩ de(a)``, with connectivity taken as undirected. Returned
        in topological order; ``a`` and ``b`` are never included.
        """
        self._check_vertex(a)
        self._check_vertex(b)
        if b not in self.descendants(a):
            raise NotADescendant(f"{b!r} is not a descendant of {a!r}")
        span = self.ancestors(b) & self.descendants(a)
        nbrs = {v: set() for v in span}
        for t, h in self.directed:
            if t in span and h in span:
                nbrs[t].add(h)
                nbrs[h].add(t)
        arts = _articulation_points(nbrs, a)
        return sorted(arts - {a, b}, key=self._topo_index.__getitem__)

    def is_simple(self) -> bool:
        """True iff no vertex pair carries both a directed and a bidirected edge."""
        pairs = {canonical_pair(t, h) for t, h in self.directed}
        return not (pairs & self.bidirected)

    def without_directed(self, tail: str, head: str) -> "Admg":
        return Admg(self.vertices, self.directed - {(tail, head)}, self.bidirected)

    def with_directed(self, tail: str, head: str) -> "Admg":
        return Admg(self.vertices, self.directed | {(tail, head)}, self.bidirected)

    def without_bidirected(self, u: str, v: str) -> "Admg":
        return Admg(self.vertices, self.directed, self.bidirected - {canonical_pair(u, v)})

    def with_bidirected(self, u: str, v: str) -> "Admg":
        return Admg(self.vertices, self.directed, self.bidirected | {canonical_pair(u, v)})


def _articulation_points(nbrs: dict, root: str) -> set:
    """Articulation points of the component containing ``root`` (Hopcroft-Tarjan)."""
    disc, low, arts = {}, {}, set()
    counter = 0

    def visit(u, parent):
        nonlocal counter
        disc[u] = low[u] = counter
        counter += 1
        children = 0
        for w in sorted(nbrs[u], key=label_key):
            if w not in disc:
                children += 1
                visit(w, u)
                low[u] = min(low[u], low[w])
                if parent is not None and low[w] >= disc[u]:
                    arts.add(u)
            elif w != parent:
                low[u] = min(low[u], disc[w])
        if parent is None and children > 1:
            arts.add(u)

    visit(root, None)
    return arts


def parse_edge(text: str) -> tuple[str, str, str]:
    """Parse ``"a->b"`` or ``"a<->b"`` into ``(kind, a, b)``."""
    text = text.strip()
    if "<->" in text:
        a, b = text.split("<->", 1)
        kind = "bidirected"
    elif "->" in text:
        a, b = text.split("->", 1)
        kind = "directed"
    else:
        raise ParseError(f"edge {text!r} must look like 'a->b' or 'a<->b'")
    a, b = a.strip(), b.strip()
    if not a or not b:
        raise ParseError(f"edge {text!r} has an empty endpoint")
    return kind, a, b

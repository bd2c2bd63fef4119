"""Covariance constraints from iterated edge removal.

Remove identifiable edges one at a time until the target edge sets are
empty. Each vertex pair with no trek in the terminal graph then gives a
rational function of ``Σ`` that must vanish on the model. Constraints are kept
as numeric evaluators: replay the removals on a given ``Σ`` and read off
the entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import LabelMismatch, NoPlanFound, PlanInvalid, WrongDimension
from .graph import Admg, label_key, sort_labels
from .identify import IdentifiabilityReport, check_remove_bidirected, check_remove_directed, orient_bidirected
from .intervene import remove_bidirected, remove_directed
from .sem import CovMatrix

DIRECTED = "directed"
BIDIRECTED = "bidirected"
TARGETS = ("directed-only", "all-edges")

# A pair is "trivially vanishing" when its replayed entry is ~0 on generic, non-model Σ.
TRIVIAL_RTOL = 1e-9
TRIVIAL_PROBES = 4


@dataclass(frozen=True)
class RemovalStep:
    kind: str
    edge: tuple
    report: IdentifiabilityReport

    @property
    def edge_string(self) -> str:
        sep = "->" if self.kind == DIRECTED else "<->"
        return f"{self.edge[0]}{sep}{self.edge[1]}"

    def apply(self, s: CovMatrix, g: Admg):
        if self.kind == DIRECTED:
            return remove_directed(s, g, *self.edge)
        return remove_bidirected(s, g, *self.edge)


@dataclass(frozen=True)
class RemovalPlan:
    steps: tuple
    terminal_graph: Admg
    target: str

    def edges(self) -> list[str]:
        return [st.edge_string for st in self.steps]

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "steps": [{"edge": st.edge_string, "kind": st.kind} for st in self.steps],
        }


def _candidates(g: Admg, target: str) -> list[tuple[str, tuple]]:
    cands = [(DIRECTED, e) for e in g.directed]
    if target == "all-edges":
        cands += [(BIDIRECTED, orient_bidirected(g, *e)) for e in g.bidirected]
    # Latest head first; reproduces the removal order 3->4, 2->3, 1->3, 1->2 on the Verma graph.
    return sorted(cands, key=lambda c: (label_key(c[1][1]), label_key(c[1][0]), c[0]), reverse=True)


def _done(g: Admg, target: str) -> bool:
    return not g.directed and (target == "directed-only" or not g.bidirected)


def _check(g: Admg, kind: str, edge: tuple) -> IdentifiabilityReport:
    if kind == DIRECTED:
        return check_remove_directed(g, *edge)
    return check_remove_bidirected(g, *edge)


def _remove(g: Admg, kind: str, edge: tuple) -> Admg:
    return g.without_directed(*edge) if kind == DIRECTED else g.without_bidirected(*edge)


def plan_removals(g: Admg, target: str = "directed-only") -> RemovalPlan:
    """First complete removal sequence found by depth-first search with backtracking.

    Each step must pass its simple-identifiability check in the graph left by
    the earlier steps. ``target="all-edges"`` also removes bidirected edges;
    that mode relies on the non-descendant block staying fixed and is
    experimental.

    Raises:
        NoPlanFound: carrying the longest prefix reached.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    dead: set = set()
    best: list = []

    def search(cur: Admg, steps: list):
        nonlocal best
        if len(steps) > len(best):
            best = list(steps)
        if _done(cur, target):
            return cur
        if cur in dead:
            return None
        for kind, edge in _candidates(cur, target):
            rep = _check(cur, kind, edge)
            if not rep.ok:
                continue
            steps.append(RemovalStep(kind, edge, rep))
            end = search(_remove(cur, kind, edge), steps)
            if end is not None:
                return end
            steps.pop()
        dead.add(cur)
        return None

    steps: list = []
    end = search(g, steps)
    if end is None:
        raise NoPlanFound(best)
    return RemovalPlan(tuple(steps), end, target)


def validate_plan(g: Admg, plan: RemovalPlan) -> list[Admg]:
    """Graphs before each step and the terminal graph; raises :class:`PlanInvalid` on any bad step."""
    graphs = [g]
    cur = g
    for st in plan.steps:
        present = cur.has_directed(*st.edge) if st.kind == DIRECTED else cur.has_bidirected(*st.edge)
        if not present:
            raise PlanInvalid(f"step {st.edge_string}: edge not present")
        rep = _check(cur, st.kind, st.edge)
        if not rep.ok:
            raise PlanInvalid(f"step {st.edge_string}: {rep.reason}")
        cur = _remove(cur, st.kind, st.edge)
        graphs.append(cur)
    if cur != plan.terminal_graph:
        raise PlanInvalid("plan does not end at its terminal graph")
    return graphs


def replay(s: CovMatrix, g: Admg, plan: RemovalPlan) -> list[CovMatrix]:
    """``Σ`` followed by the covariance after every removal step."""
    covs = [s]
    cur = g
    for st in plan.steps:
        res = st.apply(covs[-1], cur)
        covs.append(res.new_cov)
        cur = res.new_graph
    return covs


def trek_free_pairs(g: Admg) -> list[tuple[str, str]]:
    """Vertex pairs with no trek between them."""
    an = {v: g.ancestors(v) for v in g.vertices}
    out = []
    for v, w in combinations(sort_labels(g.vertices), 2):
        if an[v] & an[w]:
            continue
        if any((i in an[v] and j in an[w]) or (j in an[v] and i in an[w]) for i, j in g.bidirected):
            continue
        out.append((v, w))
    return out


def _probe_covariances(labels, n_probes: int, seed: int = 20240517) -> list[CovMatrix]:
    rng = np.random.default_rng(seed)
    n = len(labels)
    out = []
    for _ in range(n_probes):
        x = rng.standard_normal((n + 3, n))
        out.append(CovMatrix(labels, x.T @ x / (n + 3) + 0.1 * np.eye(n)))
    return out


@dataclass(frozen=True)
class ConstraintResidual:
    pair: tuple
    value: float
    scale: float

    @property
    def relative(self) -> float:
        return abs(self.value) / self.scale if self.scale > 0 else abs(self.value)


@dataclass(frozen=True)
class ConstraintSet:
    graph: Admg
    plan: RemovalPlan
    pairs: tuple
    trivial_pairs: tuple

    def residuals(self, s: CovMatrix) -> list[ConstraintResidual]:
        return residual_of_plan(s, self)

    def to_dict(self) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "pairs": [list(p) for p in self.pairs],
            "trivial_pairs": [list(p) for p in self.trivial_pairs],
        }


def derive_constraints(g: Admg, plan: RemovalPlan) -> ConstraintSet:
    """Non-trivial trek-free pairs of the plan's terminal graph.

    A pair is dropped as trivially vanishing when its replayed entry is zero
    to within ``TRIVIAL_RTOL`` on several random covariance matrices that lie
    outside the model.
    """
    validate_plan(g, plan)
    candidates = trek_free_pairs(plan.terminal_graph)
    probes = _probe_covariances(list(g.vertices), TRIVIAL_PROBES)
    trivial = set(candidates)
    for s in probes:
        covs = replay(s, g, plan)
        scale = _scale(covs)
        final = covs[-1]
        trivial = {p for p in trivial if abs(final[p]) <= TRIVIAL_RTOL * scale}
    pairs = tuple(p for p in candidates if p not in trivial)
    return ConstraintSet(g, plan, pairs, tuple(p for p in candidates if p in trivial))


def _scale(covs: list[CovMatrix]) -> float:
    return float(max(np.max(np.abs(c.values)) for c in covs))


def residual_of_plan(s: CovMatrix, cs: ConstraintSet) -> list[ConstraintResidual]:
    """Replayed terminal entries for each constraint, with the largest intermediate magnitude as scale."""
    if set(s.labels) != set(cs.graph.vertices):
        raise LabelMismatch("covariance labels differ from the constraint set's graph")
    covs = replay(s, cs.graph, cs.plan)
    scale = _scale(covs)
    return [ConstraintResidual(p, covs[-1][p], scale) for p in cs.pairs]


def _four(s: CovMatrix):
    if s.values.shape != (4, 4):
        raise WrongDimension(f"expected a 4x4 covariance, got {s.values.shape}")
    m = s.values
    return lambda i, j: m[i - 1, j - 1]


def verma_terms(s: CovMatrix) -> list[float]:
    """The eight signed monomials of the Verma polynomial; rows/cols in ``s`` label order."""
    o = _four(s)
    return [
        o(1, 1) * o(1, 3) * o(2, 2) * o(3, 4),
        -o(1, 2) ** 2 * o(1, 3) * o(3, 4),
        -o(1, 1) * o(1, 4) * o(2, 2) * o(3, 3),
        o(1, 2) ** 2 * o(1, 4) * o(3, 3),
        -o(1, 1) * o(1, 3) * o(2, 3) * o(2, 4),
        o(1, 1) * o(1, 4) * o(2, 3) ** 2,
        o(1, 2) * o(1, 3) ** 2 * o(2, 4),
        -o(1, 2) * o(1, 3) * o(1, 4) * o(2, 3),
    ]


def eval_verma(s: CovMatrix) -> float:
    return float(sum(verma_terms(s)))


def gadget_terms(s: CovMatrix) -> list[float]:
    o = _four(s)
    return [
        o(1, 1) * o(2, 2) * o(3, 4),
        -o(1, 3) * o(1, 4) * o(2, 2),
        o(1, 3) * o(1, 2) * o(2, 4),
        -o(2, 3) * o(1, 1) * o(2, 4),
    ]


def eval_gadget(s: CovMatrix) -> float:
    return float(sum(gadget_terms(s)))

"""Regression identifiability of edge coefficients, path sums and error covariances.

Every decision here is purely graphical. A successful report names the
adjustment set (or a chain of regressions) so the quantity can then be read
off any covariance matrix in the model with :meth:`IdentifiabilityReport.evaluate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import EdgeExists, NoSuchEdge, NotADescendant, UnknownVertex, WouldCreateCycle
from .graph import Admg, canonical_pair, sort_labels
from .sem import CovMatrix, conditional_cov, regression_coef

REGRESSION = "regression-identifiable"
GENERIC = "generically-identifiable"
NOT_IDENTIFIED = "not-identified-by-these-methods"
UNKNOWN = "unknown"

EDGE_COEF = "edge-coefficient"
PATH_SUM = "path-sum"
BIDIRECTED_COEF = "bidirected-coefficient"
SIGMA_STAR = "interventional-covariance"


@dataclass(frozen=True)
class RegressionStep:
    """One factor ``β_{source,target·adjustment}`` of a path-sum recipe."""

    source: str
    target: str
    adjustment: frozenset

    def evaluate(self, s: CovMatrix) -> float:
        return regression_coef(s, self.source, self.target, self.adjustment)

    def to_dict(self) -> dict:
        return {"from": self.source, "to": self.target, "adjustment": sort_labels(self.adjustment)}


@dataclass(frozen=True)
class IdentifiabilityReport:
    target: str
    endpoints: tuple
    status: str
    adjustment: Optional[frozenset] = None
    recipe: Optional[tuple] = None
    reason: Optional[str] = None
    witness: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    operation: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status in (REGRESSION, GENERIC)

    @property
    def edge_string(self) -> str:
        a, b = self.endpoints
        if self.target == BIDIRECTED_COEF or self.operation == "remove-bidirected":
            return f"{a}<->{b}"
        return f"{a}->{b}"

    def summary(self) -> str:
        a, b = self.endpoints
        if self.target == SIGMA_STAR:
            label = "Sigma* (model)" if self.operation == "model" else f"Sigma* ({self.operation} {self.edge_string})"
        else:
            label = {EDGE_COEF: "lambda", PATH_SUM: "sigma(D)", BIDIRECTED_COEF: "omega"}[self.target] + f"[{a},{b}]"
        text = f"{label}: {self.status}"
        if self.adjustment is not None:
            text += f", adjustment {{{', '.join(sort_labels(self.adjustment))}}}"
        if self.recipe and len(self.recipe) > 1:
            text += ", recipe " + " * ".join(
                f"beta_{st.source}{st.target}.{''.join(sort_labels(st.adjustment))}" for st in self.recipe
            )
        if self.reason:
            text += f" ({self.reason})"
        return text

    def evaluate(self, s: CovMatrix) -> float:
        """Read the identified quantity off ``s``; only valid for successful scalar reports."""
        if not self.ok or self.target == SIGMA_STAR:
            raise ValueError(f"cannot evaluate report with status {self.status!r} and target {self.target!r}")
        a, b = self.endpoints
        if self.target == EDGE_COEF:
            return regression_coef(s, a, b, self.adjustment)
        if self.target == BIDIRECTED_COEF:
            return conditional_cov(s, a, b, self.adjustment)
        return math.prod(step.evaluate(s) for step in self.recipe)

    def to_dict(self) -> dict:
        def conv(x):
            if isinstance(x, IdentifiabilityReport):
                return x.to_dict()
            if isinstance(x, (frozenset, set)):
                return sort_labels(x)
            if isinstance(x, dict):
                return {str(k): conv(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [conv(v) for v in x]
            return x

        return {
            "target": self.target,
            "operation": self.operation,
            "endpoints": list(self.endpoints),
            "status": self.status,
            "adjustment": None if self.adjustment is None else sort_labels(self.adjustment),
            "recipe": None if self.recipe is None else [st.to_dict() for st in self.recipe],
            "reason": self.reason,
            "witness": conv(self.witness),
            "details": conv(self.details),
        }


def _require(g: Admg, *vs: str) -> None:
    missing = [v for v in vs if v not in g]
    if missing:
        raise UnknownVertex(missing)


def identify_lambda(g: Admg, a: str, b: str) -> IdentifiabilityReport:
    """Single-regression identifiability of the coefficient on ``a -> b``.

    Identifiable iff ``a`` is outside the district of ``b`` in ``G_an(b)`` and
    has no edge into any other member of that district. The adjustment set
    is ``mb_an(b)(b) \\ {a}``.
    """
    _require(g, a, b)
    if not g.has_directed(a, b):
        raise NoSuchEdge(f"no directed edge {a}->{b}")
    an_b = g.ancestors(b)
    dis = g.district(b, an_b)
    ends = (a, b)
    if a in dis:
        return IdentifiabilityReport(
            EDGE_COEF, ends, NOT_IDENTIFIED,
            reason=f"{a} is in the district of {b} within an({b})",
            witness={"district_member": a, "district": dis},
        )
    into = sort_labels(d for d in dis if d != b and g.has_directed(a, d))
    if into:
        return IdentifiabilityReport(
            EDGE_COEF, ends, NOT_IDENTIFIED,
            reason=f"{a} has a directed edge into {into[0]}, a district member of {b}",
            witness={"edge": [a, into[0]], "district": dis},
        )
    return IdentifiabilityReport(EDGE_COEF, ends, REGRESSION, adjustment=g.markov_blanket(b, an_b) - {a})


def identify_path_sum(g: Admg, b: str, c: str) -> IdentifiabilityReport:
    """Single-regression identifiability of ``σ(D_bc)``: iff ``b`` is fixable in ``G_an(c)``."""
    _require(g, b, c)
    if c == b or c not in g.descendants(b):
        raise NotADescendant(f"{c!r} is not a proper descendant of {b!r}")
    an_c = g.ancestors(c)
    witness = g.fixability_witness(b, an_c)
    if witness:
        return IdentifiabilityReport(
            PATH_SUM, (b, c), NOT_IDENTIFIED,
            reason=f"{b} is not fixable in an({c}): district shares descendant(s) {', '.join(sort_labels(witness))}",
            witness={"descendants_in_district": witness},
        )
    adj = g.markov_blanket(b, an_c)
    return IdentifiabilityReport(PATH_SUM, (b, c), REGRESSION, adjustment=adj,
                                 recipe=(RegressionStep(b, c, adj),))


def identify_path_sum_cutvertex(g: Admg, b: str, c: str) -> IdentifiabilityReport:
    """Path sum via a chain of regressions through cut vertices.

    Tries the plain single regression first, then a depth-first search over
    the cut vertices of ``b -> c`` in topological order.
    """
    plain = identify_path_sum(g, b, c)
    if plain.ok:
        return plain
    cuts = g.cut_vertices(b, c)

    def search(u: str, rest: list[str]) -> Optional[list[RegressionStep]]:
        direct = identify_path_sum(g, u, c)
        if direct.ok:
            return list(direct.recipe)
        for k, v in enumerate(rest):
            step = identify_path_sum(g, u, v)
            if not step.ok:
                continue
            tail = search(v, rest[k + 1:])
            if tail is not None:
                return list(step.recipe) + tail
        return None

    chain = search(b, cuts)
    if chain is None:
        return IdentifiabilityReport(
            PATH_SUM, (b, c), NOT_IDENTIFIED,
            reason=f"{plain.reason}; no chain through cut vertices {cuts} is identifiable",
            witness={**plain.witness, "cut_vertices": cuts},
        )
    return IdentifiabilityReport(PATH_SUM, (b, c), GENERIC, recipe=tuple(chain),
                                 details={"cut_vertices": cuts})


def orient_bidirected(g: Admg, u: str, v: str) -> tuple[str, str]:
    """Return ``(a*, b)`` with ``a*`` a non-descendant of ``b``; topologically earlier first on ties."""
    _require(g, u, v)
    if not g.has_bidirected(u, v):
        raise NoSuchEdge(f"no bidirected edge {u}<->{v}")
    u_nd_v = u not in g.descendants(v)
    v_nd_u = v not in g.descendants(u)
    if u_nd_v and v_nd_u:
        idx = g._topo_index
        return (u, v) if idx[u] < idx[v] else (v, u)
    return (u, v) if u_nd_v else (v, u)


def identify_omega(g: Admg, u: str, v: str) -> IdentifiabilityReport:
    """Single-regression identifiability of the error covariance on ``u <-> v``.

    With ``W = an({a*, b})`` and ``G*`` the graph without the edge, succeeds
    when ``a*`` is fixable in ``G_W``, ``G*_W`` has no bidirected path from
    ``a*`` to ``b``, and ``a*`` is outside ``ξ = mb(b)`` computed in ``G*_W``.
    Then ``ω = σ_{a*b·ξ}``. ``b`` is always fixable in ``G_W`` because ``a*``
    is not its descendant; global fixability only matters for path sums.
    """
    a, b = orient_bidirected(g, u, v)
    ends = (a, b)
    w = g.ancestors({a, b})
    blocking = g.fixability_witness(a, w)
    if blocking:
        return IdentifiabilityReport(
            BIDIRECTED_COEF, ends, NOT_IDENTIFIED,
            reason=f"{a} is not fixable in an({a},{b}): district shares descendant(s) "
                   f"{', '.join(sort_labels(blocking))}",
            witness={"descendants_in_district": blocking},
        )
    star = g.without_bidirected(a, b)
    dis = star.district(b, w)
    if a in dis:
        return IdentifiabilityReport(
            BIDIRECTED_COEF, ends, NOT_IDENTIFIED,
            reason=f"bidirected path from {a} to {b} remains after removing the edge",
            witness={"district": dis},
        )
    xi = star.markov_blanket(b, w)
    if a in xi:
        return IdentifiabilityReport(
            BIDIRECTED_COEF, ends, NOT_IDENTIFIED,
            reason=f"{a} is a parent of the district of {b}",
            witness={"district": dis},
        )
    return IdentifiabilityReport(BIDIRECTED_COEF, ends, REGRESSION, adjustment=xi)


def _path_sum_reports(g: Admg, b: str, targets, method: str) -> dict:
    fn = identify_path_sum_cutvertex if method == "cutvertex" else identify_path_sum
    return {c: fn(g, b, c) for c in targets}


def _first_failure(reports: dict) -> Optional[IdentifiabilityReport]:
    for c in sort_labels(reports):
        if not reports[c].ok:
            return reports[c]
    return None


def _combined_status(parts) -> str:
    return REGRESSION if all(p.status == REGRESSION for p in parts) else GENERIC


def check_remove_directed(g: Admg, a: str, b: str, method: str = "regression") -> IdentifiabilityReport:
    """Can ``Σ*`` after deleting ``a -> b`` be read off ``Σ``?

    Needs ``λ_ab`` and every ``σ(D_bc)``, ``c ∈ de(b) \\ {b}``. With
    ``method="cutvertex"`` path sums may use cut-vertex chains.
    """
    _require(g, a, b)
    if not g.has_directed(a, b):
        raise NoSuchEdge(f"no directed edge {a}->{b}")
    lam = identify_lambda(g, a, b)
    cs = sort_labels(g.descendants(b) - {b})
    paths = _path_sum_reports(g, b, cs, method)
    star = g.without_directed(a, b)
    an_b = g.ancestors(b)
    details = {
        "lambda": lam,
        "path_sums": paths,
        "b_fixable": g.is_fixable(b),
        "a_outside_blanket": a not in star.markov_blanket(b, an_b),
    }
    op = "remove-directed"
    if not lam.ok:
        return IdentifiabilityReport(SIGMA_STAR, (a, b), NOT_IDENTIFIED, operation=op,
                                     reason=f"lambda not identifiable: {lam.reason}",
                                     witness=lam.witness, details=details)
    bad = _first_failure(paths)
    if bad is not None:
        c = bad.endpoints[1]
        return IdentifiabilityReport(SIGMA_STAR, (a, b), NOT_IDENTIFIED, operation=op,
                                     reason=f"b not fixable: {bad.reason}",
                                     witness={"c": c, **bad.witness}, details=details)
    return IdentifiabilityReport(SIGMA_STAR, (a, b), _combined_status([lam, *paths.values()]),
                                 operation=op, details=details)


def check_add_directed(g: Admg, a: str, b: str, method: str = "regression") -> IdentifiabilityReport:
    """Can ``Σ*`` after adding ``a -> b`` be computed from ``Σ``? Needs every ``σ(D_bc)``."""
    _require(g, a, b)
    if g.has_directed(a, b):
        raise EdgeExists(f"directed edge {a}->{b} already present")
    if a == b or a in g.descendants(b):
        raise WouldCreateCycle(f"adding {a}->{b} creates a directed cycle")
    cs = sort_labels(g.descendants(b) - {b})
    paths = _path_sum_reports(g, b, cs, method)
    details = {"path_sums": paths, "b_fixable": g.is_fixable(b)}
    op = "add-directed"
    bad = _first_failure(paths)
    if bad is not None:
        return IdentifiabilityReport(SIGMA_STAR, (a, b), NOT_IDENTIFIED, operation=op,
                                     reason=f"b not fixable: {bad.reason}",
                                     witness={"c": bad.endpoints[1], **bad.witness}, details=details)
    status = _combined_status(paths.values()) if paths else REGRESSION
    return IdentifiabilityReport(SIGMA_STAR, (a, b), status, operation=op, details=details)


def check_remove_bidirected(g: Admg, u: str, v: str, method: str = "regression") -> IdentifiabilityReport:
    """Can ``Σ*`` after deleting ``u <-> v`` be read off ``Σ``?

    Needs ``ω_{a*b}``, every ``σ(D_{a*w})`` for ``w`` a proper descendant of
    ``a*``, and every ``σ(D_bc)``, ``c ∈ de(b) \\ {b}``.
    """
    if u == v:
        raise NoSuchEdge(f"no bidirected loop at {u!r}")
    omega = identify_omega(g, u, v)
    a, b = omega.endpoints
    from_a = _path_sum_reports(g, a, sort_labels(g.descendants(a) - {a}), method)
    from_b = _path_sum_reports(g, b, sort_labels(g.descendants(b) - {b}), method)
    star = g.without_bidirected(a, b)
    details = {
        "omega": omega,
        "path_sums_from_a": from_a,
        "path_sums_from_b": from_b,
        "a_fixable": g.is_fixable(a),
        "b_fixable": g.is_fixable(b),
        "a_outside_district": a not in star.district(b, g.ancestors(b) | {a}),
    }
    op = "remove-bidirected"
    if not omega.ok:
        return IdentifiabilityReport(SIGMA_STAR, (a, b), NOT_IDENTIFIED, operation=op,
                                     reason=f"omega not identifiable: {omega.reason}",
                                     witness=omega.witness, details=details)
    for who, reports in (("a", from_a), ("b", from_b)):
        bad = _first_failure(reports)
        if bad is not None:
            return IdentifiabilityReport(SIGMA_STAR, (a, b), NOT_IDENTIFIED, operation=op,
                                         reason=f"{who} not fixable: {bad.reason}",
                                         witness={"c": bad.endpoints[1], **bad.witness}, details=details)
    status = _combined_status([omega, *from_a.values(), *from_b.values()])
    return IdentifiabilityReport(SIGMA_STAR, (a, b), status, operation=op, details=details)


def check_simple_generic(g: Admg) -> IdentifiabilityReport:
    """Whole-model generic identifiability from simplicity alone.

    A simple graph is generically identifiable. Anything else is reported as
    ``unknown``: instrumental-set analysis is not implemented.
    """
    if g.is_simple():
        return IdentifiabilityReport(SIGMA_STAR, ("*", "*"), GENERIC, operation="model",
                                     reason="graph is simple")
    pairs = sorted({canonical_pair(t, h) for t, h in g.directed} & g.bidirected)
    return IdentifiabilityReport(SIGMA_STAR, ("*", "*"), UNKNOWN, operation="model",
                                 reason="instrumental-set analysis out of scope",
                                 witness={"doubled_pairs": [list(p) for p in pairs]})

"""Edge interventions on a covariance matrix and on individual-level data.

All three interventions are congruences of ``Σ`` by a rank-one perturbation
of the identity, so every block formula below is one instance of

    σ*_xy = σ_xy + t (d_x σ_{a*y} + d_y σ_{a*x}) + t² d_x d_y σ_{a*a*}

for directed edges (``t = -λ`` to remove, ``+λ`` to add, ``d = σ(D_bV)``),
and ``σ*_xy = σ_xy - ω (p_x q_y + q_x p_y)`` for a bidirected edge with
``p = σ(D_{a*}V)``, ``q = σ(D_bV)``. The non-descendant block of ``b`` is
copied, never recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import LabelMismatch, NotIdentifiable
from .graph import Admg, sort_labels
from .identify import (
    IdentifiabilityReport,
    check_add_directed,
    check_remove_bidirected,
    check_remove_directed,
)
from .sem import CovMatrix, Dataset, pd_margin


@dataclass(frozen=True)
class InterventionResult:
    """Outcome of one edge intervention.

    ``pd_ok`` is False when ``new_cov`` is not positive definite; the matrix
    is still returned so the caller can inspect it.
    """

    kind: str
    edge: tuple
    new_graph: Admg
    new_cov: CovMatrix
    used: dict
    pd_ok: bool
    pd_margin: float
    report: IdentifiabilityReport
    # Linear map x -> x + coef * x[pivot] * direction; None for bidirected removal.
    coef: Optional[float] = None
    direction: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def pd_check(self) -> bool:
        return self.pd_ok

    def transform_matrix(self) -> np.ndarray:
        """``M`` with ``Σ* = M Σ Mᵀ``, in ``new_cov`` label order (directed kinds only)."""
        if self.direction is None:
            raise ValueError("bidirected removal has no individual-level transform")
        labels = self.new_cov.labels
        m = np.eye(len(labels))
        m[:, labels.index(self.edge[0])] += self.coef * self.direction
        return m

    def to_dict(self) -> dict:
        sep = "<->" if self.kind == "remove-bidirected" else "->"
        return {
            "kind": self.kind,
            "edge": f"{self.edge[0]}{sep}{self.edge[1]}",
            "pd_check": self.pd_ok,
            "pd_margin": self.pd_margin,
            "used": self.used,
            "report": self.report.to_dict(),
        }


def _check_labels(s: CovMatrix, g: Admg) -> None:
    s.matches(g)


def _path_vector(s: CovMatrix, g: Admg, src: str, reports: dict) -> tuple[np.ndarray, dict]:
    """``σ(D_{src}v)`` for every label of ``s``: 1 at ``src``, 0 off ``de(src)``, else identified."""
    vec = np.zeros(len(s.labels))
    vec[s.index(src)] = 1.0
    used = {}
    for c, rep in reports.items():
        value = rep.evaluate(s)
        vec[s.index(c)] = value
        used[c] = {
            "value": value,
            "status": rep.status,
            "recipe": [st.to_dict() for st in rep.recipe],
        }
    return vec, used


def _directed_update(s: CovMatrix, g: Admg, a: str, b: str, t: float, d: np.ndarray) -> np.ndarray:
    sig = s.values
    ia = s.index(a)
    row = sig[ia]
    new = sig + t * (np.outer(d, row) + np.outer(row, d)) + (t * t * sig[ia, ia]) * np.outer(d, d)
    keep = s.indices(sort_labels(g.nondescendants(b)))
    new[np.ix_(keep, keep)] = sig[np.ix_(keep, keep)]
    return new


def _finish(kind, edge, new_graph, s, values, used, report, coef=None, direction=None):
    cov = CovMatrix(s.labels, values)
    ok, margin = pd_margin(cov.values)
    return InterventionResult(kind, edge, new_graph, cov, used, ok, margin, report, coef, direction)


def remove_directed(s: CovMatrix, g: Admg, a: str, b: str, method: str = "regression") -> InterventionResult:
    """``Σ*`` after deleting ``a -> b``, with ``λ`` and every ``σ(D_bc)`` read off ``Σ``.

    Raises:
        NotIdentifiable: when the check fails; the report is attached.
    """
    _check_labels(s, g)
    report = check_remove_directed(g, a, b, method)
    if not report.ok:
        raise NotIdentifiable(report)
    lam_rep = report.details["lambda"]
    lam = lam_rep.evaluate(s)
    d, used_paths = _path_vector(s, g, b, report.details["path_sums"])
    values = _directed_update(s, g, a, b, -lam, d)
    used = {
        "lambda": {"value": lam, "adjustment": sort_labels(lam_rep.adjustment)},
        "path_sums": used_paths,
    }
    return _finish("remove-directed", (a, b), g.without_directed(a, b), s, values, used, report, -lam, d)


def add_directed(s: CovMatrix, g: Admg, a: str, b: str, lam: float, method: str = "regression") -> InterventionResult:
    """``Σ*`` after adding ``a -> b`` with caller-chosen coefficient ``lam``.

    This is the exact inverse of :func:`remove_directed`: every new trek runs
    through the new edge with a positive sign, so the quadratic terms carry
    ``+λ²``.
    """
    _check_labels(s, g)
    report = check_add_directed(g, a, b, method)
    if not report.ok:
        raise NotIdentifiable(report)
    d, used_paths = _path_vector(s, g, b, report.details["path_sums"])
    lam = float(lam)
    values = _directed_update(s, g, a, b, lam, d)
    used = {"lambda": {"value": lam, "adjustment": None}, "path_sums": used_paths}
    return _finish("add-directed", (a, b), g.with_directed(a, b), s, values, used, report, lam, d)


def remove_bidirected(s: CovMatrix, g: Admg, u: str, v: str, method: str = "regression") -> InterventionResult:
    """``Σ*`` after deleting ``u <-> v``, assuming the non-descendants of ``b`` keep their joint law.

    The result may fail the positive-definiteness check; it is flagged, not rejected.
    """
    _check_labels(s, g)
    report = check_remove_bidirected(g, u, v, method)
    if not report.ok:
        raise NotIdentifiable(report)
    a, b = report.endpoints
    omega_rep = report.details["omega"]
    omega = omega_rep.evaluate(s)
    p, used_a = _path_vector(s, g, a, report.details["path_sums_from_a"])
    q, used_b = _path_vector(s, g, b, report.details["path_sums_from_b"])
    sig = s.values
    values = sig - omega * (np.outer(p, q) + np.outer(q, p))
    keep = s.indices(sort_labels(g.nondescendants(b)))
    values[np.ix_(keep, keep)] = sig[np.ix_(keep, keep)]
    used = {
        "omega": {"value": omega, "adjustment": sort_labels(omega_rep.adjustment)},
        "path_sums_from_a": used_a,
        "path_sums_from_b": used_b,
    }
    return _finish("remove-bidirected", (a, b), g.without_bidirected(a, b), s, values, used, report)


def apply_to_data(d: Dataset, res: InterventionResult) -> Dataset:
    labels = res.new_cov.labels
    if set(d.labels) != set(labels):
        missing = sort_labels(set(labels) - set(d.labels))
        extra = sort_labels(set(d.labels) - set(labels))
        raise LabelMismatch(f"dataset columns differ from graph: missing {missing}, extra {extra}")
    direction = res.direction[[labels.index(v) for v in d.labels]]
    pivot = d.rows[:, d.labels.index(res.edge[0])]
    return Dataset(d.labels, d.rows + res.coef * np.outer(pivot, direction))


def transform_data_remove(d: Dataset, s: CovMatrix, g: Admg, a: str, b: str,
                          method: str = "regression") -> Dataset:
    """Counterfactual rows with ``a -> b`` deleted: ``x* = x - λ σ(D_bV) x_a``."""
    return apply_to_data(d, remove_directed(s, g, a, b, method))


def transform_data_add(d: Dataset, s: CovMatrix, g: Admg, a: str, b: str, lam: float,
                       method: str = "regression") -> Dataset:
    """Counterfactual rows with ``a -> b`` added: ``x* = x + λ σ(D_bV) x_a``."""
    return apply_to_data(d, add_directed(s, g, a, b, lam, method))

"""Gaussian linear SEM algebra: parameters, covariances, path sums, regressions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    LabelMismatch,
    NotPositiveDefinite,
    SingularConditioningBlock,
    TooFewRows,
    UnknownVertex,
    ValidationError,
)
from .graph import Admg, canonical_pair

PD_RTOL = 1e-10


def pd_margin(m: np.ndarray, rtol: float = PD_RTOL) -> tuple[bool, float]:
    """Cholesky-based positive-definiteness check.

    Accepts when every pivot ``L_ii**2`` exceeds ``rtol`` times the largest
    diagonal entry. Returns ``(ok, smallest pivot / largest diagonal)``; the
    ratio is ``-inf`` when the factorization breaks down.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return True, np.inf
    scale = float(np.max(np.diag(m)))
    if not np.isfinite(scale) or scale <= 0:
        return False, -np.inf
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False, -np.inf
    ratio = float(np.min(np.diag(chol) ** 2) / scale)
    return ratio > rtol, ratio


def _symmetric_from_upper(m: np.ndarray) -> np.ndarray:
    upper = np.triu(m)
    return upper + np.triu(m, 1).T


class CovMatrix:
    """A labelled symmetric covariance matrix.

    The stored matrix is rebuilt from the upper triangle of ``values`` so it
    is exactly symmetric. Use :func:`from_full` when the input must be
    checked for symmetry first.
    """

    __slots__ = ("labels", "values", "_index")

    def __init__(self, labels: Sequence[str], values):
        labels = tuple(str(v) for v in labels)
        values = np.array(values, dtype=float)
        if values.shape != (len(labels), len(labels)):
            raise ValidationError(
                f"covariance shape {values.shape} does not match {len(labels)} labels"
            )
        values = _symmetric_from_upper(values)
        values.setflags(write=False)
        self.labels = labels
        self.values = values
        self._index = {v: i for i, v in enumerate(labels)}

    @classmethod
    def from_full(cls, labels: Sequence[str], values, atol: float = 1e-12) -> "CovMatrix":
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValidationError("covariance values must be a square matrix")
        asym = np.max(np.abs(values - values.T)) if values.size else 0.0
        if asym > atol:
            raise ValidationError(f"covariance is not symmetric (max asymmetry {asym:.3g})")
        return cls(labels, values)

    def __repr__(self):
        return f"CovMatrix(labels={list(self.labels)})"

    def __eq__(self, other):
        if not isinstance(other, CovMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.values, other.values)

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise UnknownVertex([v]) from None

    def indices(self, vs: Iterable[str]) -> list[int]:
        return [self.index(v) for v in vs]

    def __getitem__(self, pair) -> float:
        v, w = pair
        return float(self.values[self.index(v), self.index(w)])

    def block(self, rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
        return self.values[np.ix_(self.indices(rows), self.indices(cols))]

    def reorder(self, labels: Sequence[str]) -> "CovMatrix":
        if set(labels) != set(self.labels) or len(labels) != len(self.labels):
            raise LabelMismatch("reorder labels must be a permutation of the current labels")
        idx = self.indices(labels)
        return CovMatrix(labels, self.values[np.ix_(idx, idx)])

    def pd_check(self, rtol: float = PD_RTOL) -> tuple[bool, float]:
        return pd_margin(self.values, rtol)

    def require_pd(self, rtol: float = PD_RTOL) -> None:
        ok, margin = self.pd_check(rtol)
        if not ok:
            raise NotPositiveDefinite(f"covariance is not positive definite (pivot ratio {margin:.3g})")

    def matches(self, g: Admg) -> None:
        if set(self.labels) != set(g.vertices):
            missing = sorted(set(g.vertices) - set(self.labels))
            extra = sorted(set(self.labels) - set(g.vertices))
            raise LabelMismatch(f"covariance labels differ from graph: missing {missing}, extra {extra}")


@dataclass(frozen=True)
class SemParameters:
    """Edge coefficients and error covariances for an :class:`Admg`.

    ``lam`` maps each directed edge ``(tail, head)`` to its coefficient.
    ``omega`` maps each vertex to its error variance and each bidirected edge
    (canonical pair) to its error covariance.
    """

    graph: Admg
    lam: Mapping[tuple[str, str], float]
    omega: Mapping

    def __post_init__(self):
        g = self.graph
        lam = {tuple(k): float(v) for k, v in self.lam.items()}
        if set(lam) != set(g.directed):
            missing = sorted(set(g.directed) - set(lam))
            extra = sorted(set(lam) - set(g.directed))
            raise ValidationError(f"lambda keys must equal the directed edges (missing {missing}, extra {extra})")
        omega = {}
        for k, v in self.omega.items():
            key = k if isinstance(k, str) else canonical_pair(*k)
            omega[key] = float(v)
        diag = {k for k in omega if isinstance(k, str)}
        off = {k for k in omega if not isinstance(k, str)}
        if diag != set(g.vertices):
            raise ValidationError(f"omega needs a variance for every vertex (missing {sorted(set(g.vertices) - diag)})")
        if off != set(g.bidirected):
            raise ValidationError("omega off-diagonal keys must equal the bidirected edges")
        bad = [k for k in diag if not omega[k] > 0]
        if bad:
            raise ValidationError(f"error variances must be positive: {sorted(bad)}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "omega", omega)
        ok, margin = pd_margin(self.omega_matrix())
        if not ok:
            raise NotPositiveDefinite(f"error covariance Omega is not positive definite (pivot ratio {margin:.3g})")

    def lambda_matrix(self, order: Sequence[str] | None = None) -> np.ndarray:
        order = list(order or self.graph.vertices)
        idx = {v: i for i, v in enumerate(order)}
        m = np.zeros((len(order), len(order)))
        for (t, h), x in self.lam.items():
            m[idx[t], idx[h]] = x
        return m

    def omega_matrix(self, order: Sequence[str] | None = None) -> np.ndarray:
        order = list(order or self.graph.vertices)
        idx = {v: i for i, v in enumerate(order)}
        m = np.zeros((len(order), len(order)))
        for k, x in self.omega.items():
            if isinstance(k, str):
                m[idx[k], idx[k]] = x
            else:
                i, j = idx[k[0]], idx[k[1]]
                m[i, j] = m[j, i] = x
        return m

    def replace(self, graph: Admg | None = None, lam=None, omega=None) -> "SemParameters":
        return SemParameters(graph or self.graph, lam if lam is not None else self.lam,
                             omega if omega is not None else self.omega)

    def without_directed(self, tail: str, head: str) -> "SemParameters":
        lam = {k: v for k, v in self.lam.items() if k != (tail, head)}
        return SemParameters(self.graph.without_directed(tail, head), lam, self.omega)

    def with_directed(self, tail: str, head: str, value: float) -> "SemParameters":
        lam = dict(self.lam)
        lam[(tail, head)] = value
        return SemParameters(self.graph.with_directed(tail, head), lam, self.omega)

    def without_bidirected(self, u: str, v: str) -> "SemParameters":
        key = canonical_pair(u, v)
        omega = {k: x for k, x in self.omega.items() if k != key}
        return SemParameters(self.graph.without_bidirected(u, v), self.lam, omega)


def covariance_from_params(p: SemParameters) -> CovMatrix:
    """``Σ = (I - Λ)^{-T} Ω (I - Λ)^{-1}``, labelled in the graph's vertex order."""
    order = p.graph.topological_order()
    lam = p.lambda_matrix(order)
    omega = p.omega_matrix(order)
    n = len(order)
    # I - Λ is unit upper triangular in topological order.
    inv = np.linalg.solve(np.eye(n) - lam, np.eye(n)) if n else np.zeros((0, 0))
    sigma = inv.T @ omega @ inv
    cov = CovMatrix(order, sigma).reorder(list(p.graph.vertices))
    cov.require_pd()
    return cov


@dataclass(frozen=True)
class PathSum:
    """Sum over directed paths ``b -> ... -> c`` of the coefficient products."""

    source: str
    target: str
    value: float


def path_sums_from(p: SemParameters, b: str) -> dict[str, float]:
    """Path sums from ``b`` to every vertex, by dynamic programming in topological order."""
    g = p.graph
    if b not in g:
        raise UnknownVertex([b])
    out = {v: 0.0 for v in g.vertices}
    out[b] = 1.0
    order = g.topological_order()
    start = order.index(b)
    for v in order[start + 1:]:
        out[v] = sum(out[t] * p.lam[(t, v)] for t in g.parents(v))
    return out


def path_sum(p: SemParameters, b: str, c: str) -> PathSum:
    if c not in p.graph:
        raise UnknownVertex([c])
    return PathSum(b, c, path_sums_from(p, b)[c])


def path_sum_matrix(p: SemParameters, order: Sequence[str] | None = None) -> np.ndarray:
    """Matrix of all path sums, ``(I - Λ)^{-1}``, via the DP (not a matrix inverse)."""
    order = list(order or p.graph.vertices)
    return np.array([[path_sums_from(p, b)[c] for c in order] for b in order])


def _as_list(cond) -> list[str]:
    if cond is None:
        return []
    if isinstance(cond, str):
        return [cond]
    return list(cond)


def conditional_cov(s: CovMatrix, v: str, w: str, cond: Iterable[str] = ()) -> float:
    """Schur complement ``σ_vw - Σ_vS Σ_SS^{-1} Σ_Sw``."""
    cond = sorted(set(_as_list(cond)), key=s.index)
    if v in cond or w in cond:
        raise ValidationError(f"conditioning set must not contain {v!r} or {w!r}")
    iv, iw = s.index(v), s.index(w)
    if not cond:
        return float(s.values[iv, iw])
    idx = s.indices(cond)
    block = s.values[np.ix_(idx, idx)]
    ok, margin = pd_margin(block)
    if not ok:
        raise SingularConditioningBlock(
            f"conditioning block on {cond} is not positive definite (pivot ratio {margin:.3g})"
        )
    sol = np.linalg.solve(block, s.values[idx, iw])
    return float(s.values[iv, iw] - s.values[iv, idx] @ sol)


def regression_coef(s: CovMatrix, v: str, w: str, cond: Iterable[str] = ()) -> float:
    """``β_vw·S = σ_vw·S / σ_vv·S``: the coefficient of ``X_v`` when regressing ``X_w`` on ``X_v, X_S``."""
    cond = _as_list(cond)
    return conditional_cov(s, v, w, cond) / conditional_cov(s, v, v, cond)


@dataclass(frozen=True)
class Dataset:
    """An ``n x |V|`` sample matrix with labelled columns."""

    labels: tuple
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValidationError("dataset rows must be a 2-D array")
        labels = tuple(str(v) for v in self.labels)
        if rows.shape[1] != len(labels):
            raise ValidationError(f"dataset has {rows.shape[1]} columns but {len(labels)} labels")
        if rows.shape[0] < 1:
            raise TooFewRows("dataset needs at least one row")
        rows.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def column(self, v: str) -> np.ndarray:
        try:
            return self.rows[:, self.labels.index(v)]
        except ValueError:
            raise UnknownVertex([v]) from None

    def reorder(self, labels: Sequence[str]) -> "Dataset":
        if set(labels) != set(self.labels) or len(labels) != len(self.labels):
            missing = sorted(set(labels) - set(self.labels))
            extra = sorted(set(self.labels) - set(labels))
            raise LabelMismatch(f"dataset columns differ: missing {missing}, extra {extra}")
        idx = [self.labels.index(v) for v in labels]
        return Dataset(tuple(labels), self.rows[:, idx])


def simulate(s: CovMatrix, n: int, seed: int) -> Dataset:
    """Draw ``n`` i.i.d. zero-mean Gaussian rows with covariance ``s``."""
    if n < 1:
        raise TooFewRows("n must be at least 1")
    s.require_pd()
    chol = np.linalg.cholesky(s.values)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, len(s.labels)))
    return Dataset(s.labels, z @ chol.T)


def sample_cov(d: Dataset, centered: bool = True) -> CovMatrix:
    """Sample covariance; mean-centred with ``1/(n-1)`` by default, else ``X^T X / n``."""
    if d.n < 2:
        raise TooFewRows("sample covariance needs at least two rows")
    x = d.rows
    if centered:
        x = x - x.mean(axis=0)
        return CovMatrix(d.labels, x.T @ x / (d.n - 1))
    return CovMatrix(d.labels, x.T @ x / d.n)


@dataclass(frozen=True)
class Standardization:
    """Column means and standard deviations, so the scaling can be undone."""

    labels: tuple
    mean: np.ndarray
    scale: np.ndarray

    def apply(self, d: Dataset) -> Dataset:
        d = d.reorder(self.labels)
        return Dataset(d.labels, (d.rows - self.mean) / self.scale)

    def invert(self, d: Dataset) -> Dataset:
        d = d.reorder(self.labels)
        return Dataset(d.labels, d.rows * self.scale + self.mean)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "mean": [float(x) for x in self.mean],
            "scale": [float(x) for x in self.scale],
        }


def standardize(d: Dataset) -> tuple[Dataset, Standardization]:
    """Centre each column and scale it to unit sample variance."""
    if d.n < 2:
        raise TooFewRows("standardization needs at least two rows")
    mean = d.rows.mean(axis=0)
    scale = d.rows.std(axis=0, ddof=1)
    scale = np.where(scale > 0, scale, 1.0)
    st = Standardization(d.labels, mean, scale)
    return st.apply(d), st

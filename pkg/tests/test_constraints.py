import numpy as np
import pytest

from edgesem import catalog
from edgesem.constraints import (
    BIDIRECTED,
    ConstraintSet,
    RemovalPlan,
    RemovalStep,
    derive_constraints,
    eval_gadget,
    eval_verma,
    gadget_terms,
    plan_removals,
    replay,
    residual_of_plan,
    trek_free_pairs,
    validate_plan,
    verma_terms,
)
from edgesem.errors import LabelMismatch, NoPlanFound, PlanInvalid, WrongDimension
from edgesem.graph import Admg
from edgesem.identify import check_remove_directed
from edgesem.random_models import random_admg, random_parameters
from edgesem.sem import CovMatrix, conditional_cov, covariance_from_params
from edgesem.treks import count_treks


def draws(g, seed, k):
    rng = np.random.default_rng(seed)
    for _ in range(k):
        p = random_parameters(rng, g)
        yield p, covariance_from_params(p)


def generic_cov(labels, rng):
    x = rng.standard_normal((len(labels) + 3, len(labels)))
    return CovMatrix(labels, x.T @ x)


def test_verma_plan_and_pair():
    g = catalog.verma()
    plan = plan_removals(g)
    assert plan.edges() == ["3->4", "2->3", "1->3", "1->2"]
    assert plan.terminal_graph.directed == frozenset()
    cs = derive_constraints(g, plan)
    assert cs.pairs == (("1", "4"),)
    # The other trek-free pairs are zero on any Σ once their edges are gone.
    assert set(cs.trivial_pairs) == {("1", "2"), ("1", "3"), ("2", "3"), ("3", "4")}


def test_gadget_has_one_pair():
    g = catalog.gadget()
    cs = derive_constraints(g, plan_removals(g))
    assert len(cs.pairs) == 1


def test_complete_dag_has_no_constraints():
    g = Admg("1234", [(a, b) for a in "1234" for b in "1234" if a < b])
    cs = derive_constraints(g, plan_removals(g))
    assert cs.pairs == ()


def test_double_verma_starts_with_edge_out_of_zero():
    plan = plan_removals(catalog.double_verma())
    assert plan.edges()[0] == "0->1"


def test_verma_residual_and_polynomial_vanish_on_model():
    g = catalog.verma()
    cs = derive_constraints(g, plan_removals(g))
    for _, s in draws(g, 0, 50):
        (r,) = residual_of_plan(s, cs)
        assert r.relative < 1e-8
        scale = max(abs(t) for t in verma_terms(s))
        assert abs(eval_verma(s)) < 1e-8 * scale


def test_verma_residual_times_denominators_is_minus_polynomial():
    # σ*_14 = σ14 - σ13 σ34·12 / σ33·12; clearing σ33·12 and the 2x2 determinant gives -f.
    g = catalog.verma()
    cs = derive_constraints(g, plan_removals(g))
    rng = np.random.default_rng(1)
    for _ in range(50):
        s = generic_cov("1234", rng)
        m = s.values
        den = conditional_cov(s, "3", "3", ["1", "2"]) * (m[0, 0] * m[1, 1] - m[0, 1] ** 2)
        (r,) = cs.residuals(s)
        assert r.value * den == pytest.approx(-eval_verma(s), rel=1e-8)


def test_gadget_polynomial_vanishes_on_model():
    g = catalog.gadget()
    cs = derive_constraints(g, plan_removals(g))
    for _, s in draws(g, 2, 50):
        terms = gadget_terms(s)
        assert abs(sum(terms)) < 1e-8 * max(abs(t) for t in terms)
        assert all(r.relative < 1e-8 for r in cs.residuals(s))
    assert abs(eval_gadget(generic_cov("1234", rng=np.random.default_rng(3)))) > 1e-3


def test_residuals_sound_on_random_graphs():
    rng = np.random.default_rng(4)
    checked = 0
    for _ in range(60):
        g = random_admg(rng, int(rng.integers(4, 7)), 0.4, 0.25)
        try:
            plan = plan_removals(g)
        except NoPlanFound:
            continue
        cs = derive_constraints(g, plan)
        for p in cs.pairs:
            assert count_treks(plan.terminal_graph, *p) == 0
        for _ in range(5):
            s = covariance_from_params(random_parameters(rng, g))
            assert all(r.relative < 1e-8 for r in cs.residuals(s))
            checked += len(cs.pairs)
    assert checked > 0


def test_residual_detects_extra_edge():
    # Data from Verma plus 1->4 should violate the Verma constraint.
    g = catalog.verma()
    cs = derive_constraints(g, plan_removals(g))
    big = g.with_directed("1", "4")
    rels = [cs.residuals(s)[0].relative for _, s in draws(big, 5, 200)]
    assert np.mean(np.array(rels) > 1e-4) >= 0.95


def test_replay_is_deterministic():
    g = catalog.verma()
    cs = derive_constraints(g, plan_removals(g))
    s = next(draws(g, 6, 1))[1]
    a = [r.value for r in cs.residuals(s)]
    b = [r.value for r in cs.residuals(CovMatrix(s.labels, s.values.copy()))]
    assert a == b
    covs = replay(s, g, cs.plan)
    assert len(covs) == 5 and covs[0] is s


def test_no_plan_found_carries_prefix():
    g = catalog.instrumental_variable()
    with pytest.raises(NoPlanFound):
        plan_removals(g)
    with pytest.raises(ValueError):
        plan_removals(catalog.verma(), "everything")


def test_validate_plan_rejects_bad_steps():
    g = catalog.verma()
    plan = plan_removals(g)
    graphs = validate_plan(g, plan)
    assert graphs[0] == g and graphs[-1] == plan.terminal_graph
    # Removing 1->2 first is not identifiable.
    rep = check_remove_directed(g, "1", "2")
    bad = RemovalPlan((RemovalStep("directed", ("1", "2"), rep),) + plan.steps[1:], plan.terminal_graph, plan.target)
    with pytest.raises(PlanInvalid):
        validate_plan(g, bad)
    missing = RemovalPlan((RemovalStep(BIDIRECTED, ("1", "3"), rep),), plan.terminal_graph, plan.target)
    with pytest.raises(PlanInvalid, match="not present"):
        validate_plan(g, missing)


def test_trek_free_pairs():
    assert trek_free_pairs(Admg("123", [("1", "2")])) == [("1", "3"), ("2", "3")]
    assert trek_free_pairs(Admg("123", [], [("1", "2")])) == [("1", "3"), ("2", "3")]
    assert trek_free_pairs(Admg("123", [("1", "3"), ("2", "3")])) == [("1", "2")]


def test_all_edges_target_on_triangle():
    g = catalog.bidirected_triangle()
    plan = plan_removals(g, "all-edges")
    assert plan.terminal_graph.bidirected == frozenset()
    assert derive_constraints(g, plan).pairs == ()


def test_errors_and_serialization():
    g = catalog.verma()
    cs = derive_constraints(g, plan_removals(g))
    with pytest.raises(LabelMismatch):
        residual_of_plan(CovMatrix("abcd", np.eye(4)), cs)
    with pytest.raises(WrongDimension):
        eval_verma(CovMatrix("123", np.eye(3)))
    doc = cs.to_dict()
    assert doc["pairs"] == [["1", "4"]]
    assert doc["plan"]["steps"][0] == {"edge": "3->4", "kind": "directed"}
    assert isinstance(cs, ConstraintSet)

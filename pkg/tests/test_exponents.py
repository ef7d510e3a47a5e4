import math

import networkx as nx
import numpy as np
import pytest

from cycletime import exponents as X
from cycletime import structure as S
from cycletime.errors import ModelError, UnsupportedLawError
from cycletime.law import Deterministic, example1_law
from cycletime.tropical import identity
from helpers import NEG, fixture, random_matrix, random_row_finite_matrix


def _brute_cycle_mean(a):
    d = a.shape[0]
    g = nx.DiGraph()
    g.add_nodes_from(range(d))
    g.add_edges_from((i, j) for i in range(d) for j in range(d) if np.isfinite(a[i, j]))
    best = NEG
    for cyc in nx.simple_cycles(g):
        w = sum(a[cyc[k], cyc[(k + 1) % len(cyc)]] for k in range(len(cyc)))
        best = max(best, w / len(cyc))
    return best


@pytest.mark.parametrize("a,want", [
    ([[1, NEG], [NEG, 0]], 1.0),
    ([[0, 3], [1, NEG]], 2.0),
    ([[NEG, 1], [NEG, NEG]], NEG),
])
def test_karp_examples(a, want):
    assert X.karp_max_cycle_mean(a) == want


def test_karp_identity():
    assert X.karp_max_cycle_mean(identity(4)) == 0.0


def test_karp_against_cycle_enumeration():
    rng = np.random.default_rng(21)
    for _ in range(150):
        d = int(rng.integers(1, 7))
        a = random_matrix(rng, d, p_bottom=0.5)
        assert X.karp_max_cycle_mean(a) == pytest.approx(_brute_cycle_mean(a), abs=1e-12)


def test_estimate_json():
    e = X.ExponentEstimate(0.5, "mc", 0.01, 100, 10)
    assert e.to_json() == {"value": 0.5, "mode": "mc", "stderr": 0.01, "n": 100, "trials": 10}
    assert e.ci95 == pytest.approx(0.0196)
    assert X.ExponentEstimate.exact(NEG).to_json() == {"value": "-inf", "mode": "exact"}


def test_deterministic_agreement():
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = random_row_finite_matrix(rng, int(rng.integers(1, 6)))
        law = Deterministic(a)
        n = 2000
        est = X.estimate_top_exponent(law, n)
        bound = 2 / n * np.abs(a[np.isfinite(a)]).max() + 1e-9
        assert est.trials == 1
        assert abs(est.value - X.karp_max_cycle_mean(a)) <= bound
        assert X.top_exponent(law).mode == "exact"


def test_seed_required_for_random_laws():
    with pytest.raises(ValueError):
        X.estimate_top_exponent(fixture("example2.json"), 10, 2)


def test_example2_component_exponents():
    law = fixture("example2.json")
    cond = S.condense(S.build_support_graph(law))
    est = X.component_exponents(law, cond, 10**4, 200, seed=1)
    assert est[0].mode == "exact" and est[0].value == 0.0
    assert est[1].mode == "mc" and abs(est[1].value - 0.5) <= 0.02


def test_trivial_components_are_bottom():
    law = Deterministic([[NEG, 0, NEG], [NEG, NEG, 0], [NEG, NEG, NEG]])
    est = X.component_exponents(law, S.condense(S.build_support_graph(law)))
    assert all(e.value == NEG and e.mode == "exact" for e in est.values())


def test_figure1_exact_exponents():
    law = fixture("figure1.json")
    est = X.component_exponents(law, S.condense(S.build_support_graph(law)))
    assert [est[c].value for c in range(6)] == [4, 1, NEG, 2, 3, 0]
    assert all(e.mode == "exact" for e in est.values())


def test_example1_top_and_bottom():
    law = example1_law(0.3, 0.2)
    top = X.estimate_top_exponent(law, 10**4, 200, seed=3)
    bot = X.estimate_bottom_exponent(law, 10**4, 200, seed=3)
    assert abs(top.value - 0.3) <= 0.01
    assert abs(bot.value - 0.2) <= 0.01
    assert bot.value <= top.value


def test_bottom_below_top_on_random_laws():
    rng = np.random.default_rng(6)
    from helpers import random_iid
    for k in range(5):
        law = random_iid(rng, 3, 2)
        assert (X.estimate_bottom_exponent(law, 500, 20, seed=k).value
                <= X.estimate_top_exponent(law, 500, 20, seed=k).value)


def test_bottom_needs_row_condition():
    with pytest.raises(ModelError, match="row 2"):
        X.estimate_bottom_exponent(Deterministic([[0, 0], [NEG, NEG]]), 10)


def test_dead_product_is_bottom():
    law = Deterministic([[NEG, 0], [NEG, NEG]])
    assert X.estimate_top_exponent(law, 5).value == NEG


def test_markov_exact_limits():
    lim = X.exact_markov_coordinate_limits(example1_law(0.3, 0.2))
    assert abs(lim.prob_gamma1 - 0.55) <= 1e-12 and abs(lim.prob_gamma2 - 0.45) <= 1e-12
    assert abs(lim.gamma1 - 0.3) <= 1e-12 and abs(lim.gamma2 - 0.2) <= 1e-12
    tie = X.exact_markov_coordinate_limits(example1_law(0.25, 0.25))
    assert list(tie.distribution.values()) == [pytest.approx(1.0, abs=1e-12)]
    with pytest.raises(UnsupportedLawError):
        X.exact_markov_coordinate_limits(fixture("example2.json"))


def test_shared_backward_chain_shapes():
    law = fixture("example2.json")
    full, sub = X.shared_backward_rowmax(law, [range(3), [1, 2]], 50, seed=2)
    assert full.shape == (50, 3) and sub.shape == (50, 2)
    assert np.all(full[:, 1:] >= sub)

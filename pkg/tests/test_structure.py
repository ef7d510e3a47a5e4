import itertools

import networkx as nx
import numpy as np
import pytest

from cycletime import structure as S
from cycletime import tropical as tp
from cycletime.errors import CapExceededError, ModelError, UnsupportedLawError
from cycletime.graph import reachability, strongly_connected_components
from cycletime.law import Atom, Deterministic, FiniteIID, example1_law, index_batch
from helpers import B, C, NEG, fixture, random_iid, random_matrix

P = [[0, 0, NEG], [NEG, 0, NEG], [NEG, NEG, 0]]
Q = [[0, NEG, NEG], [NEG, 0, 0], [NEG, NEG, 0]]


def _analysis(law, gammas=None, epsilon=S.DEFAULT_EPSILON):
    cond = S.condense(S.build_support_graph(law))
    if gammas is None:
        from cycletime.exponents import component_exponents
        gammas = component_exponents(law, cond)
    return S.scc_decompose(cond, gammas, epsilon)


def test_support_graph_examples():
    g = S.build_support_graph(fixture("example2.json"))
    assert g.arcs == {(0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (1, 2)}
    full = S.graph_from_matrix([[0, 1], [2, 3]])
    assert full.arcs == {(0, 0), (0, 1), (1, 0), (1, 1)}
    mix = S.build_support_graph(example1_law(0.3, 0.2))
    assert mix.arcs == {(0, 0), (1, 1), (0, 1), (1, 0)}
    assert len(S.condense(mix).components) == 1


def test_example2_components():
    law = fixture("example2.json")
    a = _analysis(law, {0: 0.0, 1: 0.5})
    c1, c2 = a.components
    assert c1.nodes == (0,) and not c1.trivial
    assert c2.nodes == (1, 2)
    assert a.condensation.arcs == {(1, 0)}
    assert a.H[1] == (1, 2) and a.dominating[1]
    assert a.E[1] == {0, 1} and a.F[1] == (0, 1, 2)


def test_figure1_class_sets():
    law = fixture("figure1.json")
    cond = S.condense(S.build_support_graph(law))
    assert [c.nodes for c in cond.components] == [(0, 1), (2,), (3,), (4, 5), (6,), (7, 8)]
    assert cond.arcs == {(0, 1), (1, 2), (2, 4), (1, 3), (3, 5), (4, 5)}
    a = S.scc_decompose(cond, {0: 4, 1: 1, 3: 2, 4: 3, 5: 0})
    assert a.gamma[2] == NEG and cond.components[2].trivial
    assert a.G[1] == {1, 2, 4}
    assert a.H[1] == (2, 3, 6)
    assert a.gamma_down == (4, 3, 3, 2, 3, 0)
    assert a.dominating == (True, False, False, True, True, True)


def test_single_node_without_loop():
    a = S.scc_decompose(S.graph_from_matrix([[NEG]]), {})
    assert a.components[0].trivial and a.gamma == (NEG,)
    assert a.E[0] == {0} and a.dominating == (True,)


def test_missing_exponent_is_an_error():
    with pytest.raises(ModelError):
        S.scc_decompose(S.build_support_graph(fixture("example2.json")), {0: 0.0})


def test_tie_tolerance():
    # c1 -> c2 with exponents closer than epsilon: tolerant G merges them
    g = S.graph_from_matrix([[0, 0], [NEG, 0]])

    class Est:
        def __init__(self, v):
            self.value, self.mode = v, "mc"

    a = S.scc_decompose(g, {0: Est(0.5004), 1: Est(0.5)})
    assert a.G[0] == {0, 1} and a.G_strict[0] == {0}
    assert a.tie_sensitive and not a.dominating[0]
    exact = S.scc_decompose(g, {0: 0.5004, 1: 0.5})
    assert exact.G[0] == {0} and not exact.tie_sensitive


def test_scc_properties_on_random_graphs():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(1, 8))
        a = random_matrix(rng, d, p_bottom=0.7)
        g = S.graph_from_matrix(a)
        ours = {frozenset(b) for b in strongly_connected_components(g.adjacency())}
        ref = nx.DiGraph()
        ref.add_nodes_from(range(d))
        ref.add_edges_from(g.arcs)
        assert ours == {frozenset(b) for b in nx.strongly_connected_components(ref)}
        cond = S.condense(g)
        assert sorted(v for c in cond.components for v in c.nodes) == list(range(d))
        dag = nx.DiGraph(list(cond.arcs))
        dag.add_nodes_from(range(len(cond.components)))
        assert nx.is_directed_acyclic_graph(dag)
        for c, r in enumerate(cond.reach):
            assert r == nx.descendants(dag, c) | {c}
            for k in r:
                assert cond.reach[k] <= r
                if k != c:
                    assert c not in cond.reach[k]
        gam = {c.id: float(rng.integers(-3, 4)) for c in cond.components if not c.trivial}
        an = S.scc_decompose(cond, gam)
        for c, r in enumerate(cond.reach):
            assert all(an.gamma_down[k] <= an.gamma_down[c] for k in r)


def test_reachability_helper():
    assert reachability([[1], [2], []]) == [{0, 1, 2}, {1, 2}, {2}]


def test_submatrix_law():
    law = fixture("example2.json")
    sub = S.submatrix_law(law, [1, 2])
    assert np.array_equal(sub.stack[0], [[NEG, NEG], [1, 1]])
    assert np.array_equal(sub.stack[1], [[NEG, 0], [0, NEG]])
    assert np.array_equal(S.submatrix_law(law, range(3)).stack, law.stack)
    with pytest.raises(ModelError):
        S.submatrix_law(law, [])
    fig = fixture("figure1.json")
    assert S.submatrix_law(fig, (2, 3, 6)).dimension == 3


# ---------------------------------------------------------------- semigroup


def test_closure_single_identity():
    sg = S.closure_of([tp.identity(3)])
    assert len(sg) == 1


def test_closure_example2():
    sg = S.semigroup_closure(fixture("example2.json"))
    assert len(sg) <= 64
    assert tp.pattern(B) in sg and tp.pattern(C) in sg
    assert tp.pattern(tp.mat_mul(B, C)) in sg


def test_closure_already_closed():
    z = np.full((2, 2), 0.0)
    sg = S.closure_of([z])
    assert len(sg) == 1 and sg.elements == sg.generators


def test_closure_idempotent():
    rng = np.random.default_rng(8)
    for _ in range(20):
        gens = [random_matrix(rng, 3, 0.5) for _ in range(2)]
        sg = S.closure_of(gens)
        again = S.closure_of(sg.matrices())
        assert set(again.elements) == set(sg.elements)


def test_closure_cap():
    gens = [tp.as_matrix([[NEG, 0, NEG], [NEG, NEG, 0], [0, NEG, NEG]]), tp.as_matrix(P)]
    with pytest.raises(CapExceededError):
        S.closure_of(gens, cap=2)


def test_closure_refuses_markov():
    with pytest.raises(UnsupportedLawError):
        S.semigroup_closure(example1_law(0.3, 0.2))


def test_sampled_products_lie_in_closure():
    rng = np.random.default_rng(12)
    for case in range(5):
        law = random_iid(rng, 3, 3)
        sg = S.semigroup_closure(law)
        seqs = index_batch(law, 10, case, 100)
        for seq in seqs:
            n = int(rng.integers(1, 11))
            prod = tp.product_range([law.stack[k] for k in seq[:n]]).reconstruct()
            assert prod in sg


def test_certificate_trivial():
    sg = S.closure_of([tp.as_matrix([[NEG, 0], [NEG, NEG]])])
    cert = S.block_reachability_certificate(sg, [0], [1])
    assert cert.found and cert.witness[0, 1] == 0


def test_certificate_needs_product():
    law = FiniteIID((Atom(P, 0.5, "P"), Atom(Q, 0.5, "Q")))
    sg = S.semigroup_closure(law)
    cert = S.block_reachability_certificate(sg, [0, 1], [2])
    assert cert.found
    assert np.isfinite(cert.witness[0, 2]) and np.isfinite(cert.witness[1, 2])
    # neither generator alone works
    for g in (P, Q):
        one = S.block_reachability_certificate(S.closure_of([tp.as_matrix(g)]), [0, 1], [2])
        assert not one.found


def test_certificate_example2_restricted():
    sub = S.submatrix_law(fixture("example2.json"), [1, 2])
    sg = S.semigroup_closure(sub)
    cert = S.block_reachability_certificate(sg, [0], [1])
    assert cert.found
    assert np.array_equal(cert.witness, tp.pattern(tp.submatrix(C, [1, 2])))


def test_certificate_refutation_and_errors():
    sg = S.closure_of([tp.identity(2)])
    assert not S.block_reachability_certificate(sg, [0], [1]).found
    with pytest.raises(ModelError):
        S.block_reachability_certificate(sg, [0], [0])
    with pytest.raises(ModelError):
        S.block_reachability_certificate(sg, [0], [5])

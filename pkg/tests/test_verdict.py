import numpy as np
import pytest

from cycletime import verdict as V
from cycletime.errors import CapExceededError, ModelError, UnsupportedLawError
from cycletime.exponents import ExponentEstimate, karp_max_cycle_mean
from cycletime.law import Deterministic, example1_law
from cycletime.scenarios import example2_law
from helpers import NEG, fixture


def test_row_condition_examples():
    law = fixture("example2.json")
    r = V.check_row_condition(law, [1, 2], component=1)
    assert not r.holds and r.witnesses == ((0, 1),)
    assert V.check_row_condition(law, [0]).holds
    assert V.check_row_condition(Deterministic([[1, 2], [3, 4]]), [0, 1]).holds
    with pytest.raises(ModelError):
        V.check_row_condition(law, [5])


def test_example2_does_not_converge():
    v = V.decide_cycle_time(fixture("example2.json"), 2000, 50, seed=1)
    assert v.converges is False and v.limit is None
    assert v.witnesses == [(0, 1)]
    assert v.rows[0].holds


def test_modified_example_converges():
    v = V.decide_cycle_time(fixture("example2-modified.json"), 2000, 50, seed=1)
    assert v.converges is True
    assert v.limit[0] == 0.0 and v.limit[1] == v.limit[2]
    assert abs(v.limit[1] - 0.5) <= 0.05
    assert v.provenance == ("exact", "mc", "mc")


def test_deterministic_converges_exactly():
    a = [[0, 3], [1, NEG]]
    v = V.decide_cycle_time(Deterministic(a))
    assert v.converges is True
    assert v.limit.tolist() == [2.0, 2.0] and set(v.provenance) == {"exact"}


def test_figure1_limit_is_monotone_along_arcs():
    law = fixture("figure1.json")
    v = V.decide_cycle_time(law)
    assert v.converges is True
    assert v.limit.tolist() == [4, 4, 3, 3, 2, 2, 3, 0, 0]
    a = law.stack[0]
    for i, j in zip(*np.nonzero(np.isfinite(a))):
        assert v.limit[i] >= v.limit[j]


def test_full_row_condition_is_required():
    with pytest.raises(ModelError, match="row 2"):
        V.decide_cycle_time(Deterministic([[0, 0], [NEG, NEG]]))


def test_markov_is_refused():
    with pytest.raises(UnsupportedLawError, match="simulate"):
        V.decide_cycle_time(example1_law(0.3, 0.2), seed=1)


def test_tie_gives_indeterminate():
    # with gamma(c2) within epsilon of gamma(c1), node 1 joins H[c2] and
    # rescues row 2 of B; the strict sets do not
    law = example2_law(0.5)
    cond_gam = {0: ExponentEstimate(0.0, "exact"), 1: ExponentEstimate(0.0005, "mc", 1e-4, 10, 10)}
    v = V.decide_cycle_time(law, exponents=cond_gam)
    assert v.converges == V.INDETERMINATE and v.tie_sensitive
    far = {0: ExponentEstimate(0.0, "exact"), 1: ExponentEstimate(0.5, "mc", 1e-4, 10, 10)}
    assert V.decide_cycle_time(law, exponents=far).converges is False


def test_limit_distribution_deterministic_point_mass():
    law = Deterministic([[0, 3], [1, NEG]])
    dist = V.simulate_limit_distribution(law, 1000, 5, seed=0, coordinate=0)
    assert len(dist.clusters) == 1 and dist.clusters[0].mass == 1.0
    assert abs(dist.clusters[0].center - karp_max_cycle_mean(law.matrix)) <= 0.01


def test_limit_distribution_modified_example_is_concentrated():
    law = fixture("example2-modified.json")
    dist = V.simulate_limit_distribution(law, 10**4, 20, seed=5, coordinate=2)
    assert np.all(np.abs(dist.values - 0.5) <= 0.02)


def test_cluster_values_handles_bottom():
    cl = V.cluster_values(np.array([NEG, 0.1, 0.12, 0.5]), 0.05)
    assert [c.count for c in cl] == [1, 2, 1]
    assert cl[0].center == NEG


def test_trajectory_and_oscillation():
    law = fixture("example2.json")
    seq, x = V.trajectory(law, 1000, seed=3)
    assert x.shape == (1001, 3) and np.all(x[:, 0] == 0)
    tr = V.track_oscillation(law, 1000, seed=3, coordinate=0)
    assert all(v == 0 for _, v in tr.checkpoints)
    assert [k for k, _ in tr.checkpoints][-2:] == [512, 1000]


def test_oscillation_deterministic_transient():
    a = np.array([[0, 3], [1, NEG]])
    n = 1000
    tr = V.track_oscillation(Deterministic(a), n, seed=0, coordinate=1)
    assert tr.window_max - tr.window_min <= 2 * 3 * 10 / n


def test_checkpoint_series_matches_finals():
    law = fixture("example1.json")
    marks, vals = V.checkpoint_series(law, 300, 4, seed=2)
    x = V.forward_finals(law, 300, 4, 2)
    assert marks[-1] == 300 and np.allclose(vals[:, -1] * 300, x)


def test_exact_small_n():
    law = example2_law(0.3)
    assert V.exact_small_n_distribution(law, 0, 2) == {0.0: 1.0}
    assert V.exact_small_n_distribution(law, 3, 0) == {0.0: pytest.approx(1.0)}
    dist = V.exact_small_n_distribution(law, 2, 2)
    p = 0.3
    # BB -> 2, CB -> 1, BC and CC -> 0
    assert dist == {0.0: pytest.approx(1 - p), 1.0: pytest.approx(p * (1 - p)), 2.0: pytest.approx(p * p)}
    with pytest.raises(CapExceededError):
        V.exact_small_n_distribution(law, 30, 0)


def test_max_coordinate_counts_b():
    law = example2_law(0.5)
    seq, x = V.trajectory(law, 5000, seed=11)
    assert np.array_equal(x.max(axis=1), np.concatenate([[0], np.cumsum(seq == 0)]))


def test_total_variation():
    assert V.total_variation({0.0: 1.0}, {0.0: 0.5, 1.0: 0.5}) == 0.5
    assert V.empirical_distribution([1, 1, 2, 2]) == {1.0: 0.5, 2.0: 0.5}

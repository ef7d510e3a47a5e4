"""Reproduction scenarios for the two counterexamples.

``example1``: a strongly mixing Markov-modulated sequence whose graph is
strongly connected, yet y(n, 0) / n has a random limit.
``example2``: an i.i.d. sequence without cycle time; x_3(n, 0) / n keeps
oscillating between 0 and p.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exponents, structure, verdict
from .errors import ModelError, UnsupportedLawError
from .law import Atom, FiniteIID, example1_law, stationary_analysis

EXAMPLE2_B = [[0, "-inf", "-inf"], [0, "-inf", "-inf"], [0, 1, 1]]
EXAMPLE2_C = [[0, "-inf", "-inf"], [0, "-inf", 0], [0, 0, "-inf"]]

LIMIT_MASS_TOL = 0.03
RADIUS = 0.05


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


def example2_law(p: float = 0.5) -> FiniteIID:
    if not 0 < p < 1:
        raise ModelError(f"need 0 < p < 1, got {p}")
    return FiniteIID((Atom(EXAMPLE2_B, p, "B"), Atom(EXAMPLE2_C, 1 - p, "C")))


def reproduce_example1(gamma1: float = 0.3, gamma2: float = 0.2, *, seed: int,
                       n: int = 10_000, trials: int = 2_000) -> list[Check]:
    law = example1_law(gamma1, gamma2)
    delta = (1 - gamma1 - gamma2) / 2
    checks = []

    rep = stationary_analysis(law)
    want = np.array([gamma1, delta, gamma2, delta])
    err = float(np.abs(rep.pi - want).max())
    checks.append(Check("stationary distribution (gamma1, delta, gamma2, delta)", err <= 1e-12,
                        {"pi": rep.as_dict(), "maxError": err}))

    rev = law.reversed_transition()
    rev_err = max(float(np.abs(rev.sum(axis=1) - 1).max()), float(np.abs(rep.pi @ rev - rep.pi).max()))
    checks.append(Check("reversed kernel is stochastic with the same stationary law",
                        rev_err <= 1e-10, {"maxError": rev_err}))

    g = structure.build_support_graph(law)
    sc = len(structure.condense(g).components) == 1
    checks.append(Check("support graph strongly connected", sc, {}))

    exact = exponents.exact_markov_coordinate_limits(law)
    exact_err = max(abs(exact.prob_gamma1 - (gamma1 + delta)), abs(exact.prob_gamma2 - (gamma2 + delta)),
                    abs(exact.gamma1 - gamma1), abs(exact.gamma2 - gamma2))
    checks.append(Check("exact limit law P(gamma1) = gamma1 + delta, P(gamma2) = gamma2 + delta",
                        exact_err <= 1e-12,
                        {"probGamma1": exact.prob_gamma1, "probGamma2": exact.prob_gamma2,
                         "expectedReward": exact.gamma1, "maxError": exact_err}))

    dist = verdict.simulate_limit_distribution(law, n, trials, seed, 0, RADIUS)
    if abs(gamma1 - gamma2) > 2 * RADIUS:
        m1, m2 = dist.mass_near(gamma1), dist.mass_near(gamma2)
        ok = abs(m1 - (gamma1 + delta)) <= LIMIT_MASS_TOL and abs(m2 - (gamma2 + delta)) <= LIMIT_MASS_TOL
        detail = {"massNearGamma1": m1, "massNearGamma2": m2,
                  "expected": [gamma1 + delta, gamma2 + delta]}
    else:
        both = float(np.mean(np.minimum(np.abs(dist.values - gamma1), np.abs(dist.values - gamma2)) <= RADIUS))
        ok = both >= 1 - LIMIT_MASS_TOL
        detail = {"massNearEither": both}
    detail.update(n=n, trials=trials, seed=seed, tolerance=LIMIT_MASS_TOL)
    checks.append(Check("Monte Carlo limit law of y_1(n)/n", ok, detail))

    try:
        verdict.decide_cycle_time(law, seed=seed)
        refused = False
    except UnsupportedLawError:
        refused = True
    checks.append(Check("i.i.d. criterion refuses the Markov law", refused, {}))
    return checks


def reproduce_example2(p: float = 0.5, *, seed: int, n: int = 100_000,
                       est_steps: int = 10_000, est_trials: int = 200,
                       small_n: int = 8, small_trials: int = 10_000) -> list[Check]:
    law = example2_law(p)
    checks = []

    seq, x = verdict.trajectory(law, n, seed)
    count_b = np.concatenate([[0], np.cumsum(seq == 0)])
    first_zero = bool((x[:, 0] == 0).all())
    max_is_count = bool((x.max(axis=1) == count_b).all())
    checks.append(Check("x_1(n, 0) = 0 for every n", first_zero, {"n": n}))
    checks.append(Check("max_i x_i(n + 1, 0) = #{k <= n : A(k) = B}", max_is_count, {"n": n}))

    v = verdict.decide_cycle_time(law, est_steps, est_trials, seed)
    witness = [(law.labels[k], i + 1) for k, i in v.witnesses]
    checks.append(Check("no cycle time, witness (B, row 2)",
                        v.converges is False and ("B", 2) in witness,
                        {"converges": v.converges, "witnesses": witness}))

    g = v.analysis.gamma
    checks.append(Check("component exponents (0, p)",
                        g[0] == 0.0 and abs(g[1] - p) <= 0.02,
                        {"gamma": list(g), "tolerance": 0.02}))

    osc = verdict.track_oscillation(law, n, seed, 2)
    checks.append(Check("x_3(k, 0) / k oscillates between 0 and p",
                        osc.window_min <= 0.05 and osc.window_max >= p - 0.05,
                        {"window": list(osc.window), "min": osc.window_min, "max": osc.window_max}))

    sg = structure.semigroup_closure(law)
    checks.append(Check("pattern semigroup size <= 64", len(sg) <= 64, {"size": len(sg)}))

    worst = 0.0
    for steps in range(small_n + 1):
        for coord in range(law.dimension):
            exact = verdict.exact_small_n_distribution(law, steps, coord)
            mc = verdict.mc_small_n_distribution(law, steps, small_trials, seed, coord)
            worst = max(worst, verdict.total_variation(exact, mc))
    checks.append(Check("Monte Carlo vs exact small-n laws (TV <= 0.02)", worst <= 0.02,
                        {"maxTotalVariation": worst, "n": small_n, "trials": small_trials}))
    return checks


SCENARIOS = {"example1": reproduce_example1, "example2": reproduce_example2}


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)

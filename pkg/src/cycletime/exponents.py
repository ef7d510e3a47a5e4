"""Top and bottom Lyapunov exponents of max-plus matrix laws.

Exact values come from the maximum cycle mean when a (sub)law is
deterministic, and from stationary rewards for the mixing counterexample
family.  Everything else is Monte Carlo over independent trials: each trial
runs ``x(n, 0)`` forward and records ``max_i x_i(n, 0) / n`` (or the min).
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ModelError, UnsupportedLawError
from .law import BACKWARD, FORWARD, Deterministic, MarkovModulated, MatrixLaw, index_batch, stationary_analysis
from .structure import SccAnalysis, Condensation, submatrix_law
from .tropical import BOTTOM, as_matrix, value_to_json

DEFAULT_STEPS = 10_000
DEFAULT_TRIALS = 1_000
# trials per kernel call when per-step history is kept
CHUNK = 128
# without history only the (chunk, n) index array scales; cap it at 64 MB
INDEX_BUDGET = 1 << 23


def karp_max_cycle_mean(a) -> float:
    """Maximum mean weight over the circuits of the graph of finite entries.

    Karp's recurrence with a virtual source attached to every node, so the
    graph need not be strongly connected.  Bottom if there is no circuit.
    """
    a = as_matrix(a, square=True)
    d = a.shape[0]
    walks = np.empty((d + 1, d))
    walks[0] = 0.0
    for k in range(1, d + 1):
        # walks[k][v]: heaviest walk with k arcs ending at v
        walks[k] = np.max(walks[k - 1][:, None] + a, axis=0)
    best = BOTTOM
    for v in range(d):
        if walks[d, v] == BOTTOM:
            continue
        ratios = [
            (walks[d, v] - walks[k, v]) / (d - k)
            for k in range(d)
            if walks[k, v] != BOTTOM
        ]
        best = max(best, min(ratios))
    return float(best)


@dataclass(frozen=True)
class ExponentEstimate:
    value: float
    mode: str  # "exact" | "mc"
    stderr: float | None = None
    n: int | None = None
    trials: int | None = None

    @property
    def ci95(self) -> float | None:
        return None if self.stderr is None else 1.96 * self.stderr

    def to_json(self) -> dict:
        out = {"value": value_to_json(self.value), "mode": self.mode}
        if self.mode == "mc":
            out.update(stderr=self.stderr, n=self.n, trials=self.trials)
        return out

    @classmethod
    def exact(cls, value: float) -> "ExponentEstimate":
        return cls(float(value), "exact")


def _require_seed(law: MatrixLaw, seed) -> int:
    if isinstance(law, Deterministic) or law.is_deterministic:
        return 0 if seed is None else int(seed)
    if seed is None:
        raise ValueError("a seed is required for stochastic laws")
    return int(seed)


def forward_finals(law: MatrixLaw, n: int, trials: int, seed: int,
                   x0: np.ndarray | None = None, direction: int = FORWARD) -> np.ndarray:
    """``(trials, d)`` array of ``x(n, x0)`` (or ``y(n, x0)`` for BACKWARD)."""
    d = law.dimension
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=np.float64)
    stack = law.stack
    out = np.empty((trials, d))
    chunk = max(CHUNK, INDEX_BUDGET // max(n, 1))
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        seqs = index_batch(law, n, seed, stop - start, direction, first_trial=start)
        if direction == BACKWARD:
            # y(n) = A(-1) ... A(-n) x0: A(-n) acts first
            seqs = seqs[:, ::-1]
        out[start:stop], _ = kernels.forward_vectors(stack, seqs, x0)
    return out


def _summarise(stats: np.ndarray, n: int) -> ExponentEstimate:
    trials = stats.shape[0]
    if (stats == BOTTOM).any():
        # a trial whose product died proves the exponent is -inf a.s.
        return ExponentEstimate(BOTTOM, "mc", 0.0, n, trials)
    per_step = stats / n
    stderr = float(per_step.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return ExponentEstimate(float(per_step.mean()), "mc", stderr, n, trials)


def estimate_top_exponent(law: MatrixLaw, n: int = DEFAULT_STEPS, trials: int = DEFAULT_TRIALS,
                          seed: int | None = None) -> ExponentEstimate:
    """Monte Carlo estimate of lim max_i x_i(n, 0) / n.

    Deterministic laws use a single trial.  Returns Bottom as soon as one
    trial ends with every coordinate at Bottom.
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    seed = _require_seed(law, seed)
    if law.is_deterministic:
        trials = 1
    finals = forward_finals(law, n, trials, seed)
    return _summarise(finals.max(axis=1), n)


def estimate_bottom_exponent(law: MatrixLaw, n: int = DEFAULT_STEPS, trials: int = DEFAULT_TRIALS,
                             seed: int | None = None) -> ExponentEstimate:
    """Monte Carlo estimate of lim min_i x_i(n, 0) / n."""
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    for label, m in zip(law.labels, law.stack):
        dead = np.flatnonzero(~np.isfinite(m).any(axis=1))
        if dead.size:
            raise ModelError(f"{label}: row {int(dead[0]) + 1} has no finite entry; "
                             "the bottom exponent is undefined")
    seed = _require_seed(law, seed)
    if law.is_deterministic:
        trials = 1
    finals = forward_finals(law, n, trials, seed)
    return _summarise(finals.min(axis=1), n)


def top_exponent(law: MatrixLaw, n: int = DEFAULT_STEPS, trials: int = DEFAULT_TRIALS,
                 seed: int | None = None) -> ExponentEstimate:
    """Exact (maximum cycle mean) for deterministic laws, Monte Carlo otherwise."""
    if law.is_deterministic:
        return ExponentEstimate.exact(karp_max_cycle_mean(law.stack[0]))
    return estimate_top_exponent(law, n, trials, seed)


def component_exponents(law: MatrixLaw, scc: SccAnalysis | Condensation,
                        n: int = DEFAULT_STEPS, trials: int = DEFAULT_TRIALS,
                        seed: int | None = None) -> dict[int, ExponentEstimate]:
    """Exponent of every component's restricted law.

    Trivial components are exactly Bottom.  A component on which all atoms
    coincide is deterministic there and gets the exact cycle mean.
    """
    cond = scc.condensation if isinstance(scc, SccAnalysis) else scc
    out = {}
    for comp in cond.components:
        if comp.trivial:
            out[comp.id] = ExponentEstimate.exact(BOTTOM)
        else:
            out[comp.id] = top_exponent(submatrix_law(law, comp.nodes), n, trials, seed)
    return out


def shared_backward_rowmax(law: MatrixLaw, node_sets: Sequence[Iterable[int]], n: int,
                           seed: int, trial: int = 0) -> list[np.ndarray]:
    """Backward products of several restrictions driven by one matrix sequence.

    For each node set S returns an ``(n, |S|)`` array whose row k - 1 is
    ``y^S(k, 0) = A^S(-1) ... A^S(-k) 0``.
    """
    seq = index_batch(law, n, seed, 1, BACKWARD, first_trial=trial)[0]
    out = []
    for nodes in node_sets:
        idx = sorted(set(nodes))
        stack = law.stack[:, idx][:, :, idx]
        _, _, hist = kernels.fold_products(stack, seq, True)
        out.append(hist)
    return out


@dataclass(frozen=True)
class MarkovLimitLaw:
    """Law of lim y_1(n, 0) / n for the mixing counterexample.

    ``gamma1`` and ``gamma2`` are the stationary expected rewards, computed
    from the chain rather than copied from the family parameters.
    """

    gamma1: float
    gamma2: float
    delta: float
    prob_gamma1: float
    prob_gamma2: float

    @property
    def distribution(self) -> dict[float, float]:
        if math.isclose(self.gamma1, self.gamma2, rel_tol=0.0, abs_tol=1e-12):
            return {self.gamma1: self.prob_gamma1 + self.prob_gamma2}
        return {self.gamma1: self.prob_gamma1, self.gamma2: self.prob_gamma2}


def _row_value(m: np.ndarray, row: int) -> float:
    finite = m[row][np.isfinite(m[row])]
    if finite.size != 1:
        raise UnsupportedLawError("each emitted row must carry exactly one finite entry")
    return float(finite[0])


def exact_markov_coordinate_limits(law: MatrixLaw) -> MarkovLimitLaw:
    """Exact limit law of the first coordinate of y(n, 0) / n.

    Coordinate ``i_{-1}`` of y accumulates g(A(-k), i_{-k}), the unique
    finite entry on row i of the emitted matrix, and the other coordinate
    the same functional along the swapped index.  Both limits are
    stationary expectations; coordinate 1 sees the first when i_{-1} = 1.
    """
    if not isinstance(law, MarkovModulated) or not law.family or law.family.get("name") != "example1":
        raise UnsupportedLawError("exact limits are only available for the example1 family")
    index = {s: int(s[1]) - 1 for s in law.states}
    emit = dict(zip(law.states, law.emissions))
    g = {s: _row_value(emit[s], index[s]) for s in law.states}
    g_swapped = {s: _row_value(emit[s], 1 - index[s]) for s in law.states}
    report = stationary_analysis(law, g)
    swapped = stationary_analysis(law, g_swapped)
    pi = report.as_dict()
    p1 = math.fsum(pi[s] for s in law.states if index[s] == 0)
    p2 = math.fsum(pi[s] for s in law.states if index[s] == 1)
    fam = law.family
    delta = (1.0 - fam["gamma1"] - fam["gamma2"]) / 2.0
    return MarkovLimitLaw(float(report.expected_reward), float(swapped.expected_reward), delta, p1, p2)

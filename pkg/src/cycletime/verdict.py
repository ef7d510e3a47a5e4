"""Existence of the cycle time for finitely supported i.i.d. laws.

The sequence x(n, 0) / n converges almost surely iff, for every s.c.c. c of
the support graph, every atom restricted to ``H[c]`` keeps a finite entry on
each row.  When it does, the limit at node i is the largest component
exponent reachable from i.

The module also hosts the simulation-side operations that make the
counterexamples visible: empirical limit laws, oscillation traces and an
exact small-n oracle.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels
from .errors import CapExceededError, ModelError, UnsupportedLawError
from .exponents import (CHUNK, DEFAULT_STEPS, DEFAULT_TRIALS, ExponentEstimate,
                        component_exponents, forward_finals)
from .law import BACKWARD, FORWARD, Deterministic, FiniteIID, MatrixLaw, index_batch
from .structure import (DEFAULT_EPSILON, SccAnalysis, build_support_graph, condense,
                        scc_decompose)
from .tropical import BOTTOM

INDETERMINATE = "indeterminate-tie"
DEFAULT_RADIUS = 0.05
SMALL_N_CAP = 10**6


@dataclass(frozen=True)
class RowConditionResult:
    component: int | None
    nodes: tuple[int, ...]
    witnesses: tuple[tuple[int, int], ...]  # (atom index, node)

    @property
    def holds(self) -> bool:
        return not self.witnesses


def check_row_condition(law: MatrixLaw, nodes, component: int | None = None) -> RowConditionResult:
    """Check every atom restricted to ``nodes`` for rows without finite entry.

    With finite support "almost surely" reduces to "for every atom", so the
    witnesses list every (atom, node) pair whose restricted row is all Bottom.
    """
    idx = tuple(sorted(set(int(v) for v in nodes)))
    if not idx or idx[0] < 0 or idx[-1] >= law.dimension:
        raise ModelError(f"nodes {list(idx)} are not a non-empty subset of 0..{law.dimension - 1}")
    sub = law.stack[:, idx][:, :, idx]
    alive = np.isfinite(sub).any(axis=2)
    witnesses = tuple((int(k), idx[int(r)]) for k, r in zip(*np.nonzero(~alive)))
    return RowConditionResult(component, idx, witnesses)


@dataclass(frozen=True)
class CycleTimeVerdict:
    converges: Union[bool, str]
    analysis: SccAnalysis
    rows: tuple[RowConditionResult, ...]
    limit: np.ndarray | None
    provenance: tuple[str, ...] | None
    atom_labels: tuple[str, ...]

    @property
    def tie_sensitive(self) -> bool:
        return self.analysis.tie_sensitive

    @property
    def witnesses(self) -> list[tuple[int, int]]:
        return [w for r in self.rows for w in r.witnesses]


def _as_iid(law: MatrixLaw) -> MatrixLaw:
    if isinstance(law, (Deterministic, FiniteIID)):
        return law
    raise UnsupportedLawError(
        "the cycle-time criterion is proved for i.i.d. laws only; "
        "use the simulate subcommand for Markov-modulated laws"
    )


def limit_vector(analysis: SccAnalysis) -> tuple[np.ndarray, tuple[str, ...]]:
    """Node i gets the largest exponent among components reachable from i."""
    cond = analysis.condensation
    limit = np.array([analysis.gamma_down[c] for c in cond.node_component])
    prov = tuple(
        "exact" if all(analysis.modes[k] == "exact" for k in cond.reach[c]) else "mc"
        for c in cond.node_component
    )
    limit.setflags(write=False)
    return limit, prov


def decide_cycle_time(law: MatrixLaw, n: int = DEFAULT_STEPS, trials: int = DEFAULT_TRIALS,
                      seed: int | None = None, epsilon: float = DEFAULT_EPSILON,
                      exponents: dict[int, ExponentEstimate] | None = None) -> CycleTimeVerdict:
    """Decide whether x(n, 0) / n converges, and to what.

    Pipeline: support graph, s.c.c.s, component exponents (exact where a
    component is deterministic, Monte Carlo otherwise), class sets, row
    conditions on every ``H[c]``.  If estimated exponents are within
    ``epsilon`` of each other the class sets are computed both ways; a
    verdict that flips between them is reported as ``"indeterminate-tie"``.
    """
    law = _as_iid(law)
    full = check_row_condition(law, range(law.dimension))
    if not full.holds:
        k, i = full.witnesses[0]
        raise ModelError(f"atom {law.labels[k]} has no finite entry on row {i + 1}; "
                         "the recursion leaves R^d")
    cond = condense(build_support_graph(law))
    if exponents is None:
        exponents = component_exponents(law, cond, n, trials, seed)
    analysis = scc_decompose(cond, exponents, epsilon)
    rows = tuple(check_row_condition(law, h, c) for c, h in enumerate(analysis.H))
    converges: Union[bool, str] = all(r.holds for r in rows)
    if analysis.tie_sensitive:
        strict = all(check_row_condition(law, h).holds for h in analysis.H_strict)
        if strict != converges:
            converges = INDETERMINATE
    limit = prov = None
    if converges is True:
        limit, prov = limit_vector(analysis)
    return CycleTimeVerdict(converges, analysis, rows, limit, prov, tuple(law.labels))


# ---------------------------------------------------------------- simulation


@dataclass(frozen=True)
class Cluster:
    center: float
    mass: float
    count: int


@dataclass(frozen=True)
class LimitDistribution:
    values: np.ndarray
    radius: float
    clusters: tuple[Cluster, ...]
    n: int
    direction: str

    def mass_near(self, target: float, radius: float | None = None) -> float:
        r = self.radius if radius is None else radius
        return float(np.mean(np.abs(self.values - target) <= r))


def cluster_values(values: np.ndarray, radius: float) -> tuple[Cluster, ...]:
    """Greedy 1-d clustering: a cluster spans at most ``radius`` from its smallest value."""
    vals = np.sort(values[np.isfinite(values)])
    total = values.shape[0]
    out = []
    start = 0
    while start < vals.shape[0]:
        stop = int(np.searchsorted(vals, vals[start] + radius, side="right"))
        chunk = vals[start:stop]
        out.append(Cluster(float(chunk.mean()), chunk.shape[0] / total, int(chunk.shape[0])))
        start = stop
    dead = total - vals.shape[0]
    if dead:
        out.insert(0, Cluster(BOTTOM, dead / total, dead))
    return tuple(out)


def simulate_limit_distribution(law: MatrixLaw, n: int, trials: int, seed: int, coordinate: int,
                                radius: float = DEFAULT_RADIUS,
                                direction: int = BACKWARD) -> LimitDistribution:
    """Empirical law of ``y_coordinate(n, 0) / n`` (or of x for FORWARD)."""
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    if not 0 <= coordinate < law.dimension:
        raise ModelError(f"coordinate {coordinate} outside 0..{law.dimension - 1}")
    finals = forward_finals(law, n, trials, seed, direction=direction)
    values = finals[:, coordinate] / n
    values.setflags(write=False)
    return LimitDistribution(values, radius, cluster_values(values, radius), n,
                             "backward" if direction == BACKWARD else "forward")


def trajectory(law: MatrixLaw, n: int, seed: int, trial: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Forward path of one trial: ``(indices, x)`` with ``x[k] = x(k, 0)``."""
    seq = index_batch(law, n, seed, 1, FORWARD, first_trial=trial)
    _, hist = kernels.forward_vectors(law.stack, seq, np.zeros(law.dimension), True)
    return seq[0], hist[0]


def checkpoint_marks(n: int) -> tuple[int, ...]:
    """Powers of two up to n, plus n itself."""
    if n < 1:
        raise ValueError("n must be >= 1")
    marks = [1 << p for p in range(n.bit_length()) if 1 << p <= n]
    if marks[-1] != n:
        marks.append(n)
    return tuple(marks)


def checkpoint_series(law: MatrixLaw, n: int, trials: int, seed: int,
                      direction: int = FORWARD) -> tuple[tuple[int, ...], np.ndarray]:
    """Scaled vectors x(k, 0) / k (or y(k, 0) / k) at every checkpoint k.

    Returns ``(marks, values)`` with ``values`` of shape ``(trials, len(marks), d)``.
    Backward checkpoints share one backward sequence per trial, so
    ``y(k)`` and ``y(k')`` are driven by the same A(-1), A(-2), ...
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    marks = checkpoint_marks(n)
    d = law.dimension
    out = np.empty((trials, len(marks), d))
    zero = np.zeros(d)
    scale = np.asarray(marks, dtype=np.float64)[None, :, None]
    for start in range(0, trials, CHUNK):
        stop = min(trials, start + CHUNK)
        seqs = index_batch(law, n, seed, stop - start, direction, first_trial=start)
        if direction == BACKWARD:
            for m, k in enumerate(marks):
                out[start:stop, m], _ = kernels.forward_vectors(law.stack, seqs[:, k - 1::-1], zero)
        else:
            _, hist = kernels.forward_vectors(law.stack, seqs, zero, True)
            out[start:stop] = hist[:, list(marks)]
    return marks, out / scale


@dataclass(frozen=True)
class OscillationTrace:
    checkpoints: tuple[tuple[int, float], ...]
    window: tuple[int, int]
    window_min: float
    window_max: float


def track_oscillation(law: MatrixLaw, n: int, seed: int, coordinate: int,
                      trial: int = 0) -> OscillationTrace:
    """Running averages x_coordinate(k, 0) / k at powers of two, plus the
    extrema of that ratio over k in [n/10, n]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= coordinate < law.dimension:
        raise ModelError(f"coordinate {coordinate} outside 0..{law.dimension - 1}")
    _, hist = trajectory(law, n, seed, trial)
    ks = np.arange(1, n + 1)
    ratio = hist[1:, coordinate] / ks
    lo = max(1, math.ceil(n / 10))
    window = ratio[lo - 1:]
    marks = checkpoint_marks(n)
    return OscillationTrace(
        tuple((k, float(ratio[k - 1])) for k in marks),
        (lo, n), float(window.min()), float(window.max()),
    )


def exact_small_n_distribution(law: MatrixLaw, n: int, coordinate: int,
                               cap: int = SMALL_N_CAP) -> dict[float, float]:
    """Exact law of x_coordinate(n, 0) by enumerating every atom sequence."""
    law = _as_iid(law)
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 0 <= coordinate < law.dimension:
        raise ModelError(f"coordinate {coordinate} outside 0..{law.dimension - 1}")
    stack = law.stack
    probs = [1.0] if isinstance(law, Deterministic) else [a.prob for a in law.atoms]
    if len(probs) ** n > cap:
        raise CapExceededError(f"{len(probs)}^{n} atom sequences exceed cap {cap}")
    masses: dict[float, list[float]] = defaultdict(list)

    def visit(x: np.ndarray, depth: int, weight: float) -> None:
        if depth == n:
            masses[float(x[coordinate])].append(weight)
            return
        for k, p in enumerate(probs):
            visit(np.max(stack[k] + x[None, :], axis=1), depth + 1, weight * p)

    visit(np.zeros(law.dimension), 0, 1.0)
    return {v: math.fsum(ws) for v, ws in sorted(masses.items())}


def total_variation(p: dict[float, float], q: dict[float, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def empirical_distribution(values) -> dict[float, float]:
    vals, counts = np.unique(np.asarray(values, dtype=np.float64), return_counts=True)
    total = counts.sum()
    return {float(v): c / total for v, c in zip(vals, counts)}


def mc_small_n_distribution(law: MatrixLaw, n: int, trials: int, seed: int,
                            coordinate: int) -> dict[float, float]:
    """Monte Carlo counterpart of :func:`exact_small_n_distribution`."""
    if n == 0:
        return {0.0: 1.0}
    finals = forward_finals(law, n, trials, seed)
    return empirical_distribution(finals[:, coordinate])

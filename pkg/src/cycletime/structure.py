"""Support graph of a law, its s.c.c. decomposition and pattern semigroups.

Nodes are 0-based here.  Reports built by :mod:`cycletime.report` shift
them to the 1-based labels used in the literature.

For a component c the class sets are

* ``E[c]`` -- components reachable from c (c included);
* ``F[c]`` -- the nodes of ``E[c]``;
* ``G[c]`` -- components of ``E[c]`` from which a component with the
  maximal downstream exponent is still reachable;
* ``H[c]`` -- the nodes of ``G[c]``.

``G[c]`` is computed as ``{k in E[c] : gamma_down[k] == gamma_down[c]}``
where ``gamma_down[k]`` is the largest exponent downstream of k.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from . import graph
from .errors import CapExceededError, ModelError, UnsupportedLawError
from .law import Deterministic, FiniteIID, MatrixLaw
from .tropical import BOTTOM

DEFAULT_EPSILON = 1e-3
DEFAULT_SEMIGROUP_CAP = 10**6


@dataclass(frozen=True)
class SupportGraph:
    d: int
    arcs: frozenset[tuple[int, int]]

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.d)]
        for i, j in sorted(self.arcs):
            adj[i].append(j)
        return adj

    def has_self_loop(self, i: int) -> bool:
        return (i, i) in self.arcs


def build_support_graph(law: MatrixLaw) -> SupportGraph:
    """Arc (i, j) iff some matrix in the support has a finite (i, j) entry."""
    finite = np.isfinite(law.stack).any(axis=0)
    arcs = frozenset((int(i), int(j)) for i, j in zip(*np.nonzero(finite)))
    return SupportGraph(law.dimension, arcs)


def graph_from_matrix(a) -> SupportGraph:
    return build_support_graph(Deterministic(a))


@dataclass(frozen=True)
class Component:
    id: int
    nodes: tuple[int, ...]
    trivial: bool


@dataclass(frozen=True)
class Condensation:
    """Components, their DAG and the downstream sets E and F."""

    graph: SupportGraph
    components: tuple[Component, ...]
    arcs: frozenset[tuple[int, int]]
    reach: tuple[frozenset[int], ...]
    node_component: tuple[int, ...]

    @property
    def E(self) -> tuple[frozenset[int], ...]:
        return self.reach

    @property
    def F(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.nodes_of(e) for e in self.reach)

    def nodes_of(self, comp_ids: Iterable[int]) -> tuple[int, ...]:
        return tuple(sorted(n for c in comp_ids for n in self.components[c].nodes))

    def component_of(self, node: int) -> Component:
        return self.components[self.node_component[node]]


def condense(g: SupportGraph) -> Condensation:
    """S.c.c. decomposition; component ids are ordered by smallest node."""
    blocks = sorted(graph.strongly_connected_components(g.adjacency()), key=min)
    node_component = [0] * g.d
    comps = []
    for cid, block in enumerate(blocks):
        for v in block:
            node_component[v] = cid
        trivial = len(block) == 1 and not g.has_self_loop(block[0])
        comps.append(Component(cid, tuple(block), trivial))
    arcs = frozenset(
        (node_component[i], node_component[j])
        for i, j in g.arcs
        if node_component[i] != node_component[j]
    )
    dag: list[list[int]] = [[] for _ in comps]
    for a, b in sorted(arcs):
        dag[a].append(b)
    reach = tuple(frozenset(r) for r in graph.reachability(dag))
    return Condensation(g, tuple(comps), arcs, reach, tuple(node_component))


def _value_mode(e) -> tuple[float, str]:
    value = getattr(e, "value", e)
    mode = getattr(e, "mode", "exact")
    return float(value), mode


@dataclass(frozen=True)
class SccAnalysis:
    """Condensation plus exponents and the class sets G, H.

    ``G`` uses the tolerance ``epsilon`` whenever an estimated exponent is
    involved; ``G_strict`` always compares exactly.  ``tie_sensitive`` is
    set when the two differ for some component.
    """

    condensation: Condensation
    gamma: tuple[float, ...]
    modes: tuple[str, ...]
    gamma_down: tuple[float, ...]
    G: tuple[frozenset[int], ...]
    G_strict: tuple[frozenset[int], ...]
    epsilon: float | None
    exponents: Mapping[int, object]

    @property
    def components(self) -> tuple[Component, ...]:
        return self.condensation.components

    @property
    def E(self):
        return self.condensation.E

    @property
    def F(self):
        return self.condensation.F

    @property
    def H(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.condensation.nodes_of(g) for g in self.G)

    @property
    def H_strict(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.condensation.nodes_of(g) for g in self.G_strict)

    @property
    def dominating(self) -> tuple[bool, ...]:
        return tuple(g == {c} for c, g in enumerate(self.G))

    @property
    def tie_sensitive(self) -> bool:
        return self.G != self.G_strict

    @property
    def exact(self) -> bool:
        return all(m == "exact" for m in self.modes)


def scc_decompose(g: SupportGraph | Condensation, exponents: Mapping[int, object],
                  epsilon: float | None = DEFAULT_EPSILON) -> SccAnalysis:
    """Attach exponents to the components and derive G, H.

    ``exponents`` maps component id to a float or an object with ``value``
    and ``mode`` attributes (``"exact"`` or ``"mc"``).  Trivial components
    are forced to Bottom; every non-trivial one must be present.
    """
    cond = g if isinstance(g, Condensation) else condense(g)
    gamma, modes = [], []
    for comp in cond.components:
        if comp.trivial:
            gamma.append(BOTTOM)
            modes.append("exact")
            continue
        if comp.id not in exponents:
            raise ModelError(f"missing exponent for non-trivial component {comp.id}")
        v, m = _value_mode(exponents[comp.id])
        if math.isnan(v) or v == math.inf:
            raise ModelError(f"illegal exponent {v!r} for component {comp.id}")
        gamma.append(v)
        modes.append(m)
    down = [max(gamma[k] for k in cond.reach[c]) for c in range(len(gamma))]
    tol = epsilon if epsilon is not None else 0.0
    g_tol, g_strict = [], []
    for c, e in enumerate(cond.reach):
        g_strict.append(frozenset(k for k in e if down[k] == down[c]))
        estimated = any(modes[j] != "exact" for j in e)
        g_tol.append(frozenset(
            k for k in e if down[k] == down[c] or (estimated and down[k] >= down[c] - tol)
        ))
    return SccAnalysis(cond, tuple(gamma), tuple(modes), tuple(down), tuple(g_tol),
                       tuple(g_strict), epsilon, dict(exponents))


def submatrix_law(law: MatrixLaw, nodes: Iterable[int]) -> MatrixLaw:
    """Restrict every atom / emission to ``nodes``; probabilities unchanged."""
    idx = sorted(set(int(v) for v in nodes))
    if not idx:
        raise ModelError("node set must be non-empty")
    if idx[0] < 0 or idx[-1] >= law.dimension:
        raise ModelError(f"nodes {idx} outside 0..{law.dimension - 1}")
    return law.restrict(idx)


# ---------------------------------------------------------------- pattern semigroup
#
# A pattern is stored as a tuple of row bitmasks: bit j of row i is set iff
# the (i, j) entry is finite.


def _to_bits(a: np.ndarray) -> tuple[int, ...]:
    fin = np.isfinite(a)
    return tuple(sum(1 << int(j) for j in np.flatnonzero(row)) for row in fin)


def _from_bits(rows: tuple[int, ...], d: int) -> np.ndarray:
    out = np.full((d, d), BOTTOM)
    for i, r in enumerate(rows):
        for j in range(d):
            if r >> j & 1:
                out[i, j] = 0.0
    out.setflags(write=False)
    return out


def _bits_mul(m: tuple[int, ...], n: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for r in m:
        acc = 0
        while r:
            low = r & -r
            acc |= n[low.bit_length() - 1]
            r ^= low
        out.append(acc)
    return tuple(out)


@dataclass(frozen=True)
class PatternSemigroup:
    d: int
    generators: tuple[tuple[int, ...], ...]
    elements: tuple[tuple[int, ...], ...]
    cap: int
    closed: bool = True

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, a) -> bool:
        return _to_bits(np.asarray(a)) in set(self.elements)

    def matrices(self) -> list[np.ndarray]:
        return [_from_bits(e, self.d) for e in self.elements]

    def generator_matrices(self) -> list[np.ndarray]:
        return [_from_bits(e, self.d) for e in self.generators]


def closure_of(generators: Sequence[np.ndarray], cap: int = DEFAULT_SEMIGROUP_CAP) -> PatternSemigroup:
    """Smallest product-closed set containing the patterns of ``generators``."""
    if not generators:
        raise ModelError("need at least one generator")
    d = np.asarray(generators[0]).shape[0]
    gens = list(dict.fromkeys(_to_bits(np.asarray(g)) for g in generators))
    elements = list(gens)
    seen = set(elements)
    if len(elements) > cap:
        raise CapExceededError(f"semigroup exceeds cap {cap}")
    todo = deque(elements)
    while todo:
        e = todo.popleft()
        for gen in gens:
            prod = _bits_mul(e, gen)
            if prod not in seen:
                seen.add(prod)
                elements.append(prod)
                if len(elements) > cap:
                    raise CapExceededError(f"semigroup exceeds cap {cap}")
                todo.append(prod)
    return PatternSemigroup(d, tuple(gens), tuple(elements), cap)


def semigroup_closure(law: MatrixLaw, cap: int = DEFAULT_SEMIGROUP_CAP) -> PatternSemigroup:
    """Patterns of all finite products with positive probability (i.i.d. laws)."""
    if not isinstance(law, (Deterministic, FiniteIID)):
        raise UnsupportedLawError("semigroup closure is defined for deterministic and i.i.d. laws only")
    return closure_of(list(law.stack), cap)


@dataclass(frozen=True)
class ReachabilityCertificate:
    """Outcome of a block-reachability search.

    ``witness`` is a pattern M in the semigroup such that every row in I
    has a finite entry in some column of J; None is a refutation.
    """

    I: tuple[int, ...]
    J: tuple[int, ...]
    witness: np.ndarray | None
    scanned: int

    @property
    def found(self) -> bool:
        return self.witness is not None


def block_reachability_certificate(sg: PatternSemigroup, I: Iterable[int],
                                   J: Iterable[int]) -> ReachabilityCertificate:
    rows, cols = tuple(sorted(set(I))), tuple(sorted(set(J)))
    if set(rows) & set(cols):
        raise ModelError("I and J must be disjoint")
    if any(v < 0 or v >= sg.d for v in rows + cols):
        raise ModelError(f"nodes outside 0..{sg.d - 1}")
    jmask = sum(1 << j for j in cols)
    for k, e in enumerate(sg.elements):
        if all(e[i] & jmask for i in rows):
            return ReachabilityCertificate(rows, cols, _from_bits(e, sg.d), k + 1)
    return ReachabilityCertificate(rows, cols, None, len(sg.elements))

"""Stationary laws of random max-plus matrices and reproducible sampling.

Three families are supported:

* :class:`Deterministic` -- the same matrix at every step;
* :class:`FiniteIID` -- i.i.d. draws from finitely many atoms;
* :class:`MarkovModulated` -- the matrix is a function of the state of a
  stationary, irreducible finite Markov chain.

Every law exposes ``stack``, a ``(K, d, d)`` array of the matrices it can
emit, and samplers return index sequences into that stack.  This keeps the
hot loops in :mod:`cycletime.kernels` free of Python objects.

Random streams
--------------
The stream for trial ``t`` of a run seeded with ``seed`` is
``PCG64(SeedSequence(seed, spawn_key=(t, direction)))`` where ``direction``
is 0 for forward and 1 for backward sampling.  ``SeedSequence`` hashes its
inputs, so streams for distinct trials are independent and each one is a
pure function of ``(seed, trial, direction)``.
"""

from __future__ import annotations

import json
import math
import os
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from . import graph, kernels
from .errors import ModelError, UnsupportedLawError
from .tropical import as_matrix, finite_rows, matrix_to_json, submatrix

PROB_TOL = 1e-9
FORWARD, BACKWARD = 0, 1


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Atom:
    matrix: np.ndarray
    prob: float
    name: str


@dataclass(frozen=True, eq=False)
class Deterministic:
    matrix: np.ndarray

    kind = "deterministic"

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix, square=True))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def stack(self) -> np.ndarray:
        return _freeze(self.matrix[None, :, :].copy())

    @property
    def labels(self) -> list[str]:
        return ["A"]

    @property
    def is_deterministic(self) -> bool:
        return True

    def restrict(self, nodes: Sequence[int]) -> "Deterministic":
        return Deterministic(submatrix(self.matrix, nodes))


@dataclass(frozen=True, eq=False)
class FiniteIID:
    atoms: tuple[Atom, ...]

    kind = "iid"

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise ModelError("an i.i.d. law needs at least one atom")
        fixed = []
        for k, atom in enumerate(atoms):
            m = as_matrix(atom.matrix, square=True)
            p = float(atom.prob)
            if not p > 0 or math.isinf(p):
                raise ModelError(f"atom {atom.name or k}: probability must be > 0, got {p}")
            fixed.append(Atom(m, p, atom.name or f"atom{k + 1}"))
        dims = {a.matrix.shape[0] for a in fixed}
        if len(dims) != 1:
            raise ModelError(f"atoms have different dimensions: {sorted(dims)}")
        total = math.fsum(a.prob for a in fixed)
        if abs(total - 1.0) > PROB_TOL:
            raise ModelError(f"probabilities sum to {total:.12g}, expected 1")
        if len({a.name for a in fixed}) != len(fixed):
            raise ModelError("atom names must be unique")
        object.__setattr__(self, "atoms", tuple(fixed))
        cum = np.cumsum([a.prob for a in fixed])
        cum[-1] = 1.0
        object.__setattr__(self, "_cum", _freeze(cum))

    @property
    def dimension(self) -> int:
        return self.atoms[0].matrix.shape[0]

    @property
    def stack(self) -> np.ndarray:
        return _freeze(np.stack([a.matrix for a in self.atoms]))

    @property
    def probs(self) -> np.ndarray:
        return np.array([a.prob for a in self.atoms])

    @property
    def labels(self) -> list[str]:
        return [a.name for a in self.atoms]

    @property
    def is_deterministic(self) -> bool:
        first = self.atoms[0].matrix
        return all(np.array_equal(first, a.matrix) for a in self.atoms[1:])

    def restrict(self, nodes: Sequence[int]) -> "FiniteIID":
        return FiniteIID(tuple(Atom(submatrix(a.matrix, nodes), a.prob, a.name) for a in self.atoms))


@dataclass(frozen=True, eq=False)
class MarkovModulated:
    """Matrix sequence driven by a stationary Markov chain.

    ``emissions[s]`` is the matrix emitted while the chain is in state
    ``states[s]``.  The chain always starts from its stationary law.
    ``family`` optionally records a named parametric construction (used to
    route exact computations such as :func:`exponents.exact_markov_coordinate_limits`).
    """

    states: tuple[str, ...]
    transition: np.ndarray
    emissions: tuple[np.ndarray, ...]
    family: Mapping[str, Any] | None = field(default=None, compare=False)

    kind = "markov"

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        if not states:
            raise ModelError("a Markov law needs at least one state")
        if len(set(states)) != len(states):
            raise ModelError("state names must be unique")
        p = np.array(self.transition, dtype=np.float64)
        s = len(states)
        if p.shape != (s, s):
            raise ModelError(f"transition must be {s}x{s}, got shape {p.shape}")
        if not np.isfinite(p).all() or (p < 0).any():
            raise ModelError("transition entries must be finite and non-negative")
        sums = p.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > PROB_TOL)
        if bad.size:
            k = int(bad[0])
            raise ModelError(f"transition row {states[k]!r} sums to {sums[k]:.12g}, expected 1")
        support = [list(np.flatnonzero(row > 0)) for row in p]
        if not graph.is_strongly_connected(support):
            raise ModelError("transition support is not strongly connected (chain is reducible)")
        if len(self.emissions) != s:
            raise ModelError("need exactly one emission matrix per state")
        ems = tuple(as_matrix(m, square=True) for m in self.emissions)
        if len({m.shape[0] for m in ems}) != 1:
            raise ModelError("emission matrices have different dimensions")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transition", _freeze(p))
        object.__setattr__(self, "emissions", ems)
        pi = _solve_stationary(p)
        object.__setattr__(self, "_pi", _freeze(pi))
        object.__setattr__(self, "_cum", _freeze(_cumulative(p)))
        object.__setattr__(self, "_cum_reversed", _freeze(_cumulative(_reverse(p, pi))))
        pi_cum = np.cumsum(pi)
        pi_cum[-1] = 1.0
        object.__setattr__(self, "_pi_cum", _freeze(pi_cum))

    @property
    def dimension(self) -> int:
        return self.emissions[0].shape[0]

    @property
    def stack(self) -> np.ndarray:
        return _freeze(np.stack(self.emissions))

    @property
    def labels(self) -> list[str]:
        return list(self.states)

    @property
    def stationary(self) -> np.ndarray:
        return self._pi

    @property
    def is_deterministic(self) -> bool:
        first = self.emissions[0]
        return all(np.array_equal(first, m) for m in self.emissions[1:])

    def reversed_transition(self) -> np.ndarray:
        """Kernel of the time-reversed chain: P̂[j, i] = π_i P[i, j] / π_j."""
        return _freeze(_reverse(self.transition, self._pi))

    def restrict(self, nodes: Sequence[int]) -> "MarkovModulated":
        return MarkovModulated(
            self.states, self.transition, tuple(submatrix(m, nodes) for m in self.emissions)
        )


MatrixLaw = Union[Deterministic, FiniteIID, MarkovModulated]


def _cumulative(p: np.ndarray) -> np.ndarray:
    cum = np.cumsum(p, axis=1)
    cum[:, -1] = 1.0
    return cum


def _reverse(p: np.ndarray, pi: np.ndarray) -> np.ndarray:
    return (p * pi[:, None]).T / pi[:, None]


def _solve_stationary(p: np.ndarray) -> np.ndarray:
    s = p.shape[0]
    a = p.T - np.eye(s)
    a[-1, :] = 1.0
    b = np.zeros(s)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise ModelError(f"stationary system is singular: {exc}") from None
    # rounding can leave -1e-17 on states of tiny mass
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


# ---------------------------------------------------------------- documents


def row_condition_per_atom(law: MatrixLaw) -> list[bool]:
    """Whether each atom / emission has a finite entry on every row."""
    return [bool(finite_rows(m).all()) for m in law.stack]


def load_law(document: Mapping | str | bytes) -> MatrixLaw:
    """Build a validated law from a model document (mapping or JSON text)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelError(f"model document is not valid JSON: {exc}") from None
    if not isinstance(document, Mapping):
        raise ModelError("model document must be a JSON object")
    body = document.get("law")
    if not isinstance(body, Mapping):
        raise ModelError('model document needs a "law" object')
    kind = body.get("type")
    try:
        if kind == "deterministic":
            law = Deterministic(_need(body, "matrix"))
        elif kind == "iid":
            atoms = _need(body, "atoms")
            if not isinstance(atoms, list):
                raise ModelError('"atoms" must be a list')
            law = FiniteIID(tuple(
                Atom(_need(a, "matrix"), _number(_need(a, "prob")), str(a.get("name", "")))
                for a in atoms
            ))
        elif kind == "markov":
            law = _load_markov(body)
        else:
            raise ModelError(f"unknown law type {kind!r}")
    except (TypeError, KeyError, AttributeError) as exc:
        raise ModelError(f"malformed law: {exc}") from None
    if "dimension" in document:
        d = document["dimension"]
        if not isinstance(d, int) or isinstance(d, bool) or d != law.dimension:
            raise ModelError(f"declared dimension {d!r} does not match matrices ({law.dimension})")
    return law


def load_law_file(path: str | os.PathLike) -> MatrixLaw:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelError(f"cannot read model {path}: {exc}") from None
    return load_law(text)


def _need(obj, key):
    if not isinstance(obj, Mapping) or key not in obj:
        raise ModelError(f"missing field {key!r}")
    return obj[key]


def _number(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ModelError(f"expected a number, got {x!r}")
    return float(x)


def _load_markov(body: Mapping) -> MarkovModulated:
    family = body.get("family")
    states = _need(body, "states")
    transition = _need(body, "transition")
    emissions = _need(body, "emissions")
    if not isinstance(states, list) or not isinstance(emissions, Mapping):
        raise ModelError('"states" must be a list and "emissions" an object')
    missing = [s for s in states if s not in emissions]
    if missing:
        raise ModelError(f"no emission matrix for states {missing}")
    p = np.array([[_number(v) for v in row] for row in transition])
    law = MarkovModulated(tuple(states), p, tuple(emissions[s] for s in states), family)
    if family is not None:
        if family.get("name") != "example1":
            raise ModelError(f"unknown Markov family {family.get('name')!r}")
        ref = example1_law(_number(family["gamma1"]), _number(family["gamma2"]))
        if (law.states != ref.states or not np.allclose(law.transition, ref.transition, atol=PROB_TOL)
                or any(not np.array_equal(a, b) for a, b in zip(law.emissions, ref.emissions))):
            raise ModelError("Markov law does not match its declared example1 parameters")
        law = ref
    return law


def law_to_document(law: MatrixLaw) -> dict:
    if isinstance(law, Deterministic):
        body = {"type": "deterministic", "matrix": matrix_to_json(law.matrix)}
    elif isinstance(law, FiniteIID):
        body = {
            "type": "iid",
            "atoms": [{"name": a.name, "prob": a.prob, "matrix": matrix_to_json(a.matrix)}
                      for a in law.atoms],
        }
    else:
        body = {
            "type": "markov",
            "states": list(law.states),
            "transition": law.transition.tolist(),
            "emissions": {s: matrix_to_json(m) for s, m in zip(law.states, law.emissions)},
        }
        if law.family is not None:
            body["family"] = dict(law.family)
    return {"dimension": law.dimension, "law": body}


# ---------------------------------------------------------------- sampling


class SampleStream:
    """Random source for one trial.  Single owner; not thread-safe.

    Successive draws on a Markov law continue the same chain.
    """

    def __init__(self, seed: int, trial: int = 0, direction: int = FORWARD):
        self.seed = int(seed)
        self.trial = int(trial)
        self.direction = direction
        self.rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.trial, direction)))
        )
        self.markov_state: int | None = None


def _iid_indices(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, len(cum) - 1).astype(np.int64)


def sample_indices(law: MatrixLaw, n: int, stream: SampleStream) -> np.ndarray:
    """Indices into ``law.stack`` for the next ``n`` steps of ``stream``.

    For a backward stream the k-th index is the matrix A(-k-1); Markov laws
    then run the time-reversed chain.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if isinstance(law, Deterministic):
        return np.zeros(n, dtype=np.int64)
    if isinstance(law, FiniteIID):
        return _iid_indices(law._cum, stream.rng.random(n))
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    cum = law._cum_reversed if stream.direction == BACKWARD else law._cum
    u = stream.rng.random(n)
    if stream.markov_state is None:
        start = int(_iid_indices(law._pi_cum, u[:1])[0])
        path = kernels.markov_paths(cum, np.array([start]), u[None, 1:])[0]
    else:
        path = kernels.markov_paths(cum, np.array([stream.markov_state]), u[None, :])[0, 1:]
    stream.markov_state = int(path[-1])
    return path


def sample_forward(law: MatrixLaw, n: int, stream: SampleStream) -> np.ndarray:
    """A(0), ..., A(n-1) as an ``(n, d, d)`` array."""
    return law.stack[sample_indices(law, n, stream)]


def sample_backward(law: MatrixLaw, n: int, stream: SampleStream) -> np.ndarray:
    """A(-1), ..., A(-n) as an ``(n, d, d)`` array."""
    if stream.direction != BACKWARD:
        raise ValueError("sample_backward needs a stream created with direction=BACKWARD")
    return law.stack[sample_indices(law, n, stream)]


def index_batch(law: MatrixLaw, n: int, seed: int, trials: int,
                direction: int = FORWARD, first_trial: int = 0) -> np.ndarray:
    """``(trials, n)`` index array; row t is trial ``first_trial + t``."""
    if isinstance(law, Deterministic):
        return np.zeros((trials, n), dtype=np.int64)
    out = np.empty((trials, n), dtype=np.int64)
    if isinstance(law, FiniteIID):
        for t in range(trials):
            rng = SampleStream(seed, first_trial + t, direction).rng
            out[t] = _iid_indices(law._cum, rng.random(n))
        return out
    if n == 0:
        return out
    u = np.empty((trials, n))
    for t in range(trials):
        u[t] = SampleStream(seed, first_trial + t, direction).rng.random(n)
    start = _iid_indices(law._pi_cum, u[:, 0])
    cum = law._cum_reversed if direction == BACKWARD else law._cum
    return kernels.markov_paths(cum, start, u[:, 1:])


# ---------------------------------------------------------------- Markov analysis


@dataclass(frozen=True, eq=False)
class StationaryReport:
    states: tuple[str, ...]
    pi: np.ndarray
    expected_reward: float | None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.states, map(float, self.pi)))


def stationary_analysis(law: MatrixLaw,
                        reward: Mapping[str, float] | Callable[[str], float] | None = None
                        ) -> StationaryReport:
    """Stationary distribution of the driving chain and Σ_s π(s) reward(s)."""
    if not isinstance(law, MarkovModulated):
        raise UnsupportedLawError("stationary analysis needs a Markov-modulated law")
    pi = _solve_stationary(np.array(law.transition))
    if abs(pi.sum() - 1.0) > 1e-12 or np.abs(pi @ law.transition - pi).max() > 1e-10:
        raise ModelError("stationary solve did not converge to tolerance")
    expected = None
    if reward is not None:
        get = reward if callable(reward) else reward.__getitem__
        expected = math.fsum(float(pi[k]) * float(get(s)) for k, s in enumerate(law.states))
    return StationaryReport(law.states, _freeze(pi), expected)


EXAMPLE1_STATES = ("A1", "B2", "A2", "B1")
EXAMPLE1_A = [[1.0, "-inf"], ["-inf", 0.0]]
EXAMPLE1_B = [["-inf", 0.0], [0.0, "-inf"]]


def example1_law(gamma1: float, gamma2: float) -> MarkovModulated:
    """Mixing counterexample: a 4-state chain on {A, B} x {1, 2}.

    States are named ``A1, B2, A2, B1`` and each state emits its letter's
    matrix.  ``delta = (1 - gamma1 - gamma2) / 2``.
    """
    gamma1, gamma2 = float(gamma1), float(gamma2)
    if not (gamma1 > 0 and gamma2 > 0 and gamma1 + gamma2 < 1):
        raise ModelError(f"need gamma1 > 0, gamma2 > 0, gamma1 + gamma2 < 1; got {gamma1}, {gamma2}")
    delta = (1.0 - gamma1 - gamma2) / 2.0
    a1, b2, a2, b1 = range(4)
    p = np.zeros((4, 4))
    p[a1, a1], p[a1, b2] = 1 - delta, delta
    p[b2, a2], p[b2, b1] = gamma2, 1 - gamma2
    p[a2, a2], p[a2, b1] = 1 - delta, delta
    p[b1, a1], p[b1, b2] = gamma1, 1 - gamma1
    a, b = as_matrix(EXAMPLE1_A), as_matrix(EXAMPLE1_B)
    return MarkovModulated(
        EXAMPLE1_STATES, p, (a, b, a, b),
        {"name": "example1", "gamma1": gamma1, "gamma2": gamma2},
    )

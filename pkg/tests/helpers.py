"""Shared generators and fixtures paths for the test suite."""

from __future__ import annotations

from importlib import resources

import numpy as np
from hypothesis import strategies as st

from cycletime.law import Atom, Deterministic, FiniteIID, load_law_file

NEG = -np.inf

B = np.array([[0, NEG, NEG], [0, NEG, NEG], [0, 1, 1]])
C = np.array([[0, NEG, NEG], [0, NEG, 0], [0, 0, NEG]])
B_PRIME = np.array([[0, NEG, NEG], [0, 0, NEG], [0, 1, 1]])


def data_path(name: str) -> str:
    return str(resources.files("cycletime") / "data" / name)


def fixture(name: str):
    return load_law_file(data_path(name))


# integer entries keep max/plus exact, so algebraic identities can use ==
entries = st.one_of(st.just(NEG), st.integers(-20, 20).map(float))
finite_entries = st.integers(-20, 20).map(float)


def matrices(d: int, elements=entries):
    return st.lists(st.lists(elements, min_size=d, max_size=d), min_size=d, max_size=d).map(np.array)


def vectors(d: int, elements=finite_entries):
    return st.lists(elements, min_size=d, max_size=d).map(np.array)


dims = st.integers(1, 4)


def random_matrix(rng: np.random.Generator, d: int, p_bottom: float = 0.35,
                  lo: int = -10, hi: int = 10, integer: bool = True) -> np.ndarray:
    vals = rng.integers(lo, hi + 1, size=(d, d)).astype(float) if integer else rng.uniform(lo, hi, (d, d))
    vals[rng.random((d, d)) < p_bottom] = NEG
    return vals


def random_row_finite_matrix(rng, d, p_bottom=0.4, lo=-5, hi=5, integer=True) -> np.ndarray:
    """Random matrix with at least one finite entry per row."""
    a = random_matrix(rng, d, p_bottom, lo, hi, integer)
    for i in range(d):
        if not np.isfinite(a[i]).any():
            a[i, rng.integers(d)] = float(rng.integers(lo, hi + 1)) if integer else rng.uniform(lo, hi)
    return a


def random_deterministic(rng, d) -> Deterministic:
    return Deterministic(random_row_finite_matrix(rng, d))


def random_iid(rng, d, n_atoms) -> FiniteIID:
    probs = rng.dirichlet(np.ones(n_atoms))
    probs = np.maximum(probs, 0.05)
    probs /= probs.sum()
    return FiniteIID(tuple(Atom(random_row_finite_matrix(rng, d), float(p), f"M{k}")
                           for k, p in enumerate(probs)))

"""Hot loops, dispatched to the compiled extension when it is available.

Set ``CYCLETIME_PURE_PYTHON=1`` to force the numpy fallback.  Inputs are
coerced to C-contiguous ``float64`` / ``int64`` here so both backends see
identical buffers.
"""

import os

import numpy as np

from . import _fallback

try:
    if os.environ.get("CYCLETIME_PURE_PYTHON"):
        raise ImportError("pure-python backend forced")
    from . import _kernels as _impl
except ImportError:
    _impl = _fallback

BACKEND = _impl.BACKEND


def available_backends():
    """Map backend name to module for every importable implementation."""
    found = {"numpy": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def forward_vectors(atoms, seqs, x0, history=False, *, backend=None):
    impl = backend or _impl
    return impl.forward_vectors(_f64(atoms), _i64(seqs), _f64(x0), bool(history))


def fold_products(atoms, seq, history=False, *, backend=None):
    impl = backend or _impl
    seq = _i64(seq)
    if seq.ndim != 1 or seq.shape[0] == 0:
        raise ValueError("fold_products needs a non-empty 1-d index sequence")
    mat, shift, hist = impl.fold_products(_f64(atoms), seq, bool(history))
    return mat, float(shift), hist


def markov_paths(cum, start, uniforms, *, backend=None):
    impl = backend or _impl
    return impl.markov_paths(_f64(cum), _i64(start), _f64(uniforms))

"""Pure numpy kernels.

Same contracts and bit-identical results as the compiled ``_kernels``
extension.  Loops run over time steps; trials are vectorised.
"""

import numpy as np

BACKEND = "numpy"


def forward_vectors(atoms, seqs, x0, history):
    """Apply ``atoms[seqs[t, k]]`` for k = 0, 1, ... to ``x0``, per trial t.

    Returns the final vectors ``(T, d)`` and, if ``history``, every
    intermediate vector ``(T, n + 1, d)`` with index 0 holding ``x0``.
    """
    atoms = np.asarray(atoms, dtype=np.float64)
    seqs = np.asarray(seqs, dtype=np.int64)
    trials, n = seqs.shape
    d = atoms.shape[1]
    x = np.tile(np.asarray(x0, dtype=np.float64), (trials, 1))
    hist = None
    if history:
        hist = np.empty((trials, n + 1, d))
        hist[:, 0] = x
    cols = np.ascontiguousarray(seqs.T)
    # per-column atom slices: atoms_j[k][:, i] = atoms[k][i, j]
    atoms_j = [np.ascontiguousarray(atoms[:, :, j]) for j in range(d)]
    for k in range(n):
        idx = cols[k]
        # unrolled max over j; exact, so bit-identical to a reduction
        y = atoms_j[0][idx] + x[:, :1]
        for j in range(1, d):
            np.maximum(y, atoms_j[j][idx] + x[:, j:j + 1], out=y)
        x = y
        if history:
            hist[:, k + 1] = x
    return x, hist


def _neumaier(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


def fold_products(atoms, seq, history):
    """Normalized left-to-right product of ``atoms[seq[0]] ⊗ atoms[seq[1]] ⊗ ...``.

    Returns ``(matrix, shift, rowmax_history)``.  ``rowmax_history[k]`` is the
    row maximum of the unnormalized prefix product of length k + 1.
    """
    atoms = np.asarray(atoms, dtype=np.float64)
    seq = np.asarray(seq, dtype=np.int64)
    n = seq.shape[0]
    d = atoms.shape[1]
    hist = np.empty((n, d)) if history else None
    p = atoms[seq[0]].copy()
    s = c = 0.0
    for k in range(n):
        if k > 0:
            p = np.max(p[:, :, None] + atoms[seq[k]][None, :, :], axis=1)
        m = p.max()
        if m != -np.inf:
            p -= m
            s, c = _neumaier(s, c, m)
        if history:
            hist[k] = p.max(axis=1) + (s + c)
    return p, s + c, hist


def markov_paths(cum, start, uniforms):
    """Run Markov chains by inverse-CDF stepping.

    ``cum[s]`` is the cumulative transition row of state s.  Path t starts
    at ``start[t]`` and consumes ``uniforms[t, k]`` for step k + 1.
    """
    cum = np.asarray(cum, dtype=np.float64)
    uniforms = np.asarray(uniforms, dtype=np.float64)
    trials, m = uniforms.shape
    n_states = cum.shape[0]
    out = np.empty((trials, m + 1), dtype=np.int64)
    out[:, 0] = start
    for k in range(m):
        rows = cum[out[:, k]]
        nxt = np.sum(rows <= uniforms[:, k, None], axis=1)
        out[:, k + 1] = np.minimum(nxt, n_states - 1)
    return out

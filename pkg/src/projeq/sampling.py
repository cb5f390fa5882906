"""Seeded quasi-random sampling.

Domain audits (positive-definiteness, ordering, residual scans) use Halton
sequences: low-discrepancy coverage, and PASS/FAIL decisions that reproduce
bit-for-bit for a given seed. The seed enters as a deterministic burn-in
offset into the sequence, not as RNG state.
"""

import numpy as np

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def _van_der_corput(indices, base):
    x = np.zeros(len(indices), dtype=float)
    denom = np.ones(len(indices), dtype=float)
    idx = np.array(indices, dtype=np.int64)
    while np.any(idx > 0):
        denom *= base
        x += (idx % base) / denom
        idx //= base
    return x


def halton_points(count, dim, seed=0):
    """`count` points of the `dim`-dimensional Halton sequence in (0,1)^dim.

    Parameters
    ----------
    count : int
    dim : int
        At most 16 (one prime base per axis).
    seed : int
        Deterministic offset; different seeds give disjoint index windows.
    """
    if dim > len(_PRIMES):
        raise ValueError(f"halton sampling supports dim <= {len(_PRIMES)}, got {dim}")
    if count < 0:
        raise ValueError("count must be nonnegative")
    # skip the degenerate first points and decorrelate seeds by windowing
    start = 20 + int(seed) * (count + 61)
    indices = np.arange(start, start + count)
    cols = [_van_der_corput(indices, _PRIMES[k]) for k in range(dim)]
    return np.stack(cols, axis=1) if cols else np.zeros((count, 0))

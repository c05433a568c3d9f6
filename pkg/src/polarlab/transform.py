"""Binary polar transform and index utilities.

The transform maps a word ``u`` of length ``N = 2**n`` to ``x = u . H_n``
over GF(2), where ``H_n`` is the Kronecker power of the 2x2 kernel
``[[1, 0], [1, 1]]`` preceded by the bit-reversal permutation of the input.
``H_n`` is an involution, so the same routine inverts itself.
"""

from __future__ import annotations

import numpy as np

__all__ = ["bit_reversal", "polar_transform", "extract"]

_MAX_N = 30  # allocation guard; desk-scale experiments stay far below this


def bit_reversal(n: int) -> np.ndarray:
    """Bit-reversal permutation on ``2**n`` indices.

    Index ``i`` is written as ``n`` bits, most significant first, and the
    bits are reversed.  The permutation is its own inverse.

    Parameters
    ----------
    n : int
        Number of index bits, ``n >= 0``.

    Returns
    -------
    numpy.ndarray
        Integer array ``pi`` of length ``2**n`` with ``pi[i]`` the
        bit-reversed value of ``i``.
    """
    if not 0 <= n <= _MAX_N:
        raise ValueError(f"n must be in [0, {_MAX_N}], got {n}")
    perm = np.zeros(1 << n, dtype=np.int64)
    for bit in range(n):
        # bit `bit` of i lands at bit `n-1-bit` of pi[i]
        perm |= ((np.arange(1 << n) >> bit) & 1) << (n - 1 - bit)
    return perm


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply ``x = u . H_n`` over GF(2).

    The input is permuted by :func:`bit_reversal` and then run through the
    logarithmic butterfly of the kernel ``[[1, 0], [1, 1]]``, costing
    Theta(N log N) bit operations.  Applying the function twice returns the
    original word.

    Parameters
    ----------
    u : numpy.ndarray
        Bit array with values in {0, 1}.  The last axis is the word and
        must have power-of-two length; leading axes are treated as a batch.

    Returns
    -------
    numpy.ndarray
        ``uint8`` array of the same shape.
    """
    u = np.asarray(u)
    size = u.shape[-1] if u.ndim else 0
    if size == 0 or size & (size - 1):
        raise ValueError(f"word length must be a power of two, got {size}")
    n = size.bit_length() - 1
    x = u[..., bit_reversal(n)].astype(np.uint8)
    for stage in range(n):
        half = 1 << stage
        pairs = x.reshape(*x.shape[:-1], size >> (stage + 1), 2 * half)
        pairs[..., :half] ^= pairs[..., half:]
    return x


def extract(u: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Gather ``u`` at a sorted index set.

    Parameters
    ----------
    u : numpy.ndarray
        Word to read, last axis indexed.
    indices : numpy.ndarray
        Strictly increasing positions within the last axis of ``u``.

    Returns
    -------
    numpy.ndarray
        The selected entries, in the given order.
    """
    u = np.asarray(u)
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (np.any(idx[:-1] >= idx[1:])):
        raise ValueError("indices must be strictly increasing")
    if idx.size and (idx[0] < 0 or idx[-1] >= u.shape[-1]):
        raise ValueError(
            f"indices out of range for word of length {u.shape[-1]}"
        )
    return u[..., idx]

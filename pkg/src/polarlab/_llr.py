"""Log-likelihood-ratio arithmetic for the SC recursion.

All likelihoods are carried as LLRs ``ln(W(.|0)/W(.|1))``.  The check-node
combine uses the exact form ``2 atanh(tanh(a/2) tanh(b/2))`` while both
inputs stay below ``EXACT_MAX`` and switches to the limit form
``sign(a) sign(b) min(|a|, |b|)`` beyond it.  ``tanh(x/2)`` becomes
indistinguishable from 1 in IEEE doubles near x = 38.1, and library tanh
implementations are only faithful to a couple of ulps, so the switch point
keeps a few-ulp margin (1 - tanh(18) is about four ulps below 1); a larger
saturation point lets the tanh product round to 1 and produces spurious
infinities from finite inputs.  The limit form overstates the combined
certainty by at most ln 2, which at the switch point is a factor-of-two
likelihood error on events of probability ~2e-16; it also propagates exact
certainties (infinite LLRs), which the erasure-channel pass relies on.
"""

from __future__ import annotations

import numpy as np

EXACT_MAX = 36.0


def check_op(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Check-node LLR combine of two independent branches."""
    abs_a = np.abs(a)
    abs_b = np.abs(b)
    small = (abs_a < EXACT_MAX) & (abs_b < EXACT_MAX)
    ae = np.where(small, a, 0.0)
    be = np.where(small, b, 0.0)
    exact = 2.0 * np.arctanh(np.tanh(0.5 * ae) * np.tanh(0.5 * be))
    limit = np.sign(a) * np.sign(b) * np.minimum(abs_a, abs_b)
    return np.where(small, exact, limit)


def var_op(a: np.ndarray, b: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Variable-node combine given the already decided branch bit ``u``.

    Contradicting certainties (+inf vs -inf) yield NaN here; the engine
    rejects the pass at the decision step, since they can only arise from
    conditioning on a zero-probability event.
    """
    with np.errstate(invalid="ignore"):
        return b + (1.0 - 2.0 * u) * a


def sigmoid(lam: np.ndarray) -> np.ndarray:
    """Stable ``l/(1+l)`` for ``l = exp(lam)``, the probability of bit 0."""
    out = np.empty_like(lam, dtype=np.float64)
    pos = lam >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-lam[pos]))
    ex = np.exp(lam[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out

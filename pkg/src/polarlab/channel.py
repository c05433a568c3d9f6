"""Binary-input channels as explicit probability tables.

A channel is a pair of rows ``p0 = W(.|0)`` and ``p1 = W(.|1)`` over an
integer output alphabet ``0..m-1``.  The module provides the standard test
channels (BSC, BEC, BSEC), the single-step minus/plus synthesis transforms,
Bhattacharyya and symmetric mutual information functionals, and the binary
rate formulas used by the coding schemes.

Symbol conventions: for BEC and BSEC the erasure symbol is index 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "Channel",
    "ERASURE",
    "make_bsc",
    "make_bec",
    "make_bsec",
    "make_channel",
    "bhattacharyya",
    "symmetric_mutual_info",
    "combine_minus",
    "combine_plus",
    "sample",
    "sample_word",
    "llr_table",
    "channel_to_dict",
    "channel_from_dict",
    "binary_entropy",
    "binary_entropy_inverse",
    "rate_distortion_bss",
    "star",
    "r_wz",
    "r_gp",
    "storage_capacity",
    "ALPHABET_CAP",
]

ERASURE = 2
ALPHABET_CAP = 1 << 16
_ROW_SUM_TOL = 1e-12

# symmetric kinds admit the all-zero-input Monte Carlo estimator
SYMMETRIC_KINDS = ("bsc", "bec", "bsec")


@dataclass(frozen=True)
class Channel:
    """Binary-input discrete memoryless channel.

    Attributes
    ----------
    kind : str
        One of ``"bsc"``, ``"bec"``, ``"bsec"``, ``"generic"``.
    params : dict
        Constructor parameters for the named kinds, empty for generic.
    p0, p1 : numpy.ndarray
        Output distributions given input 0 and input 1.
    """

    kind: str
    params: dict = field(compare=False)
    p0: np.ndarray = field(compare=False)
    p1: np.ndarray = field(compare=False)

    def __post_init__(self):
        for name, row in (("p0", self.p0), ("p1", self.p1)):
            row = np.asarray(row, dtype=np.float64)
            if row.ndim != 1 or row.size == 0:
                raise ValueError(f"{name} must be a nonempty vector")
            if np.any(row < 0.0):
                raise ValueError(f"{name} has negative entries")
            if abs(row.sum() - 1.0) > _ROW_SUM_TOL:
                raise ValueError(
                    f"{name} sums to {row.sum()!r}, beyond {_ROW_SUM_TOL}"
                )
            object.__setattr__(self, name, row)
        if self.p0.size != self.p1.size:
            raise ValueError("p0 and p1 must share an output alphabet")
        if self.p0.size > ALPHABET_CAP:
            raise ValueError(
                f"alphabet size {self.p0.size} exceeds cap {ALPHABET_CAP}"
            )

    @property
    def alphabet_size(self) -> int:
        return self.p0.size

    @property
    def is_symmetric_kind(self) -> bool:
        return self.kind in SYMMETRIC_KINDS


def make_bsc(d: float) -> Channel:
    """Binary symmetric channel with crossover probability ``d``."""
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"crossover must lie in [0, 1], got {d}")
    return Channel("bsc", {"D": d}, np.array([1.0 - d, d]), np.array([d, 1.0 - d]))


def make_bec(eps: float) -> Channel:
    """Binary erasure channel with erasure probability ``eps``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {eps}")
    return Channel(
        "bec",
        {"epsilon": eps},
        np.array([1.0 - eps, 0.0, eps]),
        np.array([0.0, 1.0 - eps, eps]),
    )


def make_bsec(p: float, d: float) -> Channel:
    """Symmetric channel with both a flip and an erasure component.

    Given input ``x``, the output reproduces ``x`` with probability
    ``p * (1 - d)``, flips with probability ``p * d``, and erases with
    probability ``1 - p``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"D must lie in [0, 1], got {d}")
    return Channel(
        "bsec",
        {"p": p, "D": d},
        np.array([p * (1.0 - d), p * d, 1.0 - p]),
        np.array([p * d, p * (1.0 - d), 1.0 - p]),
    )


def make_channel(p0, p1) -> Channel:
    """Generic channel from explicit probability rows."""
    return Channel("generic", {}, np.asarray(p0, float), np.asarray(p1, float))


def bhattacharyya(w: Channel) -> float:
    """Bhattacharyya parameter ``Z(W) = sum_y sqrt(W(y|0) W(y|1))``."""
    return float(np.sqrt(w.p0 * w.p1).sum())


def symmetric_mutual_info(w: Channel) -> float:
    """Mutual information in bits between a uniform input and the output."""
    q = 0.5 * (w.p0 + w.p1)
    total = 0.0
    for row in (w.p0, w.p1):
        mask = row > 0.0
        total += 0.5 * float(np.sum(row[mask] * np.log2(row[mask] / q[mask])))
    return total


def combine_minus(w1: Channel, w2: Channel) -> Channel:
    """Single-step check-side synthesis of two channels.

    The output alphabet is the product alphabet ``(y1, y2)`` flattened as
    ``y1 * m2 + y2``, and

    ``W(y1, y2 | u) = 1/2 sum_v W1(y1 | u xor v) W2(y2 | v)``.
    """
    m = w1.alphabet_size * w2.alphabet_size
    if m > ALPHABET_CAP:
        raise ValueError(f"alphabet size {m} exceeds cap {ALPHABET_CAP}")
    p0 = 0.5 * (np.outer(w1.p0, w2.p0) + np.outer(w1.p1, w2.p1))
    p1 = 0.5 * (np.outer(w1.p1, w2.p0) + np.outer(w1.p0, w2.p1))
    return Channel("generic", {}, p0.ravel(), p1.ravel())


def combine_plus(w1: Channel, w2: Channel) -> Channel:
    """Single-step variable-side synthesis of two channels.

    The output alphabet is ``(u0, y1, y2)`` flattened as
    ``(u0 * m1 + y1) * m2 + y2``, and

    ``W(y1, y2, u0 | u1) = 1/2 W1(y1 | u0 xor u1) W2(y2 | u1)``.
    """
    m = 2 * w1.alphabet_size * w2.alphabet_size
    if m > ALPHABET_CAP:
        raise ValueError(f"alphabet size {m} exceeds cap {ALPHABET_CAP}")
    rows = {0: np.empty(m), 1: np.empty(m)}
    half = m // 2
    for u1 in (0, 1):
        w1_rows = (w1.p0, w1.p1) if u1 == 0 else (w1.p1, w1.p0)
        w2_row = w2.p0 if u1 == 0 else w2.p1
        # u0 = 0 block then u0 = 1 block
        rows[u1][:half] = 0.5 * np.outer(w1_rows[0], w2_row).ravel()
        rows[u1][half:] = 0.5 * np.outer(w1_rows[1], w2_row).ravel()
    return Channel("generic", {}, rows[0], rows[1])


def sample(w: Channel, x: int, rng: np.random.Generator) -> int:
    """Draw one output symbol given input bit ``x``.

    Consumes exactly one uniform draw from ``rng`` via inverse CDF.
    """
    if x not in (0, 1):
        raise ValueError(f"input bit must be 0 or 1, got {x}")
    row = w.p0 if x == 0 else w.p1
    return int(np.searchsorted(np.cumsum(row), rng.random(), side="right"))


def sample_word(w: Channel, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one output symbol per input bit, one uniform draw per position."""
    x = np.asarray(x)
    draws = rng.random(x.shape)
    c0 = np.cumsum(w.p0)
    c1 = np.cumsum(w.p1)
    y0 = np.searchsorted(c0, draws, side="right")
    y1 = np.searchsorted(c1, draws, side="right")
    return np.where(x == 0, y0, y1).astype(np.int64)


def llr_table(w: Channel) -> np.ndarray:
    """Per-symbol log-likelihood ratios ``ln(W(y|0) / W(y|1))``.

    Symbols impossible under both inputs map to NaN; observing one is an
    invalid observation and is rejected by the decoder.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        table = np.log(w.p0) - np.log(w.p1)
        table[(w.p0 == 0.0) & (w.p1 == 0.0)] = np.nan
    return table


def channel_to_dict(w: Channel) -> dict:
    """JSON-ready description: kind, params, and both probability rows."""
    return {
        "kind": w.kind,
        "params": dict(w.params),
        "p0": [float(v) for v in w.p0],
        "p1": [float(v) for v in w.p1],
    }


def channel_from_dict(desc: dict) -> Channel:
    """Rebuild a channel from :func:`channel_to_dict` output.

    Named kinds are reconstructed from their params so the table matches
    the constructor bit for bit; generic kinds take the rows verbatim.
    """
    kind = desc["kind"]
    if kind == "bsc":
        return make_bsc(desc["params"]["D"])
    if kind == "bec":
        return make_bec(desc["params"]["epsilon"])
    if kind == "bsec":
        return make_bsec(desc["params"]["p"], desc["params"]["D"])
    if kind == "generic":
        return make_channel(desc["p0"], desc["p1"])
    raise ValueError(f"unknown channel kind {kind!r}")


def binary_entropy(x: float) -> float:
    """Binary entropy in bits, with ``h2(0) = h2(1) = 0``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"argument must lie in [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def binary_entropy_inverse(r: float) -> float:
    """Inverse of :func:`binary_entropy` on [0, 1/2]."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {r}")
    if r == 0.0:
        return 0.0
    if r == 1.0:
        return 0.5
    return float(brentq(lambda x: binary_entropy(x) - r, 0.0, 0.5, xtol=1e-15))


def rate_distortion_bss(d: float) -> float:
    """Rate-distortion function of the uniform binary source, ``1 - h2(D)``."""
    if not 0.0 <= d <= 0.5:
        raise ValueError(f"distortion must lie in [0, 1/2], got {d}")
    return 1.0 - binary_entropy(d)


def star(d: float, p: float) -> float:
    """Binary convolution ``D * (1-p) + p * (1-D)``."""
    return d * (1.0 - p) + p * (1.0 - d)


def r_wz(d: float, p: float) -> float:
    """Side-information rate target ``h2(D star p) - h2(D)``."""
    return binary_entropy(star(d, p)) - binary_entropy(d)


def r_gp(d: float, p: float) -> float:
    """Dirty-paper rate target ``h2(D) - h2(p)``."""
    return binary_entropy(d) - binary_entropy(p)


def storage_capacity(p: float, d: float) -> float:
    """Rewritable-memory rate target ``(1 - p) (1 - h2(D))``."""
    return (1.0 - p) * (1.0 - binary_entropy(d))

"""Reliability profiles, frozen-set selection, gap tables, and the branching
channel process.

A *reliability profile* assigns each of the ``N = 2**n`` synthetic indices its
reliability value ``z[i]`` (the Bhattacharyya-style affinity between the two
conditional laws seen at decision point ``i``).  Three construction methods
are provided:

- ``z_profile_bec``: exact closed-form recursion, erasure channels only;
- ``z_profile_enum``: exact brute-force enumeration, ``n <= 3``, any channel;
- ``z_profile_monte_carlo``: unbiased sampling estimate for the symmetric
  channel kinds, any practical ``n``.

Profiles feed frozen-set selection (rate-targeted or threshold-based), nested
frozen-set pairs for the binning schemes, and the gap tables used to study
finite-length rate/distortion gaps.  ``tree_process_sample`` simulates the
branching channel process that underlies the polarization argument, with
explicit channel tables at every step.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _io
from ._llr import check_op
from ._parallel import run_chunked, trial_stream
from .channel import (
    Channel,
    bhattacharyya,
    channel_from_dict,
    channel_to_dict,
    combine_minus,
    combine_plus,
    llr_table,
    make_bec,
    sample_word,
    SYMMETRIC_KINDS,
)
from .transform import polar_transform

__all__ = [
    "ConstructionParams",
    "GapTable",
    "ReliabilityProfile",
    "TreeProcessTrace",
    "frozen_count_for_rate",
    "gap_table",
    "load_profile",
    "nested_frozen",
    "posterior_bias_enum",
    "profile_from_dict",
    "profile_to_dict",
    "save_profile",
    "select_frozen",
    "select_frozen_threshold",
    "tree_process_sample",
    "vanishing_threshold",
    "z_profile_bec",
    "z_profile_enum",
    "z_profile_monte_carlo",
]

PROFILE_VERSION = 1
PROFILE_METHODS = ("bec-exact", "enum-exact", "monte-carlo")

#: Largest exponent accepted by the exact enumeration (cost ~ m**N * 2**N).
ENUM_MAX_N = 3
#: Cap on the (input words) x (output words) likelihood table, in entries.
_ENUM_TABLE_CAP = 1 << 26

#: Per-sample ceiling applied to the Monte Carlo statistic exp(-llr/2) before
#: averaging; guards floating overflow for extremely reliable indices.  Every
#: application is counted in ``ReliabilityProfile.clamp_events``.
MC_CLAMP = 10.0

_BEC_MAX_N = 24
_MC_MAX_N = 16


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReliabilityProfile:
    """Per-index reliability values for one channel at blocklength ``2**n``.

    ``z[i]`` lies in ``[0, 1]``; values near 0 mark indices that decode
    almost noiselessly, values near 1 mark indices that carry almost no
    information.  ``method`` records how the values were obtained.  For
    Monte Carlo profiles ``trials``/``seed`` identify the estimate exactly
    and ``clamp_events`` counts how many per-sample statistics hit the
    ``MC_CLAMP`` ceiling (an audit counter; it is not serialized).
    """

    n: int
    channel: Channel
    z: np.ndarray
    method: str
    trials: int = 0
    seed: int | None = None
    clamp_events: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"exponent must be nonnegative, got {self.n}")
        if self.method not in PROFILE_METHODS:
            raise ValueError(f"unknown profile method {self.method!r}")
        z = np.ascontiguousarray(np.asarray(self.z, dtype=np.float64))
        if z.shape != (1 << self.n,):
            raise ValueError(
                f"profile needs {1 << self.n} values, got shape {z.shape}"
            )
        if not np.all((z >= 0.0) & (z <= 1.0)):
            raise ValueError("reliability values must lie in [0, 1]")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        if self.method == "monte-carlo":
            if self.trials < 1:
                raise ValueError("Monte Carlo profiles need trials >= 1")
            if self.seed is None:
                raise ValueError("Monte Carlo profiles need a seed")
        else:
            if self.trials != 0:
                raise ValueError("exact profiles must have trials == 0")
            if self.seed is not None:
                raise ValueError("exact profiles must not carry a seed")

    @property
    def size(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class ConstructionParams:
    """Knobs for frozen-set selection.

    ``delta_n`` is the reliability threshold used by
    :func:`select_frozen_threshold`; ``beta`` is the sub-square-root scaling
    exponent of the vanishing-threshold schedule (see
    :func:`vanishing_threshold`); ``rate_target`` is the code rate used by
    rate-targeted selection.
    """

    beta: float
    delta_n: float
    rate_target: float

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 1/2), got {self.beta}")
        if not 0.0 < self.delta_n < 1.0:
            raise ValueError(f"delta_n must lie in (0, 1), got {self.delta_n}")
        if not 0.0 <= self.rate_target <= 1.0:
            raise ValueError(
                f"rate_target must lie in [0, 1], got {self.rate_target}"
            )


@dataclass(frozen=True, eq=False)
class GapTable:
    """Partial-sum table over a profile's reliabilities in increasing order.

    ``sorted_z`` holds the profile values sorted increasingly.  For
    ``i = 0..N``:

    - ``m[i]``: sum of the ``i`` smallest values — bounds the distortion
      penalty of freezing everything but the ``i`` most reliable indices;
    - ``M[i]``: sum of ``sqrt(2 * (1 - z))`` over the ``i`` largest values —
      bounds the rate penalty left in the ``i`` least reliable indices.
    """

    sorted_z: np.ndarray
    m: np.ndarray
    M: np.ndarray

    def __post_init__(self) -> None:
        sorted_z = np.asarray(self.sorted_z, dtype=np.float64)
        m = np.asarray(self.m, dtype=np.float64)
        big_m = np.asarray(self.M, dtype=np.float64)
        if sorted_z.ndim != 1:
            raise ValueError("sorted_z must be one-dimensional")
        size = sorted_z.size
        if m.shape != (size + 1,) or big_m.shape != (size + 1,):
            raise ValueError("m and M must have one more entry than sorted_z")
        if np.any(np.diff(sorted_z) < 0.0):
            raise ValueError("sorted_z must be nondecreasing")
        if not np.all((sorted_z >= 0.0) & (sorted_z <= 1.0)):
            raise ValueError("sorted_z values must lie in [0, 1]")
        if m[0] != 0.0 or big_m[0] != 0.0:
            raise ValueError("m[0] and M[0] must be zero")
        if np.any(np.diff(m) < 0.0) or np.any(np.diff(big_m) < 0.0):
            raise ValueError("m and M must be nondecreasing")
        for name, arr in (("sorted_z", sorted_z), ("m", m), ("M", big_m)):
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True, eq=False)
class TreeProcessTrace:
    """One sampled path of the branching channel process.

    Level ``k+1`` applies the check-side synthesis when ``branch_bits[k]``
    is 0 and the variable-side synthesis when it is 1; ``z_path[k]`` is the
    reliability value of the channel at level ``k``.  Variable-side steps
    square the reliability exactly, and ``z_path`` records that identity
    directly; check-side entries are evaluated from the synthesized table.
    """

    depth: int
    branch_bits: np.ndarray
    z_path: np.ndarray
    channels: tuple[Channel, ...]

    def __post_init__(self) -> None:
        bits = np.asarray(self.branch_bits, dtype=np.uint8)
        z = np.asarray(self.z_path, dtype=np.float64)
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if bits.shape != (self.depth,):
            raise ValueError("branch_bits must hold one bit per level")
        if np.any(bits > 1):
            raise ValueError("branch_bits must be 0/1")
        if z.shape != (self.depth + 1,):
            raise ValueError("z_path must hold depth + 1 values")
        if not np.all((z >= 0.0) & (z <= 1.0)):
            raise ValueError("z_path values must lie in [0, 1]")
        if len(self.channels) != self.depth + 1:
            raise ValueError("channels must hold depth + 1 entries")
        for name, arr in (("branch_bits", bits), ("z_path", z)):
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def x_path(self) -> np.ndarray:
        """Companion process ``1 - z**2`` along the path."""
        return 1.0 - self.z_path**2


# ---------------------------------------------------------------------------
# profile construction
# ---------------------------------------------------------------------------


def z_profile_bec(epsilon: float, n: int) -> ReliabilityProfile:
    """Exact reliability profile of an erasure channel.

    Erasure channels stay erasure channels under both synthesis branches, so
    each index's value follows by iterating ``z -> 2z - z**2`` (check side,
    index bit 0) and ``z -> z**2`` (variable side, index bit 1) along the
    index's bits, most significant first.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {epsilon}")
    if not 0 <= n <= _BEC_MAX_N:
        raise ValueError(f"exponent must lie in [0, {_BEC_MAX_N}], got {n}")
    z = np.array([epsilon], dtype=np.float64)
    for _ in range(n):
        nxt = np.empty(2 * z.size, dtype=np.float64)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return ReliabilityProfile(n=n, channel=make_bec(epsilon), z=z, method="bec-exact")


def _joint_likelihoods(w: Channel, n: int) -> np.ndarray:
    """Dense table ``T[word, output] = P(output word | input word)``.

    Row ``word`` (bits of the decision vector, index 0 in the most
    significant position) holds the product-channel likelihood of every
    output word, with output words enumerated positionally (first position
    varies slowest).
    """
    size = 1 << n
    m = w.alphabet_size
    if (1 << size) * m**size > _ENUM_TABLE_CAP:
        raise ValueError(
            "enumeration table would exceed "
            f"{_ENUM_TABLE_CAP} entries (n={n}, alphabet={m})"
        )
    words = np.arange(1 << size, dtype=np.int64)
    shifts = size - 1 - np.arange(size)
    u = ((words[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    x = polar_transform(u)
    rows = np.stack([w.p0, w.p1])
    table = np.ones((1 << size, 1), dtype=np.float64)
    for k in range(size):
        table = (table[:, :, None] * rows[x[:, k]][:, None, :]).reshape(
            1 << size, -1
        )
    return table


def _conditional_tables(table: np.ndarray, n: int, i: int) -> np.ndarray:
    """Index-``i`` conditional law from the dense table.

    Returns ``V[prefix, b, output]``: the probability of seeing ``output``
    and the conditioning prefix ``u[0..i-1] = prefix`` when ``u[i] = b``,
    with the remaining positions uniform.  Shape ``(2**i, 2, outputs)``.
    """
    size = 1 << n
    v = table.reshape(1 << i, 2, 1 << (size - 1 - i), -1).sum(axis=2)
    return v / (1 << (size - 1))


def z_profile_enum(w: Channel, n: int) -> ReliabilityProfile:
    """Exact reliability profile by brute-force enumeration (``n <= 3``).

    Sums the affinity ``sqrt(P(.|0) P(.|1))`` of each decision point over
    every output word and conditioning prefix.  Exponential cost; serves as
    the ground-truth oracle for the other construction methods.
    """
    if not 0 <= n <= ENUM_MAX_N:
        raise ValueError(f"exponent must lie in [0, {ENUM_MAX_N}], got {n}")
    size = 1 << n
    table = _joint_likelihoods(w, n)
    z = np.empty(size, dtype=np.float64)
    for i in range(size):
        v = _conditional_tables(table, n, i)
        z[i] = float(np.sum(np.sqrt(v[:, 0, :] * v[:, 1, :])))
    np.clip(z, 0.0, 1.0, out=z)
    return ReliabilityProfile(n=n, channel=w, z=z, method="enum-exact")


def posterior_bias_enum(w: Channel, n: int) -> np.ndarray:
    """Exact mean absolute posterior bias ``E |1/2 - P(u_i = 0 | seen)|``.

    For each index the expectation runs over the joint law of the output
    word and the conditioning prefix under uniform inputs.  A value near
    1/2 means the bit is almost determined by the observation; a value near
    0 means the posterior stays almost uniform, which is what makes an
    index safe to drive by rounding.  Enumeration-sized inputs only.
    """
    if not 0 <= n <= ENUM_MAX_N:
        raise ValueError(f"exponent must lie in [0, {ENUM_MAX_N}], got {n}")
    size = 1 << n
    table = _joint_likelihoods(w, n)
    bias = np.empty(size, dtype=np.float64)
    for i in range(size):
        v = _conditional_tables(table, n, i)
        v0 = v[:, 0, :]
        v1 = v[:, 1, :]
        total = v0 + v1
        mass = 0.5 * total
        with np.errstate(invalid="ignore", divide="ignore"):
            posterior = np.where(total > 0.0, v0 / total, 0.5)
        bias[i] = float(np.sum(mass * np.abs(0.5 - posterior)))
    return bias


def _genie_decision_llrs(lam: np.ndarray) -> np.ndarray:
    """Decision-point LLRs at every index under all-zero conditioning.

    ``lam`` holds per-position channel LLRs, one column per trial, in
    natural output order.  Index ``i`` consumes its bits from the channel
    side inward: bit 0 applies the check combine of adjacent pairs, bit 1
    the sum (the variable combine with zero partial sums).
    """
    if lam.shape[0] == 1:
        return lam
    a = lam[0::2]
    b = lam[1::2]
    half = lam.shape[0] // 2
    out = np.empty_like(lam)
    out[:half] = _genie_decision_llrs(check_op(a, b))
    out[half:] = _genie_decision_llrs(a + b)
    return out


def z_profile_monte_carlo(
    w: Channel,
    n: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> ReliabilityProfile:
    """Unbiased sampled reliability profile for symmetric channel kinds.

    Symmetry lets the estimate condition on the all-zero input: each trial
    transmits the all-zero word, runs the all-zero-conditioned decision
    recursion, and scores ``exp(-llr/2)`` per index, whose mean over trials
    estimates ``z[i]``.  Statistics are clamped to ``MC_CLAMP`` before
    averaging (clamps are counted in ``clamp_events``) and final means are
    clipped into ``[0, 1]``.

    Each trial consumes its own counter-based stream: ``2**n`` uniforms for
    the channel outputs, in position order.  Results are a deterministic
    function of ``(seed, trial index)`` alone; ``workers`` only adds
    threads.  Per-chunk sums are combined with exact summation per index,
    so aggregation order cannot change the result.
    """
    if w.kind not in SYMMETRIC_KINDS:
        raise ValueError(
            f"Monte Carlo estimation needs a symmetric kind, got {w.kind!r}"
        )
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= n <= _MC_MAX_N:
        raise ValueError(f"exponent must lie in [0, {_MC_MAX_N}], got {n}")
    size = 1 << n
    table = llr_table(w)
    zeros = np.zeros(size, dtype=np.uint8)

    def chunk_fn(start: int, count: int) -> tuple[np.ndarray, int]:
        lam = np.empty((size, count), dtype=np.float64)
        for j in range(count):
            rng = trial_stream(seed, start + j)
            y = sample_word(w, zeros, rng)
            lam[:, j] = table[y]
        llrs = _genie_decision_llrs(lam)
        with np.errstate(over="ignore"):
            stat = np.exp(-0.5 * llrs)
        clamped = int(np.count_nonzero(stat > MC_CLAMP))
        np.clip(stat, 0.0, MC_CLAMP, out=stat)
        return stat.sum(axis=1), clamped

    parts = run_chunked(trials, workers, chunk_fn)
    sums = np.stack([part[0] for part in parts], axis=1)
    clamp_events = sum(part[1] for part in parts)
    z = np.array([math.fsum(row) for row in sums]) / trials
    np.clip(z, 0.0, 1.0, out=z)
    return ReliabilityProfile(
        n=n,
        channel=w,
        z=z,
        method="monte-carlo",
        trials=trials,
        seed=int(seed),
        clamp_events=clamp_events,
    )


# ---------------------------------------------------------------------------
# frozen-set selection
# ---------------------------------------------------------------------------


def frozen_count_for_rate(n: int, rate: float) -> int:
    """Frozen-set size for a rate-``R`` code: ``N - round(R * N)``."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    size = 1 << n
    return size - int(round(rate * size))


def select_frozen(profile: ReliabilityProfile, num_frozen: int) -> np.ndarray:
    """Indices of the ``num_frozen`` largest reliabilities, sorted ascending.

    Ties break toward the smaller index, so selection is deterministic.
    """
    size = profile.size
    if not 0 <= num_frozen <= size:
        raise ValueError(
            f"num_frozen must lie in [0, {size}], got {num_frozen}"
        )
    order = np.argsort(-profile.z, kind="stable")
    return np.sort(order[:num_frozen]).astype(np.int64)


def select_frozen_threshold(
    profile: ReliabilityProfile,
    params: ConstructionParams,
    mode: str,
) -> np.ndarray:
    """Threshold-based frozen set.

    ``source`` mode freezes indices with ``z >= 1 - 2 * delta_n**2`` (the
    almost-deterministic indices a quantizer must not spend rate on);
    ``channel`` mode freezes indices with ``z >= delta_n`` (everything that
    is not almost noiseless).
    """
    if mode == "source":
        threshold = 1.0 - 2.0 * params.delta_n**2
    elif mode == "channel":
        threshold = params.delta_n
    else:
        raise ValueError(f"mode must be 'source' or 'channel', got {mode!r}")
    return np.flatnonzero(profile.z >= threshold).astype(np.int64)


def vanishing_threshold(n: int, beta: float) -> float:
    """Blocklength-indexed threshold schedule ``2**(-N**beta) / (2N)``.

    Decays faster than any polynomial but slower than ``2**(-sqrt(N))``
    for ``beta < 1/2``; used with :func:`select_frozen_threshold` when
    studying asymptotic-style selection rules.
    """
    if not 0.0 < beta < 0.5:
        raise ValueError(f"beta must lie in (0, 1/2), got {beta}")
    size = 1 << n
    return 2.0 ** (-(size**beta)) / (2.0 * size)


def nested_frozen(
    profile_inner: ReliabilityProfile,
    profile_outer: ReliabilityProfile,
    num_frozen_inner: int,
    num_frozen_outer: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Nested frozen-set pair ``F_small <= F_large`` across two profiles.

    ``F_small`` is the plain selection of ``num_frozen_inner`` indices from
    ``profile_inner``; ``F_large`` extends it with the largest remaining
    reliabilities of ``profile_outer`` until it holds ``num_frozen_outer``
    indices.  Containment holds by construction, which is what the binning
    schemes need from their code pairs.
    """
    if profile_inner.n != profile_outer.n:
        raise ValueError(
            "profiles must share the exponent, got "
            f"{profile_inner.n} and {profile_outer.n}"
        )
    size = profile_inner.size
    if not 0 <= num_frozen_inner <= num_frozen_outer <= size:
        raise ValueError(
            "need 0 <= num_frozen_inner <= num_frozen_outer <= "
            f"{size}, got {num_frozen_inner} and {num_frozen_outer}"
        )
    small = select_frozen(profile_inner, num_frozen_inner)
    member = np.zeros(size, dtype=bool)
    member[small] = True
    order = np.argsort(-profile_outer.z, kind="stable")
    extra = order[~member[order]][: num_frozen_outer - num_frozen_inner]
    large = np.sort(np.concatenate([small, extra])).astype(np.int64)
    return small, large


# ---------------------------------------------------------------------------
# gap tables and the branching process
# ---------------------------------------------------------------------------


def gap_table(profile: ReliabilityProfile) -> GapTable:
    """Partial-sum table of the profile's reliabilities (see `GapTable`)."""
    sorted_z = np.sort(profile.z)
    m = np.concatenate([[0.0], np.cumsum(sorted_z)])
    roots = np.sqrt(2.0 * (1.0 - sorted_z))
    big_m = np.concatenate([[0.0], np.cumsum(roots[::-1])])
    return GapTable(sorted_z=sorted_z, m=m, M=big_m)


def tree_process_sample(w0: Channel, depth: int, seed: int) -> TreeProcessTrace:
    """Sample one path of the branching channel process.

    Draws one fair bit per level (bit 1: variable-side synthesis, bit 0:
    check-side), evolving the channel against an independent copy of
    itself.  Erasure channels evolve in closed form at any depth; other
    kinds synthesize explicit tables, whose alphabets grow multiplicatively
    until the alphabet cap raises.  Variable-side reliability entries use
    the exact squaring identity; check-side entries are evaluated from the
    synthesized table.
    """
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    rng = trial_stream(seed, 0)
    bits = rng.integers(0, 2, size=depth).astype(np.uint8)
    if w0.kind == "bec":
        eps = float(w0.params["epsilon"])
        channels = [w0]
        z_path = [eps]
        for b in bits:
            eps = eps * eps if b else 2.0 * eps - eps * eps
            channels.append(make_bec(eps))
            z_path.append(eps)
    else:
        channels = [w0]
        z_path = [bhattacharyya(w0)]
        for b in bits:
            current = channels[-1]
            if b:
                channels.append(combine_plus(current, current))
                z_path.append(z_path[-1] ** 2)
            else:
                channels.append(combine_minus(current, current))
                z_path.append(bhattacharyya(channels[-1]))
    return TreeProcessTrace(
        depth=depth,
        branch_bits=bits,
        z_path=np.array(z_path, dtype=np.float64),
        channels=tuple(channels),
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def profile_to_dict(profile: ReliabilityProfile) -> dict:
    """JSON-ready description; Monte Carlo profiles carry their seed."""
    doc: dict = {
        "version": PROFILE_VERSION,
        "n": profile.n,
        "channel": channel_to_dict(profile.channel),
        "method": profile.method,
        "trials": profile.trials,
    }
    if profile.method == "monte-carlo":
        doc["seed"] = int(profile.seed)
    doc["z"] = profile.z
    return doc


def profile_from_dict(doc: dict) -> ReliabilityProfile:
    if doc.get("version") != PROFILE_VERSION:
        raise ValueError(f"unsupported profile version {doc.get('version')!r}")
    seed = doc.get("seed")
    return ReliabilityProfile(
        n=int(doc["n"]),
        channel=channel_from_dict(doc["channel"]),
        z=np.asarray(doc["z"], dtype=np.float64),
        method=str(doc["method"]),
        trials=int(doc["trials"]),
        seed=None if seed is None else int(seed),
    )


def save_profile(profile: ReliabilityProfile, path) -> None:
    Path(path).write_text(_io.dumps(profile_to_dict(profile)) + "\n")


def load_profile(path) -> ReliabilityProfile:
    return profile_from_dict(json.loads(Path(path).read_text()))

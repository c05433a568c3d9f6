"""End-to-end nested-code pipelines built from pairs of polar codes.

Four schemes share one structure: two frozen sets, one containing the other,
so the codes they define are nested.  The smaller frozen set defines the
richer code; the positions in the set difference carry the message or coset
index.

- ``wz_*``: lossy compression with side information at the decoder.  The
  encoder quantizes the source with the inner (source) code and transmits
  only the decisions on ``F_c \\ F_s``; the decoder channel-decodes the
  side-information word with the outer (channel) code.
- ``gp_*``: channel coding with state known to the encoder.  The encoder
  quantizes the state word onto a coset selected by the message and sends
  the quantization error as the channel input; the decoder sees a clean
  channel code.
- ``storage_*``: writing into memory cells with stuck-at defects known to
  the writer, read back through a noisy channel.
- ``helper_*``: lossless recovery of a source from its syndrome when a
  quantized version of a correlated sequence is available.

Every trial runner is deterministic in ``(master_seed, trial index)`` and
independent of the worker count; the per-trial draw order is documented on
each runner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import run_chunked, trial_stream
from .channel import Channel, binary_entropy, symmetric_mutual_info
from .codec import (
    CodeSpec,
    _leaf_llrs,
    _sample_symbols,
    _ScEngine,
    bss_source,
    defect_state_source,
    sc_pass,
    source_decode,
    source_encode,
)
from .construction import gap_table, nested_frozen
from .transform import extract, polar_transform

__all__ = [
    "DIRECTION_CHANNEL_IN_SOURCE",
    "DIRECTION_SOURCE_IN_CHANNEL",
    "NestedCodeSpec",
    "SchemeResult",
    "design_gp",
    "design_one_helper",
    "design_storage",
    "design_wz",
    "gp_decode",
    "gp_encode",
    "gp_trials",
    "helper_decode",
    "helper_quantize",
    "helper_syndrome",
    "one_helper_trials",
    "run_gp",
    "run_one_helper",
    "run_storage",
    "run_wz",
    "storage_read",
    "storage_trials",
    "storage_write",
    "wz_decode",
    "wz_encode",
    "wz_trials",
]

#: Inner set is the source code's (quantizer's) frozen set: F_s inside F_c.
DIRECTION_SOURCE_IN_CHANNEL = "source-in-channel"
#: Inner set is the channel code's frozen set: F_c inside F_s.
DIRECTION_CHANNEL_IN_SOURCE = "channel-in-source"

_DIRECTIONS = (DIRECTION_SOURCE_IN_CHANNEL, DIRECTION_CHANNEL_IN_SOURCE)


@dataclass(frozen=True, eq=False)
class NestedCodeSpec:
    """Two nested frozen sets plus the metric channel for each role.

    ``direction`` declares which set contains which: the source set inside
    the channel set for side-information problems, the reverse for
    state-known-to-encoder problems.  ``metric_source`` drives the
    quantization pass, ``metric_channel`` the decoding pass.  The message
    (coset index) lives on the difference of the two sets.
    """

    n: int
    f_s: np.ndarray
    f_c: np.ndarray
    direction: str
    metric_source: Channel
    metric_channel: Channel

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"exponent must be nonnegative, got {self.n}")
        if self.direction not in _DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        size = 1 << self.n
        arrays = {}
        for name in ("f_s", "f_c"):
            arr = np.asarray(getattr(self, name), dtype=np.int64).ravel()
            if arr.size and np.any(arr[:-1] >= arr[1:]):
                raise ValueError(f"{name} must be strictly increasing")
            if arr.size and (arr[0] < 0 or arr[-1] >= size):
                raise ValueError(f"{name} indices outside [0, {size})")
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        inner, outer = self.inner_outer()
        if not np.isin(inner, outer).all():
            raise ValueError(
                f"containment violated: direction {self.direction} requires "
                f"{'f_s within f_c' if self.direction == DIRECTION_SOURCE_IN_CHANNEL else 'f_c within f_s'}"
            )

    def inner_outer(self) -> tuple[np.ndarray, np.ndarray]:
        if self.direction == DIRECTION_SOURCE_IN_CHANNEL:
            return self.f_s, self.f_c
        return self.f_c, self.f_s

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def message_set(self) -> np.ndarray:
        """Positions carrying the message/coset index, ascending."""
        inner, outer = self.inner_outer()
        return np.setdiff1d(outer, inner)

    @property
    def message_length(self) -> int:
        return int(self.message_set.size)

    @property
    def rate_message(self) -> float:
        return self.message_length / self.size


@dataclass(frozen=True)
class SchemeResult:
    """Measured operating point of one scheme run."""

    rate_encoder: float
    rate_helper: float | None
    distortion: float
    distortion_stderr: float
    block_error: float
    block_error_stderr: float
    trials: int
    master_seed: int

    def __post_init__(self) -> None:
        for name in ("rate_encoder", "distortion", "block_error"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0, 1]")
        if self.rate_helper is not None and not 0.0 <= self.rate_helper <= 1.0:
            raise ValueError(f"rate_helper {self.rate_helper} outside [0, 1]")

    def to_dict(self) -> dict:
        doc: dict = {"rate_encoder": self.rate_encoder}
        if self.rate_helper is not None:
            doc["rate_helper"] = self.rate_helper
        doc.update(
            distortion=self.distortion,
            distortion_stderr=self.distortion_stderr,
            block_error=self.block_error,
            block_error_stderr=self.block_error_stderr,
            trials=self.trials,
            master_seed=self.master_seed,
        )
        return doc


# ---------------------------------------------------------------------------
# single-word operations
# ---------------------------------------------------------------------------


def _require(nested: NestedCodeSpec, direction: str) -> None:
    if nested.direction != direction:
        raise ValueError(
            f"scheme needs direction {direction!r}, got {nested.direction!r}"
        )


def _preset_values(nested: NestedCodeSpec, message: np.ndarray) -> np.ndarray:
    """Frozen values for the outer set: zeros on the inner set, message bits
    on the difference, both in ascending index order."""
    inner, outer = nested.inner_outer()
    message = np.asarray(message, np.uint8).ravel()
    if message.size != nested.message_length:
        raise ValueError(
            f"expected {nested.message_length} message bits, got {message.size}"
        )
    values = np.zeros(outer.size, np.uint8)
    values[np.isin(outer, nested.message_set)] = message
    return values


def wz_encode(
    y: np.ndarray, nested: NestedCodeSpec, rng: np.random.Generator
) -> np.ndarray:
    """Compress a source word given decoder side information.

    Quantizes ``y`` with the source code (frozen set ``f_s``, all zeros)
    and returns the decisions on ``f_c \\ f_s`` — the only part the decoder
    cannot reproduce itself.  Rate: ``|f_c \\ f_s| / N``.
    """
    _require(nested, DIRECTION_SOURCE_IN_CHANNEL)
    spec = CodeSpec(
        nested.n, nested.f_s, np.zeros(nested.f_s.size, np.uint8),
        nested.metric_source,
    )
    trace = sc_pass(y, spec, "randomized-rounding", rng)
    return extract(trace.decisions, nested.message_set)


def wz_decode(
    y_side: np.ndarray, v: np.ndarray, nested: NestedCodeSpec
) -> np.ndarray:
    """Reconstruct the quantized codeword from side information and ``v``.

    Runs the channel code (frozen set ``f_c``) over the side-information
    word with frozen values zero on ``f_s`` and ``v`` on the difference,
    and returns the reconstruction ``x_hat = u H``.
    """
    _require(nested, DIRECTION_SOURCE_IN_CHANNEL)
    spec = CodeSpec(
        nested.n, nested.f_c, _preset_values(nested, v), nested.metric_channel
    )
    trace = sc_pass(y_side, spec, "map")
    return polar_transform(trace.decisions)


def gp_encode(
    s: np.ndarray,
    message: np.ndarray,
    nested: NestedCodeSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Channel input for a state word known to the encoder.

    Quantizes ``s`` onto the coset selected by ``message`` (zeros on
    ``f_c``, message bits on ``f_s \\ f_c``) and returns the quantization
    error ``x = s xor s'``, whose weight stays near the design distortion.
    Over the channel ``y = x xor s xor z`` the state cancels, so the
    receiver sees the quantization word ``s'`` through the noise alone.
    """
    _require(nested, DIRECTION_CHANNEL_IN_SOURCE)
    s = np.asarray(s, np.uint8)
    spec = CodeSpec(
        nested.n, nested.f_s, _preset_values(nested, message),
        nested.metric_source,
    )
    trace = sc_pass(s, spec, "randomized-rounding", rng)
    return polar_transform(trace.decisions) ^ s


def gp_decode(y: np.ndarray, nested: NestedCodeSpec) -> np.ndarray:
    """Message estimate from the channel output: decode the channel code
    (frozen set ``f_c``, zeros) and read the bits on ``f_s \\ f_c``."""
    _require(nested, DIRECTION_CHANNEL_IN_SOURCE)
    spec = CodeSpec(
        nested.n, nested.f_c, np.zeros(nested.f_c.size, np.uint8),
        nested.metric_channel,
    )
    trace = sc_pass(y, spec, "map")
    return extract(trace.decisions, nested.message_set)


def storage_write(
    state: np.ndarray,
    message: np.ndarray,
    nested: NestedCodeSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Stored word for a defect state (ternary: 0/1 stuck values, 2 free).

    Quantizes the state with the erasure-aware source metric so the stored
    word disagrees with only about a fraction ``D`` of the stuck cells,
    while carrying ``message`` on ``f_s \\ f_c``.
    """
    _require(nested, DIRECTION_CHANNEL_IN_SOURCE)
    state = np.asarray(state)
    if state.max(initial=0) >= nested.metric_source.alphabet_size:
        raise ValueError("state symbols outside the metric channel alphabet")
    spec = CodeSpec(
        nested.n, nested.f_s, _preset_values(nested, message),
        nested.metric_source,
    )
    trace = sc_pass(state, spec, "randomized-rounding", rng)
    return polar_transform(trace.decisions)


def storage_read(y: np.ndarray, nested: NestedCodeSpec) -> np.ndarray:
    """Message estimate from the read-out word (channel code on ``f_c``)."""
    return gp_decode(y, nested)


def helper_quantize(
    y_prime: np.ndarray, spec: CodeSpec, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Quantize the helper's sequence; returns (compressed bits, x')."""
    bits = source_encode(y_prime, spec, rng)
    return bits, source_decode(bits, spec)


def helper_syndrome(y: np.ndarray, frozen: np.ndarray) -> np.ndarray:
    """Syndrome of a source word: ``(y H)`` restricted to ``frozen``.

    The transform is an involution, so ``y H`` plays the role of
    ``y H^{-1}``; the syndrome pins the coset of ``y``.  Rate: ``|F| / N``.
    """
    return extract(polar_transform(np.asarray(y, np.uint8)), frozen)


def helper_decode(
    x_prime: np.ndarray,
    syndrome: np.ndarray,
    frozen: np.ndarray,
    channel: Channel,
) -> np.ndarray:
    """Recover the source word from its syndrome and the helper's word.

    Channel-decodes ``x_prime`` with the syndrome as frozen values under
    ``channel`` (the quantization noise composed with the correlation),
    returning ``y_hat = u H``.
    """
    x_prime = np.asarray(x_prime, np.uint8)
    n = int(x_prime.size - 1).bit_length()
    spec = CodeSpec(n, frozen, syndrome, channel)
    trace = sc_pass(x_prime, spec, "map")
    return polar_transform(trace.decisions)


# ---------------------------------------------------------------------------
# sizing
# ---------------------------------------------------------------------------


def _rate_counts(n: int, rate: float) -> int:
    size = 1 << n
    count = size - int(round(rate * size))
    return min(max(count, 0), size)


def _budgeted_frozen_count(
    profile, floor_count: int, bler_budget: float | None
) -> int:
    """Frozen count for a decoder-side code, protected by the union bound.

    Starts from the rate-targeted ``floor_count`` and grows the frozen
    set until the sum of the remaining (information-set) reliability
    values drops below ``bler_budget``.  At short blocklengths this
    absorbs the finite-length gap the rate margin alone cannot cover; as
    the blocklength grows the bound at any rate below capacity vanishes,
    so the floor takes over and pure rate sizing is recovered.  ``None``
    disables the protection.
    """
    if bler_budget is None:
        return floor_count
    table = gap_table(profile)
    max_info = int(np.searchsorted(table.m, bler_budget, side="right")) - 1
    return max(floor_count, profile.z.size - max_info)


def design_wz(
    profile_source,
    profile_channel,
    rate_margin: float,
    source_share: float = 0.5,
    bler_budget: float | None = 0.03,
) -> NestedCodeSpec:
    """Nested pair for side-information compression.

    The source code takes rate ``1 - h2(D) + margin_s`` (frozen set from
    the quantization-metric profile); the channel code takes rate
    ``1 - h2(D*p) - margin_c`` (topped up from the decoding-metric
    profile), grown if needed so its union bound meets ``bler_budget``.
    ``rate_margin`` is split between the two roles by ``source_share``;
    the message rate lands ``rate_margin`` above the ideal
    ``h2(D*p) - h2(D)`` plus whatever the budget adds at short lengths.
    """
    margin_s = rate_margin * source_share
    margin_c = rate_margin - margin_s
    n = profile_source.n
    num_s = _rate_counts(n, 1.0 - _entropy_of(profile_source) + margin_s)
    num_c = _budgeted_frozen_count(
        profile_channel,
        _rate_counts(n, 1.0 - _entropy_of(profile_channel) - margin_c),
        bler_budget,
    )
    f_s, f_c = nested_frozen(profile_source, profile_channel, num_s, num_c)
    return NestedCodeSpec(
        n=n,
        f_s=f_s,
        f_c=f_c,
        direction=DIRECTION_SOURCE_IN_CHANNEL,
        metric_source=profile_source.channel,
        metric_channel=profile_channel.channel,
    )


def design_gp(
    profile_channel,
    profile_source,
    rate_margin: float,
    source_share: float = 1.0,
    bler_budget: float | None = 0.03,
) -> NestedCodeSpec:
    """Nested pair for state-known-to-encoder coding.

    The channel code (inner) takes rate ``1 - h2(p) - margin_c``, grown
    if needed so its union bound meets ``bler_budget``; the source code
    (outer frozen set) takes rate ``1 - h2(D) + margin_s``.  The message
    rate lands ``rate_margin`` below ``h2(D) - h2(p)`` minus whatever
    the budget costs at short lengths.  By default the whole margin goes
    to the quantizer (``source_share = 1``), which keeps the channel
    input's weight near ``D``; the union-bound budget, not the rate
    margin, is what protects the decoder.
    """
    margin_s = rate_margin * source_share
    margin_c = rate_margin - margin_s
    n = profile_channel.n
    num_c = _budgeted_frozen_count(
        profile_channel,
        _rate_counts(n, 1.0 - _entropy_of(profile_channel) - margin_c),
        bler_budget,
    )
    num_s = _rate_counts(n, 1.0 - _entropy_of(profile_source) + margin_s)
    f_c, f_s = nested_frozen(profile_channel, profile_source, num_c, num_s)
    return NestedCodeSpec(
        n=n,
        f_s=f_s,
        f_c=f_c,
        direction=DIRECTION_CHANNEL_IN_SOURCE,
        metric_source=profile_source.channel,
        metric_channel=profile_channel.channel,
    )


def design_storage(
    profile_read,
    profile_state,
    rate_margin: float,
    source_share: float = 0.5,
    bler_budget: float | None = 0.03,
) -> NestedCodeSpec:
    """Nested pair for defect-state storage.

    The read code (inner, metric BSC(D)) takes rate ``1 - h2(D) -
    margin_c``, grown if needed so its union bound meets ``bler_budget``;
    the state-quantization code (outer frozen set, metric BSEC(p, D))
    takes rate ``i_sym(BSEC) + margin_s``.  The message rate lands
    ``rate_margin`` below ``(1 - p)(1 - h2(D))`` minus whatever the
    budget costs at short lengths.
    """
    margin_s = rate_margin * source_share
    margin_c = rate_margin - margin_s
    n = profile_read.n
    num_c = _budgeted_frozen_count(
        profile_read,
        _rate_counts(n, 1.0 - _entropy_of(profile_read) - margin_c),
        bler_budget,
    )
    num_s = _rate_counts(
        n, symmetric_mutual_info(profile_state.channel) + margin_s
    )
    f_c, f_s = nested_frozen(profile_read, profile_state, num_c, num_s)
    return NestedCodeSpec(
        n=n,
        f_s=f_s,
        f_c=f_c,
        direction=DIRECTION_CHANNEL_IN_SOURCE,
        metric_source=profile_state.channel,
        metric_channel=profile_read.channel,
    )


def design_one_helper(
    profile_source,
    profile_channel,
    rate_margin: float,
    source_share: float = 0.5,
    bler_budget: float | None = 0.03,
) -> NestedCodeSpec:
    """Nested pair for syndrome-plus-helper lossless recovery.

    Same construction as the side-information pair: the helper's
    quantization code is the inner code, the syndrome set is the outer
    frozen set of a code for the composed noise.
    """
    return design_wz(
        profile_source, profile_channel, rate_margin, source_share, bler_budget
    )


def _entropy_of(profile) -> float:
    """Entropy rate matching the profile's metric channel kind."""
    kind = profile.channel.kind
    if kind == "bsc":
        return binary_entropy(profile.channel.params["D"])
    if kind == "bec":
        return profile.channel.params["epsilon"]
    raise ValueError(f"no entropy-rate sizing rule for kind {kind!r}")


# ---------------------------------------------------------------------------
# trial runners
# ---------------------------------------------------------------------------


def _aggregate(
    rate_encoder: float,
    rate_helper: float | None,
    dist_fracs: np.ndarray,
    blocks: np.ndarray,
    trials: int,
    master_seed: int,
) -> SchemeResult:
    dist = float(dist_fracs.mean())
    dist_se = float(dist_fracs.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    blk = float(blocks.mean())
    blk_se = float(blocks.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return SchemeResult(
        rate_encoder=rate_encoder,
        rate_helper=rate_helper,
        distortion=dist,
        distortion_stderr=dist_se,
        block_error=blk,
        block_error_stderr=blk_se,
        trials=trials,
        master_seed=master_seed,
    )


def _batched_pass(
    n: int,
    frozen: np.ndarray,
    preset: np.ndarray,
    channel: Channel,
    words: np.ndarray,
    mode: str,
    draws: np.ndarray | None,
) -> np.ndarray:
    """Batched SC pass with per-column frozen values; returns decisions."""
    size = 1 << n
    count = words.shape[1]
    mask = np.zeros(size, dtype=bool)
    mask[frozen] = True
    full_preset = np.zeros((size, count), np.uint8)
    full_preset[frozen] = preset
    engine = _ScEngine(n, count)
    leaf = _leaf_llrs(words, channel)
    decisions, _ = engine.run(leaf, mask, full_preset, mode, draws)
    return decisions


def wz_trials(
    nested: NestedCodeSpec,
    p: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial side-information compression outcomes.

    Per trial (its own stream, in order): ``N`` uniforms for the source
    word, ``N`` uniforms for the side-information noise Ber(``p``), then
    one rounding uniform per non-frozen source index.  Returns the
    reconstruction distortion fractions ``d(y, x_hat)/N`` and the
    decoder-missed-the-codeword flags, both in trial order.
    """
    _require(nested, DIRECTION_SOURCE_IN_CHANNEL)
    size = nested.size
    info_s = np.setdiff1d(np.arange(size), nested.f_s)
    source = bss_source()
    f_s, f_c = nested.f_s, nested.f_c
    in_message = np.isin(f_c, nested.message_set)

    def chunk(start: int, count: int):
        y = np.empty((size, count), np.int64)
        noise = np.empty((size, count), np.uint8)
        draws = np.zeros((size, count))
        for k in range(count):
            rng = trial_stream(master_seed, start + k)
            y[:, k] = _sample_symbols(source.probs, rng, size)
            noise[:, k] = rng.random(size) < p
            draws[info_s, k] = rng.random(info_s.size)
        enc = _batched_pass(
            nested.n, f_s, np.zeros((f_s.size, count), np.uint8),
            nested.metric_source, y, "randomized-rounding", draws,
        )
        y_side = (y.astype(np.uint8) ^ noise).astype(np.int64)
        preset_c = np.zeros((f_c.size, count), np.uint8)
        preset_c[in_message] = enc[nested.message_set]
        dec = _batched_pass(
            nested.n, f_c, preset_c, nested.metric_channel, y_side, "map", None
        )
        x_hat = polar_transform(dec.T).T
        dist = np.count_nonzero(y != x_hat, axis=0)
        block = np.any(dec != enc, axis=0)
        return dist, block

    parts = run_chunked(trials, workers, chunk)
    dist = np.concatenate([p_[0] for p_ in parts]) / size
    blocks = np.concatenate([p_[1] for p_ in parts])
    return dist, blocks


def run_wz(
    nested: NestedCodeSpec,
    p: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> SchemeResult:
    """Side-information compression experiment; see :func:`wz_trials`."""
    dist, blocks = wz_trials(nested, p, trials, master_seed, workers)
    return _aggregate(
        nested.rate_message, None, dist, blocks.astype(np.float64),
        trials, master_seed,
    )


def gp_trials(
    nested: NestedCodeSpec,
    p: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial state-known-to-encoder outcomes over ``Y = X ^ S ^ Z``.

    Per trial (its own stream, in order): ``N`` uniforms for the state
    word, one uniform per message bit, one rounding uniform per non-frozen
    source index, then ``N`` uniforms for the channel noise Ber(``p``).
    The state cancels inside the channel: the receiver sees the encoder's
    quantization word plus noise.  Returns the input-weight fractions
    ``wt(x)/N`` and the message-error flags, both in trial order.
    """
    _require(nested, DIRECTION_CHANNEL_IN_SOURCE)
    size = nested.size
    info_s = np.setdiff1d(np.arange(size), nested.f_s)
    f_s, f_c = nested.f_s, nested.f_c
    msg_len = nested.message_length
    in_message = np.isin(f_s, nested.message_set)
    source = bss_source()

    def chunk(start: int, count: int):
        s = np.empty((size, count), np.int64)
        msg = np.empty((msg_len, count), np.uint8)
        draws = np.zeros((size, count))
        noise = np.empty((size, count), np.uint8)
        for k in range(count):
            rng = trial_stream(master_seed, start + k)
            s[:, k] = _sample_symbols(source.probs, rng, size)
            msg[:, k] = rng.random(msg_len) < 0.5
            draws[info_s, k] = rng.random(info_s.size)
            noise[:, k] = rng.random(size) < p
        preset_s = np.zeros((f_s.size, count), np.uint8)
        preset_s[in_message] = msg
        enc = _batched_pass(
            nested.n, f_s, preset_s, nested.metric_source, s,
            "randomized-rounding", draws,
        )
        s_quant = polar_transform(enc.T).T
        x = s_quant ^ s.astype(np.uint8)
        # y = x ^ s ^ z: the known state cancels against the input
        y = (s_quant ^ noise).astype(np.int64)
        dec = _batched_pass(
            nested.n, f_c, np.zeros((f_c.size, count), np.uint8),
            nested.metric_channel, y, "map", None,
        )
        weight = np.count_nonzero(x, axis=0)
        block = np.any(dec[nested.message_set] != msg, axis=0)
        return weight, block

    parts = run_chunked(trials, workers, chunk)
    weights = np.concatenate([p_[0] for p_ in parts]) / size
    blocks = np.concatenate([p_[1] for p_ in parts])
    return weights, blocks


def run_gp(
    nested: NestedCodeSpec,
    p: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> SchemeResult:
    """State-known-to-encoder coding experiment; see :func:`gp_trials`."""
    weights, blocks = gp_trials(nested, p, trials, master_seed, workers)
    return _aggregate(
        nested.rate_message, None, weights, blocks.astype(np.float64),
        trials, master_seed,
    )


def storage_trials(
    nested: NestedCodeSpec,
    read_noise: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial defect-state storage outcomes.

    Per trial (its own stream, in order): ``N`` uniforms for the defect
    state, one uniform per message bit, one rounding uniform per
    non-frozen source index, then ``N`` uniforms for the read noise
    Ber(``read_noise``).  Returns the per-trial fractions of stuck cells
    whose value disagrees with the stored word (0 when no cell is stuck)
    and the message read-back error flags, both in trial order.
    """
    _require(nested, DIRECTION_CHANNEL_IN_SOURCE)
    size = nested.size
    info_s = np.setdiff1d(np.arange(size), nested.f_s)
    f_s, f_c = nested.f_s, nested.f_c
    msg_len = nested.message_length
    in_message = np.isin(f_s, nested.message_set)
    p_state = nested.metric_source.params["p"]
    state_model = defect_state_source(p_state)
    erasure = nested.metric_source.alphabet_size - 1

    def chunk(start: int, count: int):
        state = np.empty((size, count), np.int64)
        msg = np.empty((msg_len, count), np.uint8)
        draws = np.zeros((size, count))
        noise = np.empty((size, count), np.uint8)
        for k in range(count):
            rng = trial_stream(master_seed, start + k)
            state[:, k] = _sample_symbols(state_model.probs, rng, size)
            msg[:, k] = rng.random(msg_len) < 0.5
            draws[info_s, k] = rng.random(info_s.size)
            noise[:, k] = rng.random(size) < read_noise
        preset_s = np.zeros((f_s.size, count), np.uint8)
        preset_s[in_message] = msg
        enc = _batched_pass(
            nested.n, f_s, preset_s, nested.metric_source, state,
            "randomized-rounding", draws,
        )
        x = polar_transform(enc.T).T
        stuck = state != erasure
        disagree = (stuck & (state != x)).sum(axis=0)
        stuck_count = stuck.sum(axis=0)
        with np.errstate(invalid="ignore"):
            frac = np.where(stuck_count > 0, disagree / stuck_count, 0.0)
        y = (x ^ noise).astype(np.int64)
        dec = _batched_pass(
            nested.n, f_c, np.zeros((f_c.size, count), np.uint8),
            nested.metric_channel, y, "map", None,
        )
        block = np.any(dec[nested.message_set] != msg, axis=0)
        return frac, block

    parts = run_chunked(trials, workers, chunk)
    fracs = np.concatenate([p_[0] for p_ in parts])
    blocks = np.concatenate([p_[1] for p_ in parts])
    return fracs, blocks


def run_storage(
    nested: NestedCodeSpec,
    read_noise: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> SchemeResult:
    """Defect-state storage experiment; see :func:`storage_trials`."""
    fracs, blocks = storage_trials(nested, read_noise, trials, master_seed, workers)
    return _aggregate(
        nested.rate_message, None, fracs, blocks.astype(np.float64),
        trials, master_seed,
    )


def one_helper_trials(
    nested: NestedCodeSpec,
    p: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial syndrome-plus-helper lossless recovery outcomes.

    Per trial (its own stream, in order): ``N`` uniforms for the source
    word, ``N`` uniforms for the helper-correlation noise Ber(``p``), then
    one rounding uniform per non-frozen helper index.  Returns the
    helper's quantization distortion fractions ``d(y', x')/N`` and the
    source-recovery failure flags, both in trial order.
    """
    _require(nested, DIRECTION_SOURCE_IN_CHANNEL)
    size = nested.size
    info_s = np.setdiff1d(np.arange(size), nested.f_s)
    f_s, f_c = nested.f_s, nested.f_c
    source = bss_source()

    def chunk(start: int, count: int):
        y = np.empty((size, count), np.int64)
        noise = np.empty((size, count), np.uint8)
        draws = np.zeros((size, count))
        for k in range(count):
            rng = trial_stream(master_seed, start + k)
            y[:, k] = _sample_symbols(source.probs, rng, size)
            noise[:, k] = rng.random(size) < p
            draws[info_s, k] = rng.random(info_s.size)
        y_prime = (y.astype(np.uint8) ^ noise).astype(np.int64)
        enc = _batched_pass(
            nested.n, f_s, np.zeros((f_s.size, count), np.uint8),
            nested.metric_source, y_prime, "randomized-rounding", draws,
        )
        x_prime = polar_transform(enc.T).T
        syndrome = polar_transform(y.astype(np.uint8).T).T[f_c]
        dec = _batched_pass(
            nested.n, f_c, syndrome, nested.metric_channel,
            x_prime.astype(np.int64), "map", None,
        )
        y_hat = polar_transform(dec.T).T
        dist = np.count_nonzero(y_prime != x_prime, axis=0)
        block = np.any(y_hat != y.astype(np.uint8), axis=0)
        return dist, block

    parts = run_chunked(trials, workers, chunk)
    dist = np.concatenate([p_[0] for p_ in parts]) / size
    blocks = np.concatenate([p_[1] for p_ in parts])
    return dist, blocks


def run_one_helper(
    nested: NestedCodeSpec,
    p: float,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> SchemeResult:
    """Syndrome-plus-helper recovery experiment; see :func:`one_helper_trials`.

    Rates: encoder ``|f_c|/N`` (syndrome), helper ``1 - |f_s|/N``
    (compressed bits).
    """
    dist, blocks = one_helper_trials(nested, p, trials, master_seed, workers)
    return _aggregate(
        nested.f_c.size / nested.size,
        1.0 - nested.f_s.size / nested.size,
        dist,
        blocks.astype(np.float64),
        trials,
        master_seed,
    )

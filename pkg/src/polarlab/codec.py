"""SC codec: channel decoding and lossy source encoding on one recursion.

The successive-cancellation pass computes, for ``i = 0..N-1``, the exact
likelihood ratio of bit ``i`` given the observation word and all earlier
decisions, on the factor graph of the transform ``x = u H_n``.  Frozen
indices take their preset values; the rest are decided either by MAP
(channel decoding) or by randomized rounding proportional to the
likelihood (source encoding against a test channel).

The engine below is batched: one schedule step issues a vectorized update
for every graph node at a depth, across all trials in the batch.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ._io import dumps
from ._llr import check_op, sigmoid, var_op
from ._parallel import run_chunked, trial_stream
from .channel import (
    ERASURE,
    Channel,
    channel_from_dict,
    channel_to_dict,
    llr_table,
)
from .transform import bit_reversal, extract, polar_transform

__all__ = [
    "CodeSpec",
    "DecisionTrace",
    "ExperimentResult",
    "SourceModel",
    "GaugeReport",
    "QuantNoiseStats",
    "InvalidObservationError",
    "bss_source",
    "defect_state_source",
    "sc_pass",
    "source_encode",
    "source_decode",
    "channel_decode",
    "distortion",
    "measure_rd",
    "gauge_check",
    "quant_noise_stats",
    "pack_payload",
    "unpack_payload",
    "code_spec_to_dict",
    "code_spec_from_dict",
]

PAYLOAD_MAGIC = b"PLRC"
PAYLOAD_VERSION = 1


class InvalidObservationError(ValueError):
    """Observation symbol impossible under both channel inputs."""


@dataclass(frozen=True)
class CodeSpec:
    """Polar code description: block exponent, frozen set, metric channel.

    Attributes
    ----------
    n : int
        Block length exponent, ``N = 2**n``.
    frozen : numpy.ndarray
        Sorted frozen index set F.
    frozen_values : numpy.ndarray
        Preset bits for F, in the same order.
    channel : Channel
        Metric channel W used by the SC recursion.
    """

    n: int
    frozen: np.ndarray = field(compare=False)
    frozen_values: np.ndarray = field(compare=False)
    channel: Channel

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        frozen = np.asarray(self.frozen, dtype=np.int64).ravel()
        values = np.asarray(self.frozen_values, dtype=np.uint8).ravel()
        if frozen.size and (np.any(frozen[:-1] >= frozen[1:])):
            raise ValueError("frozen set must be strictly increasing")
        if frozen.size and (frozen[0] < 0 or frozen[-1] >= self.size):
            raise ValueError(f"frozen indices outside [0, {self.size})")
        if values.size != frozen.size:
            raise ValueError(
                f"{values.size} frozen values for {frozen.size} indices"
            )
        if values.size and values.max() > 1:
            raise ValueError("frozen values must be bits")
        object.__setattr__(self, "frozen", frozen)
        object.__setattr__(self, "frozen_values", values)

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def info_set(self) -> np.ndarray:
        mask = np.ones(self.size, dtype=bool)
        mask[self.frozen] = False
        return np.nonzero(mask)[0]

    @property
    def rate(self) -> float:
        return 1.0 - self.frozen.size / self.size


@dataclass
class DecisionTrace:
    """One SC pass: per-index LLR, decision, and consumed randomness."""

    llr: np.ndarray
    decisions: np.ndarray
    draws: np.ndarray


@dataclass
class ExperimentResult:
    """Measured operating point with standard errors."""

    rate: float
    distortion: float
    distortion_stderr: float
    block_error: float
    block_error_stderr: float
    trials: int
    master_seed: int

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate {self.rate} outside [0, 1]")
        if not 0.0 <= self.distortion <= 1.0:
            raise ValueError(f"distortion {self.distortion} outside [0, 1]")
        if not 0.0 <= self.block_error <= 1.0:
            raise ValueError(f"block error {self.block_error} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "distortion": self.distortion,
            "distortion_stderr": self.distortion_stderr,
            "block_error": self.block_error,
            "block_error_stderr": self.block_error_stderr,
            "trials": self.trials,
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True)
class SourceModel:
    """I.i.d. symbol source with the distortion metric it is judged by."""

    probs: np.ndarray
    metric: str

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if abs(probs.sum() - 1.0) > 1e-12 or np.any(probs < 0):
            raise ValueError("source probabilities must form a distribution")
        if self.metric not in ("hamming", "erasure-source"):
            raise ValueError(f"unknown metric {self.metric!r}")
        object.__setattr__(self, "probs", probs)


def bss_source() -> SourceModel:
    """Uniform binary source under Hamming distortion."""
    return SourceModel(np.array([0.5, 0.5]), "hamming")


def defect_state_source(p: float) -> SourceModel:
    """Ternary defect state: stuck-at 0/1 with prob p/2 each, free otherwise."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return SourceModel(np.array([p / 2, p / 2, 1.0 - p]), "erasure-source")


class _ScEngine:
    """Batched SC pass over the depth-indexed node arrays.

    Level ``d`` holds one current LLR (and one pending even-phase bit) per
    node, for every trial in the batch.  At step ``i`` all nodes of a depth
    update together with the same operation, so each schedule step is one
    vectorized call.
    """

    def __init__(self, n: int, batch: int):
        self.n = n
        self.batch = batch
        self.llr = [np.zeros((1 << d, batch)) for d in range(n + 1)]
        self.bits = [np.zeros((1 << d, batch), np.uint8) for d in range(n + 1)]
        self.perm = bit_reversal(n)

    def run(
        self,
        leaf_llr: np.ndarray,
        frozen_mask: np.ndarray,
        preset: np.ndarray,
        mode: str,
        draws: np.ndarray | None,
        force: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Run one batched pass; returns (decisions, llrs), both (N, B)."""
        n, batch = self.n, self.batch
        size = 1 << n
        decisions = np.empty((size, batch), np.uint8)
        llrs = np.empty((size, batch))
        self.llr[n][:] = leaf_llr[self.perm]
        for i in range(size):
            if i == 0:
                top = n - 1
            else:
                top = (i & -i).bit_length() - 1  # trailing zeros of i
                half = 1 << top
                self.llr[top] = var_op(
                    self.llr[top + 1][:half],
                    self.llr[top + 1][half:],
                    self.bits[top],
                )
                top -= 1
            for d in range(top, -1, -1):
                half = 1 << d
                self.llr[d] = check_op(
                    self.llr[d + 1][:half], self.llr[d + 1][half:]
                )
            lam = self.llr[0][0]
            if np.isnan(lam).any():
                raise InvalidObservationError(
                    f"likelihood undefined at index {i}"
                )
            llrs[i] = lam
            if force is not None:
                u = force[i]
            elif frozen_mask[i]:
                u = preset[i]
            elif mode == "map":
                u = (lam <= 0.0).astype(np.uint8)  # tie decides 1
            else:
                u = (draws[i] >= sigmoid(lam)).astype(np.uint8)
            decisions[i] = u
            # propagate the decided bit toward the leaves
            v = u.reshape(1, batch)
            d, q = 0, i
            while (q & 1) and d < n:
                v = np.concatenate([self.bits[d] ^ v, v], axis=0)
                d += 1
                q >>= 1
            self.bits[d][: v.shape[0]] = v
        return decisions, llrs


def _leaf_llrs(y: np.ndarray, channel: Channel) -> np.ndarray:
    """Symbol word(s) -> leaf LLR array, rejecting impossible symbols."""
    y = np.asarray(y, dtype=np.int64)
    if y.size and (y.min() < 0 or y.max() >= channel.alphabet_size):
        raise ValueError(
            f"symbols outside the channel alphabet of size "
            f"{channel.alphabet_size}"
        )
    table = llr_table(channel)
    leaf = table[y]
    if np.isnan(leaf).any():
        raise InvalidObservationError(
            "observed a symbol with zero probability under both inputs"
        )
    return leaf


def _frozen_arrays(spec: CodeSpec, batch: int):
    mask = np.zeros(spec.size, dtype=bool)
    mask[spec.frozen] = True
    preset = np.zeros((spec.size, batch), np.uint8)
    preset[spec.frozen] = spec.frozen_values[:, None]
    return mask, preset


def _fill_draws(spec: CodeSpec, rng: np.random.Generator) -> np.ndarray:
    """One uniform per non-frozen index, consumed in index order."""
    draws = np.zeros(spec.size)
    info = spec.info_set
    draws[info] = rng.random(info.size)
    return draws


def sc_pass(
    y: np.ndarray,
    spec: CodeSpec,
    mode: str,
    rng: np.random.Generator | None = None,
    force: np.ndarray | None = None,
) -> DecisionTrace:
    """One SC pass over a single observation word.

    Parameters
    ----------
    y : numpy.ndarray
        Observation word over the metric channel's alphabet, length ``2**n``.
    spec : CodeSpec
        Frozen set, frozen values, and metric channel.
    mode : {"map", "randomized-rounding"}
        Decision rule at non-frozen indices.  MAP decides 0 iff the LLR is
        strictly positive (a tie decides 1); randomized rounding decides 0
        with probability ``l/(1+l)``.
    rng : numpy.random.Generator, optional
        Source of the rounding draws; required in randomized-rounding mode
        unless ``force`` is given.
    force : numpy.ndarray, optional
        Full decision word to impose at every index (gauge-coupling runs).
        The LLR trace is still computed against these decisions.

    Returns
    -------
    DecisionTrace
        Per-index LLRs, decisions, and the consumed uniforms (0 where no
        draw was used).
    """
    if mode not in ("map", "randomized-rounding"):
        raise ValueError(f"unknown mode {mode!r}")
    y = np.asarray(y)
    if y.shape != (spec.size,):
        raise ValueError(f"observation must have shape ({spec.size},)")
    leaf = _leaf_llrs(y, spec.channel)[:, None]
    mask, preset = _frozen_arrays(spec, 1)
    draws = np.zeros(spec.size)
    if force is not None:
        force = np.asarray(force, np.uint8).reshape(spec.size, 1)
    elif mode == "randomized-rounding":
        if rng is None:
            raise ValueError("randomized-rounding mode needs an rng")
        draws = _fill_draws(spec, rng)
    engine = _ScEngine(spec.n, 1)
    decisions, llrs = engine.run(leaf, mask, preset, mode, draws[:, None], force)
    return DecisionTrace(llrs[:, 0], decisions[:, 0], draws)


def source_encode(
    y: np.ndarray, spec: CodeSpec, rng: np.random.Generator
) -> np.ndarray:
    """Compress a source word: randomized-rounding SC against the metric.

    Returns the decisions at non-frozen indices, ascending.
    """
    trace = sc_pass(y, spec, "randomized-rounding", rng)
    return extract(trace.decisions, spec.info_set)


def source_decode(u_info: np.ndarray, spec: CodeSpec) -> np.ndarray:
    """Map compressed bits back to the reconstruction ``x = u H_n``."""
    u_info = np.asarray(u_info, np.uint8).ravel()
    info = spec.info_set
    if u_info.size != info.size:
        raise ValueError(f"expected {info.size} info bits, got {u_info.size}")
    u = np.zeros(spec.size, np.uint8)
    u[spec.frozen] = spec.frozen_values
    u[info] = u_info
    return polar_transform(u)


def channel_decode(y: np.ndarray, spec: CodeSpec) -> np.ndarray:
    """MAP SC decoding; returns the message estimate at non-frozen indices."""
    trace = sc_pass(y, spec, "map")
    return extract(trace.decisions, spec.info_set)


def distortion(a: np.ndarray, b: np.ndarray, metric: str = "hamming") -> int:
    """Total distortion between two words.

    ``hamming`` counts positions where two bit words differ.
    ``erasure-source`` compares a ternary word (0, 1, erasure) against a
    bit word; erased positions cost nothing, others count disagreements.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if metric == "hamming":
        if (a > 1).any() or (b > 1).any():
            raise ValueError("hamming metric expects bit words")
        return int(np.count_nonzero(a != b))
    if metric == "erasure-source":
        if (a > ERASURE).any() or (b > 1).any():
            raise ValueError(
                "erasure-source metric expects a ternary word and a bit word"
            )
        return int(np.count_nonzero((a != ERASURE) & (a != b)))
    raise ValueError(f"unknown metric {metric!r}")


def _sample_symbols(
    probs: np.ndarray, rng: np.random.Generator, size: int
) -> np.ndarray:
    return np.searchsorted(
        np.cumsum(probs), rng.random(size), side="right"
    ).astype(np.int64)


def _encode_batch(
    spec: CodeSpec, source: SourceModel, master_seed: int, start: int, count: int
):
    """Source words and their batched randomized-rounding encodings.

    Per-trial stream consumption: N uniforms for the source word, then one
    uniform per non-frozen index for the rounding draws.
    """
    size = spec.size
    words = np.empty((size, count), np.int64)
    draws = np.zeros((size, count))
    info = spec.info_set
    for k in range(count):
        rng = trial_stream(master_seed, start + k)
        words[:, k] = _sample_symbols(source.probs, rng, size)
        draws[info, k] = rng.random(info.size)
    leaf = _leaf_llrs(words, spec.channel)
    mask, preset = _frozen_arrays(spec, count)
    engine = _ScEngine(spec.n, count)
    decisions, _ = engine.run(leaf, mask, preset, "randomized-rounding", draws)
    recon = polar_transform(decisions.T).T
    return words, decisions, recon


def measure_rd(
    spec: CodeSpec,
    source: SourceModel,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> ExperimentResult:
    """Estimate the operating distortion of the code on an i.i.d. source.

    Each trial draws a fresh source word from its own counter-based
    stream, encodes it with randomized rounding, reconstructs, and scores
    normalized distortion.  Results depend only on (master_seed, trial
    index), not on the worker count.
    """

    def chunk(start: int, count: int) -> np.ndarray:
        words, _, recon = _encode_batch(spec, source, master_seed, start, count)
        if source.metric == "hamming":
            per = np.count_nonzero(words != recon, axis=0)
        else:
            per = np.count_nonzero(
                (words != ERASURE) & (words != recon), axis=0
            )
        return per

    counts = np.concatenate(run_chunked(trials, workers, chunk))
    frac = counts / spec.size
    mean = float(frac.mean())
    stderr = float(frac.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return ExperimentResult(
        rate=spec.rate,
        distortion=mean,
        distortion_stderr=stderr,
        block_error=0.0,
        block_error_stderr=0.0,
        trials=trials,
        master_seed=master_seed,
    )


@dataclass
class GaugeReport:
    """Outcome of a forced-coupling run of two SC instances."""

    passed: bool
    first_violation: int
    max_deviation: float
    shift: np.ndarray
    trace: DecisionTrace
    trace_prime: DecisionTrace


def gauge_check(
    y: np.ndarray,
    y_prime: np.ndarray,
    spec: CodeSpec,
    spec_prime: CodeSpec,
    rng: np.random.Generator,
    tol: float = 1e-9,
) -> GaugeReport:
    """Couple two randomized encodings through an observation shift.

    With ``s = (y xor y') H_n`` (the transform is its own inverse), the
    second instance is forced to decide ``u' = u xor s``.  The LLR of the
    two instances must then agree up to the sign ``(1 - 2 s_i)``, and the
    compressed outputs differ exactly by ``s`` on the non-frozen set.

    Preconditions: binary source words, identical frozen sets, and
    ``frozen_values' = frozen_values xor s_F``.
    """
    y = np.asarray(y, np.uint8)
    y_prime = np.asarray(y_prime, np.uint8)
    if y.max(initial=0) > 1 or y_prime.max(initial=0) > 1:
        raise ValueError("gauge coupling requires binary observation words")
    shift = polar_transform(y ^ y_prime)
    if not np.array_equal(spec.frozen, spec_prime.frozen):
        raise ValueError("gauge instances must share the frozen set")
    expected_frozen = spec.frozen_values ^ shift[spec.frozen]
    if not np.array_equal(spec_prime.frozen_values, expected_frozen):
        raise ValueError(
            "frozen values of the second instance must be shifted by "
            "((y xor y') H_n) on F"
        )
    trace = sc_pass(y, spec, "randomized-rounding", rng)
    forced = trace.decisions ^ shift
    trace_prime = sc_pass(y_prime, spec_prime, "randomized-rounding", force=forced)

    sign = 1.0 - 2.0 * shift.astype(np.float64)
    expected = sign * trace.llr
    got = trace_prime.llr
    both_inf = np.isinf(expected) & np.isinf(got) & (np.sign(expected) == np.sign(got))
    diff = np.abs(got - expected)
    diff[both_inf] = 0.0
    scale = np.maximum(1.0, np.abs(trace.llr))
    scale[~np.isfinite(scale)] = 1.0
    bad = ~(diff <= tol * scale)  # catches NaN too
    info = spec.info_set
    out_ok = np.array_equal(
        trace_prime.decisions[info], trace.decisions[info] ^ shift[info]
    )
    if not out_ok:
        first = int(info[0])
        passed = False
    elif bad.any():
        first = int(np.nonzero(bad)[0][0])
        passed = False
    else:
        first = -1
        passed = True
    finite = np.isfinite(diff)
    max_dev = float(diff[finite].max()) if finite.any() else 0.0
    return GaugeReport(passed, first, max_dev, shift, trace, trace_prime)


@dataclass
class QuantNoiseStats:
    """Empirical behavior of the quantization error ``y xor x``."""

    freq: np.ndarray
    adjacent_pair_freq: np.ndarray
    chi_square: float
    trials: int
    target: float
    degenerate: bool


def quant_noise_stats(
    spec: CodeSpec,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> QuantNoiseStats:
    """Per-position and adjacent-pair statistics of the quantization error.

    Encodes uniform binary words with randomized rounding and accumulates
    the error ``e = y xor x``.  The chi-square statistic compares the
    per-position one-counts against i.i.d. Ber(D) with D taken from the
    BSC metric; a D of 0 is flagged degenerate and skips the statistic.
    """
    if spec.channel.kind != "bsc":
        raise ValueError("quantization-noise statistics expect a BSC metric")
    d = spec.channel.params["D"]
    source = bss_source()

    def chunk(start: int, count: int):
        words, _, recon = _encode_batch(spec, source, master_seed, start, count)
        err = (words != recon).astype(np.int64)
        ones = err.sum(axis=1)
        pairs = (err[:-1] & err[1:]).sum(axis=1)
        return ones, pairs

    parts = run_chunked(trials, workers, chunk)
    ones = np.sum([p[0] for p in parts], axis=0)
    pairs = np.sum([p[1] for p in parts], axis=0)
    freq = ones / trials
    pair_freq = pairs / trials
    degenerate = d in (0.0, 1.0)
    if degenerate:
        chi2 = 0.0
    else:
        chi2 = float(np.sum((ones - trials * d) ** 2 / (trials * d * (1.0 - d))))
    return QuantNoiseStats(freq, pair_freq, chi2, trials, d, degenerate)


def code_spec_to_dict(spec: CodeSpec, profile_ref: str | None = None) -> dict:
    """JSON-ready CodeSpec, optionally naming its reliability profile."""
    out = {
        "n": spec.n,
        "frozen": [int(i) for i in spec.frozen],
        "frozen_values": [int(v) for v in spec.frozen_values],
        "channel": channel_to_dict(spec.channel),
    }
    if profile_ref is not None:
        out["profile_ref"] = profile_ref
    return out


def code_spec_from_dict(desc: dict) -> CodeSpec:
    return CodeSpec(
        n=desc["n"],
        frozen=np.asarray(desc["frozen"], np.int64),
        frozen_values=np.asarray(desc["frozen_values"], np.uint8),
        channel=channel_from_dict(desc["channel"]),
    )


def pack_payload(spec: CodeSpec, info_bits: np.ndarray) -> bytes:
    """Serialize compressed bits with their decoding metadata.

    Layout: magic "PLRC", version u8, n u8, |F| u32, length-prefixed
    metric-channel JSON, then the info bits packed little-endian within
    bytes.
    """
    info_bits = np.asarray(info_bits, np.uint8).ravel()
    expected = spec.size - spec.frozen.size
    if info_bits.size != expected:
        raise ValueError(f"expected {expected} info bits, got {info_bits.size}")
    if spec.n > 0xFF:
        raise ValueError("n too large for the payload header")
    desc = dumps(channel_to_dict(spec.channel)).encode()
    head = struct.pack(
        "<4sBBII", PAYLOAD_MAGIC, PAYLOAD_VERSION, spec.n,
        spec.frozen.size, len(desc),
    )
    return head + desc + np.packbits(info_bits, bitorder="little").tobytes()


def unpack_payload(blob: bytes) -> dict:
    """Parse :func:`pack_payload` output.

    Returns a dict with n, num_frozen, the metric channel, and the info
    bits.  The frozen set itself travels with the code spec, not the
    payload.
    """
    import json

    head_size = struct.calcsize("<4sBBII")
    if len(blob) < head_size:
        raise ValueError("payload too short")
    magic, version, n, num_frozen, desc_len = struct.unpack(
        "<4sBBII", blob[:head_size]
    )
    if magic != PAYLOAD_MAGIC:
        raise ValueError(f"bad payload magic {magic!r}")
    if version != PAYLOAD_VERSION:
        raise ValueError(f"unsupported payload version {version}")
    desc_end = head_size + desc_len
    channel = channel_from_dict(json.loads(blob[head_size:desc_end].decode()))
    num_info = (1 << n) - num_frozen
    bits = np.unpackbits(
        np.frombuffer(blob[desc_end:], np.uint8),
        count=num_info,
        bitorder="little",
    )
    return {
        "version": version,
        "n": n,
        "num_frozen": num_frozen,
        "channel": channel,
        "info_bits": bits,
    }

"""Command orchestration: profiles, sweeps, scheme runs, validation suites.

Every command is driven by a JSON config file plus three optional
overrides (seed, worker count, output path).  Primary outputs (CSV/JSON)
are byte-deterministic for a fixed config and seed — independent of the
worker count — so reruns diff clean; timestamps and environment notes go
to a ``<output>.meta.json`` sidecar instead.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._io import dumps, fmt_float
from ._parallel import run_chunked, trial_stream
from .channel import (
    Channel,
    bhattacharyya,
    binary_entropy_inverse,
    channel_from_dict,
    channel_to_dict,
    combine_minus,
    combine_plus,
    make_bec,
    make_bsc,
    make_bsec,
    sample_word,
    star,
)
from .codec import (
    CodeSpec,
    _frozen_arrays,
    _leaf_llrs,
    _ScEngine,
    bss_source,
    gauge_check,
    measure_rd,
    sc_pass,
)
from .construction import (
    ENUM_MAX_N,
    ReliabilityProfile,
    frozen_count_for_rate,
    gap_table,
    load_profile,
    posterior_bias_enum,
    save_profile,
    select_frozen,
    tree_process_sample,
    z_profile_bec,
    z_profile_enum,
    z_profile_monte_carlo,
)
from .schemes import (
    design_gp,
    design_one_helper,
    design_storage,
    design_wz,
    run_gp,
    run_one_helper,
    run_storage,
    run_wz,
)
from .transform import polar_transform

__all__ = [
    "RunConfig",
    "cmd_profile",
    "cmd_rd_sweep",
    "cmd_bler_sweep",
    "cmd_scheme",
    "cmd_validate",
    "measure_bler",
]

_DEFAULT_OUT = {
    "profile": "profile.json",
    "rd-sweep": "rd_sweep.csv",
    "bler-sweep": "bler_sweep.csv",
    "scheme": "scheme.json",
    "validate": "validate.txt",
}

_DEFAULT_PROFILE_TRIALS = 20_000


@dataclass(frozen=True)
class RunConfig:
    """One fully-resolved command invocation.

    The config dict is the source of truth; ``seed``, ``workers`` and
    ``out`` hold the values after command-line overrides.  A run is
    determined by (command, config content, seed); the worker count only
    changes the wall clock.
    """

    command: str
    config: dict = field(compare=False)
    seed: int | None = None
    workers: int = 1
    out: Path = Path(".")

    @classmethod
    def load(
        cls,
        command: str,
        config_path: str | Path,
        seed: int | None = None,
        workers: int | None = None,
        out: str | Path | None = None,
    ) -> "RunConfig":
        if command not in _DEFAULT_OUT:
            raise ValueError(f"unknown command {command!r}")
        config = json.loads(Path(config_path).read_text())
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
        resolved_seed = seed if seed is not None else config.get("seed")
        resolved_workers = (
            workers if workers is not None else int(config.get("workers", 1))
        )
        resolved_out = Path(
            out if out is not None else config.get("out", _DEFAULT_OUT[command])
        )
        return cls(
            command=command,
            config=config,
            seed=None if resolved_seed is None else int(resolved_seed),
            workers=max(1, resolved_workers),
            out=resolved_out,
        )

    def require_seed(self) -> int:
        if self.seed is None:
            raise ValueError(
                "this command draws random trials; provide a seed in the "
                "config or with --seed"
            )
        return self.seed


def _write_sidecar(primary: Path, run: RunConfig, extra: dict) -> None:
    """Environment notes next to the primary output, never inside it."""
    meta = {
        "command": run.command,
        "seed": run.seed,
        "workers": run.workers,
        "package_version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": run.config,
    }
    meta.update(extra)
    Path(str(primary) + ".meta.json").write_text(
        json.dumps(meta, indent=2, default=str) + "\n"
    )


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    """Delimited output with deterministic float formatting."""
    lines = [",".join(header)]
    for row in rows:
        cells = [
            fmt_float(v) if isinstance(v, float) else str(v) for v in row
        ]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# profile acquisition
# ---------------------------------------------------------------------------


def _build_profile(
    channel: Channel, n: int, trials: int, seed: int, workers: int
) -> ReliabilityProfile:
    """Method selection: exact enumeration when affordable, the closed-form
    recursion for erasure channels, Monte Carlo otherwise."""
    if n <= ENUM_MAX_N:
        return z_profile_enum(channel, n)
    if channel.kind == "bec":
        return z_profile_bec(float(channel.params["epsilon"]), n)
    return z_profile_monte_carlo(channel, n, trials, seed, workers)


def _profile_for(
    run: RunConfig,
    channel: Channel,
    n: int,
    profile_paths: dict,
    seed_offset: int,
) -> ReliabilityProfile:
    """A profile for (channel, n): loaded from the configured path when one
    is given, else built on the fly with a seed derived from the master."""
    path = profile_paths.get(str(n))
    if path is not None:
        profile = load_profile(path)
        if profile.n != n:
            raise ValueError(
                f"profile {path} has exponent {profile.n}, expected {n}"
            )
        return profile
    trials = int(run.config.get("profile_trials", _DEFAULT_PROFILE_TRIALS))
    return _build_profile(
        channel, n, trials, run.require_seed() + seed_offset, run.workers
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_profile(run: RunConfig) -> Path:
    """Estimate or enumerate a reliability profile and write it as JSON."""
    channel = channel_from_dict(run.config["channel"])
    n = int(run.config["n"])
    if n <= ENUM_MAX_N or channel.kind == "bec":
        trials, seed = 0, 0  # exact methods ignore both
    else:
        trials = int(run.config.get("trials", _DEFAULT_PROFILE_TRIALS))
        seed = run.require_seed()
    profile = _build_profile(channel, n, trials, seed, run.workers)
    save_profile(profile, run.out)
    _write_sidecar(
        run.out,
        run,
        {"method": profile.method, "clamp_events": profile.clamp_events},
    )
    print(
        f"profile: n={profile.n} kind={channel.kind} "
        f"method={profile.method} -> {run.out}"
    )
    return run.out


def cmd_rd_sweep(run: RunConfig) -> Path:
    """Rate-distortion sweep of the randomized-rounding source encoder.

    For each (n, rate) grid point the frozen set is the least reliable
    slice of that n's profile; ``target_D`` records the Shannon distortion
    ``h2_inverse(1 - rate)`` of the uniform binary source at that rate.
    Emits one CSV row per point and renders a figure next to the CSV.
    """
    cfg = run.config
    channel = channel_from_dict(cfg["channel"])
    if channel.kind != "bsc":
        raise ValueError(
            "the rate-distortion sweep quantizes a uniform binary source "
            "and needs a bsc metric channel"
        )
    n_list = [int(v) for v in cfg["n"]]
    rates = [float(r) for r in cfg["rates"]]
    if any(not 0.0 < r <= 1.0 for r in rates):
        raise ValueError("rates must lie in (0, 1]")
    trials = int(cfg["trials"])
    seed = run.require_seed()
    profile_paths = cfg.get("profiles", {})
    source = bss_source()

    rows = []
    for offset, n in enumerate(n_list):
        profile = _profile_for(run, channel, n, profile_paths, offset + 1)
        for rate in rates:
            k = frozen_count_for_rate(n, rate)
            spec = CodeSpec(
                n, select_frozen(profile, k), np.zeros(k, np.uint8), channel
            )
            res = measure_rd(spec, source, trials, seed, run.workers)
            rows.append((
                n,
                1 << n,
                rate,
                binary_entropy_inverse(1.0 - rate),
                res.distortion,
                res.distortion_stderr,
                trials,
                seed,
            ))
    header = [
        "n", "N", "rate", "target_D", "measured_D", "stderr", "trials", "seed"
    ]
    _write_csv(run.out, header, rows)
    from .report import render_rd_sweep

    figure = render_rd_sweep(rows, run.out.with_suffix(".png"))
    _write_sidecar(run.out, run, {"figure": str(figure)})
    print(f"rd-sweep: {len(rows)} points -> {run.out}")
    return run.out


def measure_bler(
    spec: CodeSpec, trials: int, master_seed: int, workers: int = 1
) -> float:
    """Empirical block error rate of SC decoding on the spec's channel.

    Per trial (its own counter-based stream, in order): one uniform per
    information bit for the message, then one uniform per position for
    the channel output.  A block error is any information-bit mismatch.
    """
    size = spec.size
    info = spec.info_set

    def chunk(start: int, count: int) -> np.ndarray:
        msg = np.empty((info.size, count), np.uint8)
        y = np.empty((size, count), np.int64)
        u = np.zeros(size, np.uint8)
        u[spec.frozen] = spec.frozen_values
        for k in range(count):
            rng = trial_stream(master_seed, start + k)
            msg[:, k] = rng.random(info.size) < 0.5
            u[info] = msg[:, k]
            y[:, k] = sample_word(spec.channel, polar_transform(u), rng)
        leaf = _leaf_llrs(y, spec.channel)
        mask, preset = _frozen_arrays(spec, count)
        engine = _ScEngine(spec.n, count)
        decisions, _ = engine.run(
            leaf, mask, preset, "map", np.zeros((size, count))
        )
        return np.any(decisions[info] != msg, axis=0)

    parts = run_chunked(trials, workers, chunk)
    return float(np.concatenate(parts).mean())


def cmd_bler_sweep(run: RunConfig) -> Path:
    """Block-error-rate sweep of SC channel decoding.

    Each row pairs the measured rate-R block error rate with the
    profile's union bound: the sum of the information set's reliability
    values, i.e. the partial-sum table entry at the information-set size.
    Emits CSV plus a rendered figure.
    """
    cfg = run.config
    channel = channel_from_dict(cfg["channel"])
    n_list = [int(v) for v in cfg["n"]]
    rates = [float(r) for r in cfg["rates"]]
    if any(not 0.0 <= r <= 1.0 for r in rates):
        raise ValueError("rates must lie in [0, 1]")
    trials = int(cfg["trials"])
    seed = run.require_seed()
    profile_paths = cfg.get("profiles", {})

    rows = []
    for offset, n in enumerate(n_list):
        profile = _profile_for(run, channel, n, profile_paths, offset + 1)
        table = gap_table(profile)
        for rate in rates:
            k = frozen_count_for_rate(n, rate)
            num_info = (1 << n) - k
            spec = CodeSpec(
                n, select_frozen(profile, k), np.zeros(k, np.uint8), channel
            )
            bler = measure_bler(spec, trials, seed, run.workers)
            rows.append((n, rate, bler, float(table.m[num_info]), trials))
    header = ["n", "rate", "bler", "union_bound", "trials"]
    _write_csv(run.out, header, rows)
    from .report import render_bler_sweep

    figure = render_bler_sweep(rows, run.out.with_suffix(".png"))
    _write_sidecar(run.out, run, {"figure": str(figure)})
    print(f"bler-sweep: {len(rows)} points -> {run.out}")
    return run.out


def cmd_scheme(run: RunConfig) -> Path:
    """Design and simulate one nested-code scheme; write its result JSON.

    Config: ``{"scheme": "wz"|"gp"|"storage"|"one-helper", "n": …,
    "D": …, "p": …, "rate_margin": …, "trials": …, "seed": …,
    "profiles": {"source": path, "channel": path}}``.  Profiles are built
    on the fly when paths are missing; ``source_share`` (default 0.5)
    splits the margin between the quantizer and decoder roles.
    """
    cfg = run.config
    scheme = cfg["scheme"]
    n = int(cfg["n"])
    d = float(cfg["D"])
    p = float(cfg["p"])
    margin = float(cfg["rate_margin"])
    trials = int(cfg["trials"])
    seed = run.require_seed()
    share = float(cfg.get("source_share", 1.0 if scheme == "gp" else 0.5))
    budget = cfg.get("bler_budget", 0.03)
    budget = None if budget is None else float(budget)
    paths = cfg.get("profiles", {})

    if scheme in ("wz", "one-helper"):
        source_channel = make_bsc(d)
        channel_channel = make_bsc(star(d, p))
    elif scheme == "gp":
        source_channel = make_bsc(d)
        channel_channel = make_bsc(p)
    elif scheme == "storage":
        source_channel = make_bsec(p, d)
        channel_channel = make_bsc(d)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    def role_profile(role: str, channel: Channel, offset: int):
        path = paths.get(role)
        if path is not None:
            profile = load_profile(path)
            if profile.n != n:
                raise ValueError(
                    f"{role} profile has exponent {profile.n}, expected {n}"
                )
            if channel_to_dict(profile.channel) != channel_to_dict(channel):
                raise ValueError(
                    f"{role} profile channel does not match the scheme's "
                    f"{role} metric"
                )
            return profile
        prof_trials = int(cfg.get("profile_trials", _DEFAULT_PROFILE_TRIALS))
        return _build_profile(channel, n, prof_trials, seed + offset, run.workers)

    profile_source = role_profile("source", source_channel, 1)
    profile_channel = role_profile("channel", channel_channel, 2)

    if scheme == "wz":
        nested = design_wz(profile_source, profile_channel, margin, share, budget)
        result = run_wz(nested, p, trials, seed, run.workers)
    elif scheme == "gp":
        nested = design_gp(profile_channel, profile_source, margin, share, budget)
        result = run_gp(nested, p, trials, seed, run.workers)
    elif scheme == "storage":
        nested = design_storage(
            profile_channel, profile_source, margin, share, budget
        )
        result = run_storage(nested, d, trials, seed, run.workers)
    else:
        nested = design_one_helper(
            profile_source, profile_channel, margin, share, budget
        )
        result = run_one_helper(nested, p, trials, seed, run.workers)

    doc = {"scheme": scheme}
    doc.update(result.to_dict())
    run.out.write_text(dumps(doc) + "\n")
    _write_sidecar(
        run.out,
        run,
        {
            "frozen_source": int(nested.f_s.size),
            "frozen_channel": int(nested.f_c.size),
            "message_length": nested.message_length,
        },
    )
    print(
        f"scheme {scheme}: rate={result.rate_encoder:.4f} "
        f"distortion={result.distortion:.4f} "
        f"block_error={result.block_error:.4f} -> {run.out}"
    )
    return run.out


# ---------------------------------------------------------------------------
# validation suites
# ---------------------------------------------------------------------------


def _exhaustive_decision_llr(
    channel: Channel, n: int, y: np.ndarray, prefix: np.ndarray
) -> float:
    """Decision log-likelihood ratio by direct enumeration of all futures.

    ``ln P(y, prefix, u_i = 0) - ln P(y, prefix, u_i = 1)`` where the
    probability marginalizes uniformly over all bits after ``i``: the
    deliberately naive Theta(2^N)-per-index reference for the SC
    recursion.
    """
    size = 1 << n
    i = prefix.size
    table = np.vstack([channel.p0, channel.p1])
    total = [0.0, 0.0]
    u = np.zeros(size, np.uint8)
    u[:i] = prefix
    for bit in (0, 1):
        u[i] = bit
        for future in range(1 << (size - i - 1)):
            for j in range(size - i - 1):
                u[i + 1 + j] = (future >> j) & 1
            x = polar_transform(u)
            total[bit] += float(np.prod(table[x, y]))
    with np.errstate(divide="ignore"):
        return float(np.log(total[0]) - np.log(total[1]))


def _suite_oracle(cfg: dict) -> tuple[str, str]:
    """SC decision LLRs against exhaustive enumeration over all
    observations and reachable decision prefixes; enumeration against the
    erasure closed form."""
    n_values = [int(v) for v in cfg.get("oracle_n", [1, 2])]
    usable = [n for n in n_values if n >= 1]
    if not usable:
        return "skip", "no block exponent >= 1 requested; nothing to enumerate"
    channels = [
        make_bsc(0.11), make_bsc(0.3), make_bec(0.5), make_bsec(0.5, 0.1)
    ]
    tol = 1e-9
    worst = 0.0
    checked = 0
    for channel in channels:
        m = channel.alphabet_size
        table = np.vstack([channel.p0, channel.p1])
        for n in usable:
            size = 1 << n
            for forced_word in range(1 << size):
                forced = np.array(
                    [(forced_word >> j) & 1 for j in range(size)], np.uint8
                )
                spec = CodeSpec(n, np.arange(size), forced, channel)
                for obs_word in range(m**size):
                    y, rem = np.zeros(size, np.int64), obs_word
                    for j in range(size):
                        y[j] = rem % m
                        rem //= m
                    # Skip (observation, path) pairs of zero probability:
                    # every conditional along a positive-probability path
                    # is well defined, so nothing else can produce NaN.
                    if float(np.prod(table[polar_transform(forced), y])) == 0.0:
                        continue
                    trace = sc_pass(y, spec, "map")
                    for i in range(size):
                        e = _exhaustive_decision_llr(channel, n, y, forced[:i])
                        g = float(trace.llr[i])
                        if np.isinf(e) or np.isinf(g):
                            if not (
                                np.isinf(e)
                                and np.isinf(g)
                                and np.sign(e) == np.sign(g)
                            ):
                                return "fail", (
                                    f"infinite-likelihood mismatch at n={n} "
                                    f"kind={channel.kind} index {i}"
                                )
                            checked += 1
                            continue
                        dev = abs(e - g) / max(1.0, abs(e))
                        worst = max(worst, dev)
                        checked += 1
                        if dev > tol:
                            return "fail", (
                                f"likelihood deviation {dev:.3e} at n={n} "
                                f"kind={channel.kind} index {i}"
                            )
    for n in range(0, ENUM_MAX_N + 1):
        enum = z_profile_enum(make_bec(0.5), n)
        exact = z_profile_bec(0.5, n)
        if not np.array_equal(enum.z, exact.z):
            return "fail", f"enumeration vs erasure recursion differ at n={n}"
    return "pass", (
        f"{checked} decision likelihoods match within {tol:g} "
        f"(worst finite deviation {worst:.2e}); erasure enumeration exact"
    )


def _suite_gauge(cfg: dict) -> tuple[str, str]:
    """Coupled encodings: likelihood magnitudes match under the sign rule
    and the two runs score bitwise-identical distortion."""
    instances = int(cfg.get("gauge_instances", 100))
    if instances < 1:
        return "skip", "no coupled instances requested"
    rng = trial_stream(int(cfg.get("seed", 7)), 1)
    worst = 0.0
    for k in range(instances):
        n = int(rng.integers(2, 9))
        size = 1 << n
        num_frozen = int(rng.integers(1, size))
        frozen = np.sort(
            rng.choice(size, size=num_frozen, replace=False)
        ).astype(np.int64)
        values = rng.integers(0, 2, num_frozen).astype(np.uint8)
        y = rng.integers(0, 2, size).astype(np.uint8)
        y_prime = rng.integers(0, 2, size).astype(np.uint8)
        shift = polar_transform(y ^ y_prime)
        channel = make_bsc(float(rng.uniform(0.05, 0.45)))
        spec = CodeSpec(n, frozen, values, channel)
        spec_prime = CodeSpec(n, frozen, values ^ shift[frozen], channel)
        report = gauge_check(y, y_prime, spec, spec_prime, rng)
        if not report.passed:
            return "fail", (
                f"coupling violated at instance {k} (n={n}, first bad "
                f"index {report.first_violation})"
            )
        worst = max(worst, report.max_deviation)
        x = polar_transform(report.trace.decisions)
        x_prime = polar_transform(report.trace_prime.decisions)
        if np.count_nonzero(y != x) != np.count_nonzero(y_prime != x_prime):
            return "fail", f"coupled distortions differ at instance {k}"
    return "pass", (
        f"{instances} couplings: likelihood magnitudes within {worst:.2e}, "
        "distortions bitwise equal"
    )


def _suite_posterior_bias(cfg: dict) -> tuple[str, str]:
    """High-reliability indices must have near-uniform posteriors:
    z >= 1 - 2 delta^2 forces mean posterior bias <= delta."""
    max_n = int(cfg.get("posterior_max_n", ENUM_MAX_N))
    if max_n < 0:
        return "skip", "negative block-exponent bound; nothing to check"
    deltas = (0.05, 0.1, 0.2)
    checked = 0
    for d in (0.11, 0.25):
        channel = make_bsc(d)
        for n in range(0, min(max_n, ENUM_MAX_N) + 1):
            profile = z_profile_enum(channel, n)
            bias = posterior_bias_enum(channel, n)
            for delta in deltas:
                mask = profile.z >= 1.0 - 2.0 * delta**2
                checked += int(mask.sum())
                if mask.any() and np.any(bias[mask] > delta + 1e-12):
                    return "fail", (
                        f"index with z >= 1-2*{delta}^2 has posterior bias "
                        f"{float(bias[mask].max()):.4f} > {delta} at "
                        f"n={n}, D={d}"
                    )
    return "pass", f"{checked} (index, threshold) pairs satisfy the bias bound"


def _suite_reliability_recursion(cfg: dict) -> tuple[str, str]:
    """One-step synthesis laws on random channel pairs.

    Check side: Z >= sqrt(Z1^2 + Z2^2 - Z1^2 Z2^2).  Variable side:
    Z = Z1 * Z2 exactly.  ``recursion_perturbation`` is subtracted from the
    measured check-side value so fault-injection tests can confirm the
    suite actually bites.
    """
    pairs = int(cfg.get("recursion_pairs", 10_000))
    if pairs < 1:
        return "skip", "no channel pairs requested"
    perturbation = float(cfg.get("recursion_perturbation", 0.0))
    rng = trial_stream(int(cfg.get("seed", 7)), 2)
    tol = 1e-12
    bound_violations = 0
    product_violations = 0
    worst_product = 0.0
    for _ in range(pairs):
        pair = []
        for _ in range(2):
            m = int(rng.integers(2, 7))
            rows = rng.random((2, m))
            rows /= rows.sum(axis=1, keepdims=True)
            pair.append(Channel("generic", {}, rows[0], rows[1]))
        w1, w2 = pair
        z1, z2 = bhattacharyya(w1), bhattacharyya(w2)
        z_minus = bhattacharyya(combine_minus(w1, w2)) - perturbation
        z_plus = bhattacharyya(combine_plus(w1, w2))
        if z_minus < np.sqrt(z1**2 + z2**2 - z1**2 * z2**2) - tol:
            bound_violations += 1
        gap = abs(z_plus - z1 * z2)
        worst_product = max(worst_product, gap)
        if gap > tol:
            product_violations += 1
    if bound_violations or product_violations:
        return "fail", (
            f"{bound_violations} check-side bound violations, "
            f"{product_violations} variable-side product violations"
        )
    return "pass", (
        f"{pairs} pairs: check-side bound respected, variable-side product "
        f"exact to {worst_product:.2e}"
    )


def _suite_tree_process(cfg: dict) -> tuple[str, str]:
    """Sampled branching-process paths respect the per-step laws."""
    samples = int(cfg.get("tree_samples", 20))
    if samples < 1:
        return "skip", "no tree samples requested"
    seed = int(cfg.get("seed", 7))
    tol = 1e-9
    for s in range(samples):
        trace = tree_process_sample(make_bec(0.5), 12, seed + s)
        eps = 0.5
        for b, z in zip(trace.branch_bits, trace.z_path[1:]):
            eps = eps * eps if b else 2 * eps - eps * eps
            if abs(z - eps) > tol:
                return "fail", (
                    f"erasure path diverges from the closed-form recursion "
                    f"at sample {s}"
                )
        trace = tree_process_sample(make_bsc(0.11), 3, seed + 1000 + s)
        for level, b in enumerate(trace.branch_bits):
            prev = float(trace.z_path[level])
            cur = float(trace.z_path[level + 1])
            if b:
                if abs(cur - prev**2) > tol:
                    return "fail", (
                        f"variable-side reliability square violated at "
                        f"sample {s}, level {level}"
                    )
            else:
                low = np.sqrt(max(0.0, 2 * prev**2 - prev**4))
                high = 2 * prev - prev**2
                if cur < low - tol or cur > high + tol:
                    return "fail", (
                        f"check-side reliability bounds violated at "
                        f"sample {s}, level {level}"
                    )
    return "pass", (
        f"{samples} erasure paths match the closed form; "
        f"{samples} table-channel paths obey the per-step laws"
    )


_SUITES = {
    "oracle-equivalence": _suite_oracle,
    "gauge": _suite_gauge,
    "posterior-bias": _suite_posterior_bias,
    "reliability-recursion": _suite_reliability_recursion,
    "tree-process": _suite_tree_process,
}


def cmd_validate(run: RunConfig) -> int:
    """Run the validation suites; return 0 only if none fail.

    Config keys (all optional): ``suites`` (subset of names), ``seed``,
    ``oracle_n``, ``gauge_instances``, ``posterior_max_n``,
    ``recursion_pairs``, ``recursion_perturbation``, ``tree_samples``.  Skipped
    suites report their reason and do not fail the run.
    """
    cfg = dict(run.config)
    if run.seed is not None:
        cfg["seed"] = run.seed
    names = cfg.get("suites", list(_SUITES))
    unknown = [s for s in names if s not in _SUITES]
    if unknown:
        raise ValueError(f"unknown validation suites: {unknown}")
    lines = []
    failures = 0
    for name in names:
        status, detail = _SUITES[name](cfg)
        lines.append(f"[{status}] {name}: {detail}")
        if status == "fail":
            failures += 1
    body = "\n".join(lines) + "\n"
    print(body, end="")
    run.out.write_text(body)
    _write_sidecar(run.out, run, {"failures": failures})
    return 1 if failures else 0

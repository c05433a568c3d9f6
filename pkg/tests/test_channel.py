"""Tests for channel models, combiners, entropy helpers, and sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarlab.channel import (
    ALPHABET_CAP,
    ERASURE,
    bhattacharyya,
    binary_entropy,
    binary_entropy_inverse,
    channel_from_dict,
    channel_to_dict,
    combine_minus,
    combine_plus,
    llr_table,
    make_bec,
    make_bsc,
    make_bsec,
    make_channel,
    r_gp,
    r_wz,
    rate_distortion_bss,
    sample,
    sample_word,
    star,
    storage_capacity,
    symmetric_mutual_info,
)


def random_channel(rng, m):
    """Generic channel with strictly positive rows on an m-ary alphabet."""
    rows = rng.random((2, m)) + 0.05
    rows /= rows.sum(axis=1, keepdims=True)
    return make_channel(rows[0], rows[1])


probs = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestConstructors:
    def test_bsc_rows(self):
        w = make_bsc(0.11)
        assert w.kind == "bsc"
        assert w.alphabet_size == 2
        assert w.p0.tolist() == [0.89, 0.11]
        assert w.p1.tolist() == [0.11, 0.89]

    def test_bec_rows(self):
        w = make_bec(0.5)
        assert w.kind == "bec"
        assert w.alphabet_size == 3
        assert w.p0.tolist() == [0.5, 0.0, 0.5]
        assert w.p1.tolist() == [0.0, 0.5, 0.5]
        assert ERASURE == 2

    def test_bsec_rows(self):
        w = make_bsec(0.25, 0.11)
        assert w.kind == "bsec"
        assert np.allclose(w.p0, [0.25 * 0.89, 0.25 * 0.11, 0.75])
        assert np.allclose(w.p1, [0.25 * 0.11, 0.25 * 0.89, 0.75])

    def test_bsec_reduces_to_bsc_and_erasure(self):
        full = make_bsec(1.0, 0.3)
        assert np.allclose(full.p0[:2], make_bsc(0.3).p0)
        erased = make_bsec(0.0, 0.3)
        assert erased.p0[2] == 1.0 and erased.p1[2] == 1.0

    @pytest.mark.parametrize("bad", [-0.1, 1.1, math.nan])
    def test_parameter_range_checks(self, bad):
        with pytest.raises(ValueError):
            make_bsc(bad)
        with pytest.raises(ValueError):
            make_bec(bad)
        with pytest.raises(ValueError):
            make_bsec(bad, 0.1)
        with pytest.raises(ValueError):
            make_bsec(0.1, bad)

    def test_generic_validation(self):
        with pytest.raises(ValueError):
            make_channel([0.5, 0.6], [0.5, 0.5])  # does not sum to one
        with pytest.raises(ValueError):
            make_channel([1.2, -0.2], [0.5, 0.5])  # negative mass
        with pytest.raises(ValueError):
            make_channel([1.0], [0.5, 0.5])  # mismatched alphabets
        with pytest.raises(ValueError):
            make_channel([], [])  # empty alphabet

    def test_symmetric_kind_flag(self):
        assert make_bsc(0.11).is_symmetric_kind
        assert make_bec(0.5).is_symmetric_kind
        assert make_bsec(0.25, 0.11).is_symmetric_kind
        assert not make_channel([0.5, 0.5], [0.5, 0.5]).is_symmetric_kind


class TestScalarFunctions:
    def test_entropy_endpoints(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == 1.0

    @settings(max_examples=200, deadline=None)
    @given(probs)
    def test_entropy_symmetry(self, x):
        assert binary_entropy(x) == pytest.approx(binary_entropy(1.0 - x), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_entropy_inverse_round_trip(self, r):
        x = binary_entropy_inverse(r)
        assert 0.0 <= x <= 0.5
        assert binary_entropy(x) == pytest.approx(r, abs=1e-12)

    def test_entropy_inverse_known_value(self):
        # h2(0.11) recomputed from the definition pins the inverse.
        assert binary_entropy_inverse(binary_entropy(0.11)) == pytest.approx(
            0.11, abs=1e-12
        )

    def test_entropy_domain(self):
        with pytest.raises(ValueError):
            binary_entropy(-0.01)
        with pytest.raises(ValueError):
            binary_entropy_inverse(1.01)

    @settings(max_examples=100, deadline=None)
    @given(probs, probs)
    def test_star_identities(self, d, p):
        assert star(d, 0.0) == pytest.approx(d)
        assert star(0.0, p) == pytest.approx(p)
        assert star(d, 0.5) == pytest.approx(0.5)
        assert star(d, p) == pytest.approx(star(p, d))

    def test_rate_targets(self):
        assert rate_distortion_bss(0.0) == 1.0
        assert rate_distortion_bss(0.5) == pytest.approx(0.0, abs=1e-15)
        assert rate_distortion_bss(0.11) == pytest.approx(
            1.0 - binary_entropy(0.11), abs=1e-15
        )
        assert r_wz(0.11, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert r_wz(0.11, 0.25) == pytest.approx(
            binary_entropy(star(0.11, 0.25)) - binary_entropy(0.11)
        )
        assert r_gp(0.25, 0.25) == pytest.approx(0.0, abs=1e-15)
        assert r_gp(0.25, 0.11) == pytest.approx(
            binary_entropy(0.25) - binary_entropy(0.11)
        )
        assert storage_capacity(0.25, 0.11) == pytest.approx(
            0.75 * (1.0 - binary_entropy(0.11))
        )


class TestInformationMeasures:
    def test_bhattacharyya_named_kinds(self):
        d, eps, p = 0.11, 0.37, 0.25
        assert bhattacharyya(make_bsc(d)) == pytest.approx(
            2.0 * math.sqrt(d * (1.0 - d)), abs=1e-15
        )
        assert bhattacharyya(make_bec(eps)) == pytest.approx(eps, abs=1e-15)
        assert bhattacharyya(make_bsec(p, d)) == pytest.approx(
            p * 2.0 * math.sqrt(d * (1.0 - d)) + (1.0 - p), abs=1e-15
        )

    def test_mutual_info_named_kinds(self):
        assert symmetric_mutual_info(make_bsc(0.11)) == pytest.approx(
            1.0 - binary_entropy(0.11), abs=1e-12
        )
        assert symmetric_mutual_info(make_bec(0.37)) == pytest.approx(
            1.0 - 0.37, abs=1e-12
        )
        assert symmetric_mutual_info(make_bsec(0.25, 0.11)) == pytest.approx(
            0.25 * (1.0 - binary_entropy(0.11)), abs=1e-12
        )

    def test_mutual_info_extremes(self):
        assert symmetric_mutual_info(make_bsc(0.5)) == pytest.approx(0.0, abs=1e-12)
        assert symmetric_mutual_info(make_bsc(0.0)) == pytest.approx(1.0, abs=1e-12)
        assert bhattacharyya(make_bsc(0.5)) == pytest.approx(1.0, abs=1e-15)
        assert bhattacharyya(make_bsc(0.0)) == 0.0

    def test_info_z_consistency_bounds(self):
        # I + Z >= 1 and I^2 + Z^2 <= 1 for binary-input channels.
        rng = np.random.default_rng(11)
        for _ in range(50):
            w = random_channel(rng, int(rng.integers(2, 9)))
            i = symmetric_mutual_info(w)
            z = bhattacharyya(w)
            assert i + z >= 1.0 - 1e-9
            assert i * i + z * z <= 1.0 + 1e-9


def brute_force_minus(w1, w2):
    """Literal scalar-loop evaluation of the check-side synthesis."""
    m1, m2 = w1.alphabet_size, w2.alphabet_size
    rows = np.zeros((2, m1 * m2))
    for u in (0, 1):
        for v in (0, 1):
            for y1 in range(m1):
                for y2 in range(m2):
                    w1row = w1.p0 if (u ^ v) == 0 else w1.p1
                    w2row = w2.p0 if v == 0 else w2.p1
                    rows[u, y1 * m2 + y2] += 0.5 * w1row[y1] * w2row[y2]
    return rows


def brute_force_plus(w1, w2):
    """Literal scalar-loop evaluation of the variable-side synthesis."""
    m1, m2 = w1.alphabet_size, w2.alphabet_size
    rows = np.zeros((2, 2 * m1 * m2))
    for u1 in (0, 1):
        for u0 in (0, 1):
            for y1 in range(m1):
                for y2 in range(m2):
                    w1row = w1.p0 if (u0 ^ u1) == 0 else w1.p1
                    w2row = w2.p0 if u1 == 0 else w2.p1
                    rows[u1, (u0 * m1 + y1) * m2 + y2] = (
                        0.5 * w1row[y1] * w2row[y2]
                    )
    return rows


class TestCombiners:
    @pytest.mark.parametrize("seed", range(8))
    def test_minus_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        w1 = random_channel(rng, int(rng.integers(2, 6)))
        w2 = random_channel(rng, int(rng.integers(2, 6)))
        got = combine_minus(w1, w2)
        expected = brute_force_minus(w1, w2)
        assert np.allclose(got.p0, expected[0], atol=1e-15)
        assert np.allclose(got.p1, expected[1], atol=1e-15)

    @pytest.mark.parametrize("seed", range(8))
    def test_plus_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        w1 = random_channel(rng, int(rng.integers(2, 6)))
        w2 = random_channel(rng, int(rng.integers(2, 6)))
        got = combine_plus(w1, w2)
        expected = brute_force_plus(w1, w2)
        assert np.allclose(got.p0, expected[0], atol=1e-15)
        assert np.allclose(got.p1, expected[1], atol=1e-15)

    def test_information_is_conserved(self):
        # I(minus) + I(plus) = 2 I(W) when the same channel feeds both.
        rng = np.random.default_rng(3)
        for _ in range(20):
            w = random_channel(rng, int(rng.integers(2, 7)))
            total = symmetric_mutual_info(
                combine_minus(w, w)
            ) + symmetric_mutual_info(combine_plus(w, w))
            assert total == pytest.approx(2.0 * symmetric_mutual_info(w), abs=1e-10)

    def test_bec_closed_forms(self):
        eps = 0.37
        w = make_bec(eps)
        assert bhattacharyya(combine_minus(w, w)) == pytest.approx(
            2 * eps - eps * eps, abs=1e-12
        )
        assert bhattacharyya(combine_plus(w, w)) == pytest.approx(
            eps * eps, abs=1e-12
        )

    def test_plus_z_is_exact_product(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            w1 = random_channel(rng, int(rng.integers(2, 7)))
            w2 = random_channel(rng, int(rng.integers(2, 7)))
            assert bhattacharyya(combine_plus(w1, w2)) == pytest.approx(
                bhattacharyya(w1) * bhattacharyya(w2), abs=1e-12
            )

    def test_minus_z_bounds(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            w1 = random_channel(rng, int(rng.integers(2, 7)))
            w2 = random_channel(rng, int(rng.integers(2, 7)))
            z1, z2 = bhattacharyya(w1), bhattacharyya(w2)
            zm = bhattacharyya(combine_minus(w1, w2))
            assert zm <= z1 + z2 - z1 * z2 + 1e-12
            assert zm >= math.sqrt(z1 * z1 + z2 * z2 - z1 * z1 * z2 * z2) - 1e-12

    def test_alphabet_cap_enforced(self):
        w = make_bsc(0.11)
        for _ in range(3):
            w = combine_minus(w, w)  # alphabet 2 -> 4 -> 16 -> 256
        w = combine_minus(w, w)  # 65536 == cap, still allowed
        assert w.alphabet_size == ALPHABET_CAP
        with pytest.raises(ValueError):
            combine_minus(w, w)
        with pytest.raises(ValueError):
            combine_plus(w, w)


class _FakeRng:
    """Deterministic stand-in feeding preset uniforms to the samplers."""

    def __init__(self, values):
        self.values = list(values)

    def random(self, shape=None):
        if shape is None:
            return self.values.pop(0)
        out = np.array(self.values[: int(np.prod(shape))]).reshape(shape)
        del self.values[: out.size]
        return out


class TestSampling:
    def test_inverse_cdf_convention(self):
        w = make_channel([0.3, 0.2, 0.5], [0.5, 0.2, 0.3])
        # Input 0: cumulative [0.3, 0.5, 1.0].
        assert sample(w, 0, _FakeRng([0.29])) == 0
        assert sample(w, 0, _FakeRng([0.31])) == 1
        assert sample(w, 0, _FakeRng([0.95])) == 2
        # Input 1: cumulative [0.5, 0.7, 1.0].
        assert sample(w, 1, _FakeRng([0.49])) == 0
        assert sample(w, 1, _FakeRng([0.69])) == 1

    def test_sample_word_matches_scalar_sampler(self):
        w = make_bsec(0.25, 0.11)
        uniforms = np.random.default_rng(9).random(64)
        word = np.random.default_rng(10).integers(0, 2, 64)
        batch = sample_word(w, word, _FakeRng(uniforms))
        scalars = [sample(w, int(x), _FakeRng([u])) for x, u in zip(word, uniforms)]
        assert batch.tolist() == scalars

    def test_one_uniform_per_position(self):
        w = make_bec(0.5)
        x = np.zeros(37, dtype=np.uint8)
        rng = np.random.default_rng(123)
        sample_word(w, x, rng)
        after = rng.random()
        reference = np.random.default_rng(123)
        reference.random(37)
        assert after == reference.random()

    def test_empirical_frequencies(self):
        w = make_bsec(0.25, 0.11)
        rng = np.random.default_rng(77)
        n = 200_000
        y = sample_word(w, np.zeros(n, dtype=np.uint8), rng)
        freq = np.bincount(y, minlength=3) / n
        for k in range(3):
            sigma = math.sqrt(w.p0[k] * (1 - w.p0[k]) / n)
            assert abs(freq[k] - w.p0[k]) < 4 * sigma + 1e-9

    def test_rejects_non_bit_input(self):
        with pytest.raises(ValueError):
            sample(make_bsc(0.1), 2, np.random.default_rng(0))


class TestLlrTable:
    def test_bsc_values(self):
        table = llr_table(make_bsc(0.11))
        assert table[0] == pytest.approx(math.log(0.89 / 0.11), abs=1e-15)
        assert table[1] == pytest.approx(math.log(0.11 / 0.89), abs=1e-15)

    def test_bec_values(self):
        table = llr_table(make_bec(0.5))
        assert table[0] == math.inf
        assert table[1] == -math.inf
        assert table[2] == 0.0

    def test_impossible_symbol_is_nan(self):
        w = make_channel([0.5, 0.5, 0.0], [0.5, 0.5, 0.0])
        assert math.isnan(llr_table(w)[2])

    def test_generic_ratio(self):
        w = make_channel([0.3, 0.7], [0.6, 0.4])
        assert llr_table(w)[0] == pytest.approx(math.log(0.3 / 0.6))
        assert llr_table(w)[1] == pytest.approx(math.log(0.7 / 0.4))


class TestSerialization:
    @pytest.mark.parametrize(
        "w",
        [
            make_bsc(0.11),
            make_bec(0.5),
            make_bsec(0.25, 0.11),
            make_channel([0.3, 0.2, 0.5], [0.5, 0.2, 0.3]),
        ],
        ids=["bsc", "bec", "bsec", "generic"],
    )
    def test_round_trip(self, w):
        back = channel_from_dict(channel_to_dict(w))
        assert back.kind == w.kind
        assert back.params == w.params
        assert np.array_equal(back.p0, w.p0)
        assert np.array_equal(back.p1, w.p1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            channel_from_dict({"kind": "laplace", "params": {}, "p0": [], "p1": []})

    def test_dict_is_json_plain(self):
        desc = channel_to_dict(make_bsec(0.25, 0.11))
        assert set(desc) == {"kind", "params", "p0", "p1"}
        assert all(isinstance(v, float) for v in desc["p0"])

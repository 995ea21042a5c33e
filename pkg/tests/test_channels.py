import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinperc.channels import (
    AWGN,
    BSC,
    ERASED,
    ChannelError,
    Erasure,
    awgn_f,
    decode,
    edge_chi2_info,
    encode,
    likelihood,
    parse_channel,
    sample_output,
)

probs = st.floats(0.0, 1.0)


def generic_chi2(ch):
    """``E_Y[E[X | Y]^2]`` under a uniform input, from the likelihood table."""
    total = 0.0
    for y in ch.outputs():
        obs = decode(y, ch)
        p_plus, p_minus = ch.likelihood(obs, 1), ch.likelihood(obs, -1)
        marg = 0.5 * (p_plus + p_minus)
        if marg > 0:
            total += marg * ((p_plus - p_minus) / (p_plus + p_minus)) ** 2
    return total


class TestBSC:
    def test_gamma(self):
        assert BSC(0.25).chi2_info() == 0.25
        assert BSC(0.5).chi2_info() == 0.0
        assert BSC(0.0).chi2_info() == 1.0

    def test_flip_above_half_keeps_gamma(self):
        assert BSC(0.8).chi2_info() == pytest.approx(BSC(0.2).chi2_info(), abs=1e-15)

    def test_likelihood_rejects_bad_output(self):
        with pytest.raises(ChannelError):
            BSC(0.1).likelihood(ERASED, 1)
        with pytest.raises(ChannelError):
            BSC(0.1).likelihood(0, 1)

    def test_bad_parameter(self):
        with pytest.raises(ChannelError):
            BSC(-0.1)


class TestErasure:
    def test_likelihoods(self):
        ch = Erasure(0.3)
        assert ch.likelihood(ERASED, 1) == pytest.approx(0.7)
        assert ch.likelihood(1, 1) == 0.3
        assert ch.likelihood(-1, 1) == 0.0

    def test_transform_fixes_erasure(self):
        assert Erasure(0.3).transform(ERASED) is ERASED
        assert Erasure(0.3).transform(1) == -1

    def test_erased_repr(self):
        assert repr(ERASED) == "ERASED"


class TestProperties:
    @given(probs)
    def test_symmetry_and_normalization_bsc(self, eps):
        self._check_discrete(BSC(eps))

    @given(probs)
    def test_symmetry_and_normalization_erasure(self, q):
        self._check_discrete(Erasure(q))

    def _check_discrete(self, ch):
        for x in (1, -1):
            total = sum(ch.likelihood(decode(y, ch), x) for y in ch.outputs())
            assert abs(total - 1.0) <= 1e-12
            for y in ch.outputs():
                obs = decode(y, ch)
                assert ch.likelihood(ch.transform(obs), -x) == ch.likelihood(obs, x)

    def test_awgn_symmetry_on_grid(self):
        ch = AWGN(0.7)
        for y in np.linspace(-4, 4, 41):
            for x in (1, -1):
                assert ch.likelihood(ch.transform(float(y)), -x) == pytest.approx(ch.likelihood(float(y), x), rel=1e-14)

    @given(probs)
    def test_gamma_matches_generic_bsc(self, eps):
        assert abs(edge_chi2_info(BSC(eps)) - generic_chi2(BSC(eps))) <= 1e-12

    @given(probs)
    def test_gamma_matches_generic_erasure(self, q):
        assert abs(edge_chi2_info(Erasure(q)) - generic_chi2(Erasure(q))) <= 1e-12

    @given(st.sampled_from(["bsc", "erasure", "awgn"]), st.floats(0.0, 1.0))
    def test_gamma_in_unit_interval(self, kind, p):
        ch = parse_channel(f"{kind}:{p * (5 if kind == 'awgn' else 1)!r}")
        assert 0.0 <= ch.chi2_info() <= 1.0

    def test_gamma_zero_iff_independent(self):
        assert BSC(0.5).chi2_info() == 0.0
        assert AWGN(0.0).chi2_info() == 0.0
        assert Erasure(0.0).chi2_info() == 0.0
        assert BSC(0.49).chi2_info() > 0
        assert AWGN(1e-4).chi2_info() > 0
        assert Erasure(1e-4).chi2_info() > 0

    def test_awgn_gamma_matches_mc(self):
        ch = AWGN(0.8)
        rng = np.random.default_rng(5)
        y = ch.sample_array(np.ones(10**6), rng)
        h2 = ch.posterior_mean(y) ** 2
        err = h2.std(ddof=1) / math.sqrt(h2.size)
        assert abs(h2.mean() - ch.chi2_info()) <= 3 * err


class TestAwgnF:
    def test_zero(self):
        assert awgn_f(0.0) == 0.0

    def test_small_lambda(self):
        assert 0.9 <= awgn_f(0.01) / 0.01 <= 1.0

    @pytest.mark.parametrize("lam", [0.1, 0.5, 1.0, 2.0])
    def test_upper_bound(self, lam):
        assert awgn_f(lam) <= lam * (lam + 1)

    def test_quadrature_converged(self):
        for lam in (0.1, 1.0, 3.0):
            assert awgn_f(lam, order=60) == pytest.approx(awgn_f(lam, order=200), abs=1e-5)

    def test_monotone(self):
        vals = [awgn_f(lam) for lam in np.linspace(0, 5, 51)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_bad_order(self):
        with pytest.raises(ValueError):
            awgn_f(1.0, order=1)


class TestSampling:
    def test_bsc_flip_rate(self):
        rng = np.random.default_rng(0)
        z = np.ones(200_000)
        y = BSC(0.2).sample_array(z, rng)
        assert abs((y == -1).mean() - 0.2) < 0.005

    def test_erasure_encoding(self):
        rng = np.random.default_rng(0)
        y = Erasure(0.3).sample_array(-np.ones(100_000), rng)
        assert set(np.unique(y)) <= {-1.0, 0.0}
        assert abs((y != 0).mean() - 0.3) < 0.01

    def test_scalar_sampling(self):
        rng = np.random.default_rng(1)
        assert sample_output(BSC(0.0), -1, rng) == -1
        assert sample_output(Erasure(0.0), 1, rng) is ERASED
        assert likelihood(BSC(0.1), 1, 1) == 0.9

    def test_seeded(self):
        a = AWGN(1.0).sample_array(np.ones(5), np.random.default_rng(3))
        b = AWGN(1.0).sample_array(np.ones(5), np.random.default_rng(3))
        assert np.array_equal(a, b)


class TestParsing:
    @pytest.mark.parametrize(
        "spec, expected",
        [("bsc:0.25", BSC(0.25)), ("awgn:0.5", AWGN(0.5)), ("erasure:0.3", Erasure(0.3))],
    )
    def test_round_trip(self, spec, expected):
        assert parse_channel(spec) == expected
        assert str(expected) == spec

    @pytest.mark.parametrize("spec", ["bsc", "gauss:1", "bsc:abc", "erasure:1.2"])
    def test_errors_name_token(self, spec):
        with pytest.raises(ChannelError, match=spec.split(":")[0]):
            parse_channel(spec)

    def test_encode_decode(self):
        ch = Erasure(0.5)
        assert decode(encode(ERASED, ch), ch) is ERASED
        assert decode(encode(-1, ch), ch) == -1
        with pytest.raises(ChannelError):
            encode(ERASED, BSC(0.1))

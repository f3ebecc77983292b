import numpy as np
import pytest

from polardec import ChannelParams, add_noise, llr, modulate
from polardec.decode import DecoderConfig
from polardec.sim import SimConfig, run_fer


class TestModulate:
    def test_mapping(self):
        assert list(modulate([0, 1, 0])) == [1.0, -1.0, 1.0]

    def test_all_zero(self):
        assert np.all(modulate(np.zeros(16, np.uint8)) == 1.0)

    def test_hard_decision_round_trip(self, rng):
        bits = rng.integers(0, 2, 64)
        params = ChannelParams(ebn0_db=40.0, code_rate=0.5)
        y = add_noise(modulate(bits), params, rng)
        out = llr(y, params)
        assert np.array_equal(out < 0, bits.astype(bool))


class TestChannelParams:
    def test_sigma2_example(self):
        # E_b/N_0 = 4 dB at rate 60/128
        params = ChannelParams(ebn0_db=4.0, code_rate=60 / 128)
        assert abs(params.sigma2 - 0.42465) < 1e-5

    def test_rate_validation(self):
        with pytest.raises(ValueError):
            ChannelParams(ebn0_db=1.0, code_rate=0.0)


class TestAddNoise:
    def test_moments(self):
        # n = 1e6 samples: |mean| < 5 sigma/sqrt(n) = 0.005,
        # |var - 1| < 0.01 ~= 7 standard errors of the variance estimate
        params = ChannelParams(ebn0_db=0.0, code_rate=0.5)
        assert abs(params.sigma2 - 1.0) < 1e-12
        rng = np.random.default_rng(123)
        noise = add_noise(np.zeros(10 ** 6), params, rng)
        assert abs(noise.mean()) < 0.005
        assert abs(noise.var() - 1.0) < 0.01

    def test_deterministic(self):
        params = ChannelParams(ebn0_db=2.0, code_rate=0.5)
        a = add_noise(np.zeros(64), params, np.random.default_rng(9))
        b = add_noise(np.zeros(64), params, np.random.default_rng(9))
        assert np.array_equal(a, b)


class TestLlr:
    def test_zero_symmetry(self):
        params = ChannelParams(ebn0_db=3.0, code_rate=0.5)
        assert llr(np.zeros(4), params).tolist() == [0, 0, 0, 0]

    def test_formula(self):
        params = ChannelParams(ebn0_db=0.0, code_rate=0.25)
        # sigma2 = 2 at rate 1/4 and 0 dB
        assert np.allclose(llr(np.array([1.0]), params), [1.0])

    def test_sign_preserved(self, rng):
        params = ChannelParams(ebn0_db=2.0, code_rate=0.5)
        y = rng.normal(size=128)
        assert np.array_equal(np.sign(llr(y, params)), np.sign(y))


def test_all_zero_codeword_symmetry(code3):
    """FER with the all-zero shortcut matches random-codeword FER statistically."""
    base = dict(code_n=3, min_info_set=(3,), algorithm="sc",
                decoder=DecoderConfig(), snr_points=(3.0,),
                max_blocks=20000, max_errors=10 ** 9, seed=31, batch_size=1024)
    random_cw = run_fer(SimConfig(**base)).points[0]
    all_zero = run_fer(SimConfig(**base, all_zero=True)).points[0]
    sigma = np.hypot(random_cw.fer_std, all_zero.fer_std)
    assert abs(random_cw.fer - all_zero.fer) < 3.5 * sigma

import numpy as np
import pytest

from polardec import (DecoderConfig, build_code, channel_mismatch_metric,
                      polar_transform)
from polardec.sim import (SimConfig, analyze, final_list_csv, final_list_stats,
                          ml_bounds, perm_evolution_csv, permutation_evolution,
                          results_csv, run_fer, wilson_interval, _block_rng)


def small_cfg(**kw):
    base = dict(code_n=3, min_info_set=(3,), algorithm="scl",
                decoder=DecoderConfig(list_size=2), snr_points=(2.0,),
                max_blocks=4000, max_errors=100, seed=11, batch_size=128)
    base.update(kw)
    return SimConfig(**base)


class TestRunFer:
    def test_high_snr_no_errors(self):
        cfg = small_cfg(snr_points=(10.0,), max_blocks=100, max_errors=1000)
        p = run_fer(cfg).points[0]
        assert p.blocks == 100
        assert p.frame_errors == 0 and p.fer == 0.0

    def test_stops_at_exact_error_count(self):
        cfg = small_cfg(max_errors=25)
        p = run_fer(cfg).points[0]
        assert p.frame_errors == 25
        # the final block is the one carrying the 25th error
        prefix = run_fer(small_cfg(max_errors=10 ** 9, max_blocks=p.blocks - 1))
        assert prefix.points[0].frame_errors == 24

    def test_batch_size_invariance(self):
        a = run_fer(small_cfg(batch_size=64)).points[0]
        b = run_fer(small_cfg(batch_size=177)).points[0]
        assert (a.blocks, a.frame_errors, a.bit_errors) == \
               (b.blocks, b.frame_errors, b.bit_errors)

    def test_worker_invariance(self):
        a = run_fer(small_cfg(workers=1))
        b = run_fer(small_cfg(workers=3))
        assert results_csv(a) == results_csv(b)

    def test_reproducible(self):
        a = run_fer(small_cfg())
        b = run_fer(small_cfg())
        assert results_csv(a) == results_csv(b)

    def test_counter_conservation(self):
        p = run_fer(small_cfg()).points[0]
        assert p.bit_errors <= 4 * p.frame_errors
        assert 0 < p.frame_errors <= p.blocks

    def test_two_seeds_agree_within_3_sigma(self):
        cfg = dict(max_blocks=25000, max_errors=10 ** 9)
        a = run_fer(small_cfg(seed=1, **cfg)).points[0]
        b = run_fer(small_cfg(seed=2, **cfg)).points[0]
        sigma = np.hypot(a.fer_std, b.fer_std)
        assert abs(a.fer - b.fer) < 3.5 * sigma

    def test_block_rng_streams_are_stable(self):
        # the per-block stream must not depend on anything but (seed, point, index)
        a = _block_rng(7, 0, 1234).standard_normal(4)
        b = _block_rng(7, 0, 1234).standard_normal(4)
        c = _block_rng(7, 0, 1235).standard_normal(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_scal_pipeline(self):
        cfg = small_cfg(algorithm="scal", decoder=DecoderConfig(list_size=4),
                        relax_perm_classes=True, max_blocks=500,
                        max_errors=10 ** 9)
        p = run_fer(cfg).points[0]
        assert p.blocks == 500

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            small_cfg(algorithm="bogus")
        with pytest.raises(ValueError):
            small_cfg(max_errors=0)


class TestMlBounds:
    def test_noiseless_counts_zero(self):
        cfg = small_cfg(snr_points=(12.0,), max_blocks=300, max_errors=1000)
        (upper, lower), = ml_bounds(cfg, oracle_list_size=16)
        assert upper == 0.0 and lower == 0.0

    def test_lower_below_upper(self):
        cfg = small_cfg(snr_points=(1.0,), max_blocks=3000, max_errors=10 ** 9)
        (upper, lower), = ml_bounds(cfg, oracle_list_size=8)
        assert 0.0 <= lower <= upper

    def test_upper_equals_exhaustive_ml_rate(self, code3):
        """With L = 2^K the oracle winner is the ML word, so the upper counter
        must match exhaustive enumeration block by block."""
        cfg = small_cfg(snr_points=(2.0,), max_blocks=2000, max_errors=10 ** 9,
                        seed=77)
        (upper, _), = ml_bounds(cfg, oracle_list_size=16)
        words = []
        for bits in range(16):
            u = np.zeros(8, np.uint8)
            u[code3.info_set] = [(bits >> k) & 1 for k in range(4)]
            words.append(polar_transform(u))
        words = np.stack(words)
        fails = 0
        from polardec.channel import ChannelParams, llr
        params = ChannelParams(ebn0_db=2.0, code_rate=0.5)
        for blk in range(2000):
            rng = _block_rng(77, 0, blk)
            u_info = rng.integers(0, 2, size=4, dtype=np.uint8)
            noise = rng.standard_normal(8)
            u = np.zeros(8, np.uint8)
            u[code3.info_set] = u_info
            x = polar_transform(u)
            y = (1.0 - 2.0 * x) + noise * np.sqrt(params.sigma2)
            llrs = llr(y, params)
            metrics = channel_mismatch_metric(llrs[None, :], words)
            if metrics.min() < metrics[int((u_info * (1 << np.arange(4))).sum())]:
                fails += 1
        assert upper == fails / 2000


class TestAnalyze:
    def test_requires_scal(self):
        with pytest.raises(ValueError):
            analyze(small_cfg(algorithm="scl"))

    def test_statistics(self):
        cfg = small_cfg(algorithm="scal", decoder=DecoderConfig(list_size=4),
                        relax_perm_classes=True, snr_points=(1.0, 5.0),
                        max_blocks=400)
        res = analyze(cfg)
        for p in res.points:
            assert p.blocks == 400
            assert p.evolution_mean.shape == (8,)
            assert p.evolution_mean[0] == 4.0  # all origins alive at bit 0
            assert np.all(np.diff(p.evolution_mean) <= 1e-12)
            assert 1.0 <= p.mean_unique_codewords <= 4.0
            assert 1.0 <= p.mean_distinct_origins <= 4.0
        # noiseless limit: all paths converge to the transmitted codeword
        assert res.points[1].mean_unique_codewords < res.points[0].mean_unique_codewords

    def test_wrappers(self):
        cfg = small_cfg(algorithm="scal", decoder=DecoderConfig(list_size=4),
                        relax_perm_classes=True, max_blocks=200)
        evo = permutation_evolution(cfg)
        assert len(evo) == 1 and evo[0].shape == (8,)
        stats = final_list_stats(cfg)
        assert len(stats) == 1 and len(stats[0]) == 2


class TestCsvOutput:
    def test_header_and_rows(self):
        res = run_fer(small_cfg(snr_points=(2.0, 3.0), max_blocks=300,
                                max_errors=10 ** 9))
        text = results_csv(res)
        lines = text.strip().split("\n")
        assert lines[0] == ("ebn0_db,blocks,frame_errors,bit_errors,fer,ber,"
                            "fer_ci_low,fer_ci_high,ml_upper,ml_lower,seconds")
        assert len(lines) == 3
        assert all(line.endswith(",0.000") for line in lines[1:])

    def test_timing_opt_in(self):
        res = run_fer(small_cfg(max_blocks=200, max_errors=10 ** 9))
        assert results_csv(res, include_timing=True) != results_csv(res)

    def test_sidecar_formats(self):
        cfg = small_cfg(algorithm="scal", decoder=DecoderConfig(list_size=4),
                        relax_perm_classes=True, snr_points=(2.0, 4.0),
                        max_blocks=100)
        res = analyze(cfg)
        evo = perm_evolution_csv(res).strip().split("\n")
        assert evo[0] == "bit_index,2,4"
        assert len(evo) == 9  # header + one row per bit index
        fl = final_list_csv(res).strip().split("\n")
        assert fl[0] == "ebn0_db,mean_unique_codewords,mean_distinct_origins"
        assert len(fl) == 3

    def test_plain_result_has_no_sidecars(self):
        res = run_fer(small_cfg(max_blocks=100, max_errors=10 ** 9))
        with pytest.raises(ValueError):
            perm_evolution_csv(res)


class TestWilson:
    def test_basic_containment(self):
        lo, hi = wilson_interval(10, 100)
        assert 0 < lo < 0.1 < hi < 1

    def test_degenerate(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)
        lo, hi = wilson_interval(0, 50)
        assert lo == 0.0 and hi < 0.15


def test_config_from_dict_round_trip():
    d = {
        "code": {"n": 3, "min_info_set": [3]},
        "decoder": {"algorithm": "scal", "list_size": 4, "quantize": True,
                    "fast_nodes": {"rate0": True, "rate1": False,
                                   "rep": True, "spc": False},
                    "spc_split_limit": 2, "spc_size_param": 3},
        "snr_points": [1.5, 2.5],
        "max_blocks": 1000, "max_errors": 10, "seed": 3, "workers": 2,
        "batch_size": 64, "all_zero": True, "track_ml": True,
        "relax_perm_classes": True,
    }
    cfg = SimConfig.from_dict(d)
    assert cfg.algorithm == "scal"
    assert cfg.decoder.list_size == 4
    assert cfg.decoder.quantize
    assert cfg.decoder.fast_rate0 and not cfg.decoder.fast_rate1
    assert cfg.decoder.spc_split_limit == 2
    assert cfg.snr_points == (1.5, 2.5)
    assert cfg.all_zero and cfg.track_ml and cfg.relax_perm_classes
    with pytest.raises(ValueError):
        SimConfig.from_dict({"code": {"n": 3, "min_info_set": [3]},
                             "decoder": {"bogus_field": 1}})

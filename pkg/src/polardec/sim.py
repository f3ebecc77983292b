"""Monte-Carlo FER/BER harness with ML-bound counters and permutation statistics.

Every block draws its randomness from a Philox stream keyed by (master seed,
SNR-point index, block index), so results are bit-identical for any worker
count or batch size.  Blocks are consumed in index order and a run stops at
the exact block where the error limit is reached.
"""

from __future__ import annotations

import math
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .autom import select_permutations
from .channel import ChannelParams, llr as channel_llr
from .code import PolarCode, build_code, polar_transform
from .decode import (AedEnsemble, DecoderConfig, ListEngine,
                     channel_mismatch_metric)

__all__ = [
    "DEFAULT_SEED",
    "SimConfig",
    "PointResult",
    "SimResult",
    "run_fer",
    "ml_bounds",
    "permutation_evolution",
    "final_list_stats",
    "analyze",
    "results_csv",
    "perm_evolution_csv",
    "final_list_csv",
    "wilson_interval",
]

DEFAULT_SEED = 123456789

_MASK64 = (1 << 64) - 1
_NOISE_STREAM = 1 << 62
_PERM_STREAM = 2 << 62

ALGORITHMS = ("sc", "scl", "scal", "aed")


def _stream_rng(seed: int, stream: int):
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _block_rng(seed: int, point_idx: int, block_idx: int):
    return _stream_rng(seed, _NOISE_STREAM | (point_idx << 44) | block_idx)


@dataclass(frozen=True)
class SimConfig:
    """One simulation campaign: code, decoder, SNR sweep and stopping rules."""

    code_n: int
    min_info_set: tuple[int, ...]
    algorithm: str = "scl"
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    inner_list_size: int = 1          # AED constituent list size (1 = SC)
    snr_points: tuple[float, ...] = (3.0,)
    max_blocks: int = 10 ** 8
    max_errors: int = 1000
    seed: int = DEFAULT_SEED
    workers: int = 1
    batch_size: int = 256
    all_zero: bool = False
    track_ml: bool = False
    relax_perm_classes: bool = False
    instrument: bool = False          # internal: record permutation statistics

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.max_blocks < 1 or self.max_errors < 1:
            raise ValueError("max_blocks and max_errors must be >= 1")
        if self.batch_size < 1 or self.workers < 0:
            raise ValueError("batch_size must be >= 1 and workers >= 0")
        if not self.snr_points:
            raise ValueError("need at least one SNR point")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative 64-bit integer")

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        try:
            code = d["code"]
            dec = dict(d.get("decoder", {}))
        except (TypeError, KeyError) as exc:
            raise ValueError(f"malformed config: {exc}") from exc
        algorithm = dec.pop("algorithm", "scl")
        inner_list_size = int(dec.pop("inner_list_size", 1))
        fast = dec.pop("fast_nodes", False)
        if isinstance(fast, bool):
            flags = dict.fromkeys(("rate0", "rate1", "rep", "spc"), fast)
        else:
            flags = {k: bool(fast.get(k, False)) for k in ("rate0", "rate1", "rep", "spc")}
        known = {"list_size", "quantize", "llr_bits", "pm_bits", "llr_scale",
                 "spc_split_limit", "spc_size_param"}
        unknown = set(dec) - known
        if unknown:
            raise ValueError(f"unknown decoder fields: {sorted(unknown)}")
        decoder = DecoderConfig(
            fast_rate0=flags["rate0"], fast_rate1=flags["rate1"],
            fast_rep=flags["rep"], fast_spc=flags["spc"], **dec)
        kwargs = {}
        for key in ("max_blocks", "max_errors", "seed", "workers", "batch_size"):
            if key in d:
                kwargs[key] = int(d[key])
        for key in ("all_zero", "track_ml", "relax_perm_classes"):
            if key in d:
                kwargs[key] = bool(d[key])
        return cls(
            code_n=int(code["n"]),
            min_info_set=tuple(int(g) for g in code["min_info_set"]),
            algorithm=algorithm,
            decoder=decoder,
            inner_list_size=inner_list_size,
            snr_points=tuple(float(s) for s in d.get("snr_points", (3.0,))),
            **kwargs,
        )


@dataclass
class PointResult:
    """Counters and statistics for one SNR point."""

    ebn0_db: float
    info_bits: int
    blocks: int = 0
    frame_errors: int = 0
    bit_errors: int = 0
    ml_upper_count: int = 0
    ml_lower_count: int = 0
    seconds: float = 0.0
    evolution_mean: np.ndarray | None = None
    mean_unique_codewords: float | None = None
    sem_unique_codewords: float | None = None
    mean_distinct_origins: float | None = None
    sem_distinct_origins: float | None = None

    @property
    def fer(self) -> float:
        return self.frame_errors / self.blocks if self.blocks else 0.0

    @property
    def ber(self) -> float:
        total = self.blocks * self.info_bits
        return self.bit_errors / total if total else 0.0

    @property
    def fer_ci(self) -> tuple[float, float]:
        return wilson_interval(self.frame_errors, self.blocks)

    @property
    def fer_std(self) -> float:
        """Monte-Carlo standard deviation of the FER estimate."""
        if not self.blocks:
            return 0.0
        p = self.fer
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.blocks)


@dataclass
class SimResult:
    config: SimConfig
    points: list[PointResult]


def wilson_interval(fails: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial rate."""
    if trials == 0:
        return (0.0, 1.0)
    p = fails / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


class _Context:
    """Per-process decoding context rebuilt deterministically from the config."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.code = build_code(cfg.code_n, cfg.min_info_set)
        self.params = [ChannelParams(ebn0_db=s, code_rate=self.code.K / self.code.N)
                       for s in cfg.snr_points]
        dec = cfg.decoder
        if cfg.instrument:
            if cfg.algorithm != "scal":
                raise ValueError("permutation statistics require the scal decoder")
            dec = replace(dec, fast_rate0=False, fast_rate1=False,
                          fast_rep=False, fast_spc=False)
        if cfg.algorithm == "sc":
            dec = replace(dec, list_size=1)
        self.perms = None
        if cfg.algorithm in ("scal", "aed"):
            rng = _stream_rng(cfg.seed, _PERM_STREAM)
            self.perms = select_permutations(
                self.code, dec.list_size, rng,
                distinct_classes=not cfg.relax_perm_classes)
        if cfg.algorithm == "aed":
            inner = replace(dec, list_size=cfg.inner_list_size)
            self.decoder = AedEnsemble(self.code, self.perms, inner)
        elif cfg.algorithm == "scal":
            self.decoder = ListEngine(self.code, dec, perms=self.perms,
                                      record_evolution=cfg.instrument)
        else:
            self.decoder = ListEngine(self.code, dec)

    def run_batch(self, point_idx: int, start: int, count: int) -> dict:
        cfg = self.cfg
        code = self.code
        params = self.params[point_idx]
        u_info = np.zeros((count, code.K), dtype=np.uint8)
        noise = np.empty((count, code.N), dtype=np.float64)
        for i in range(count):
            rng = _block_rng(cfg.seed, point_idx, start + i)
            if not cfg.all_zero:
                u_info[i] = rng.integers(0, 2, size=code.K, dtype=np.uint8)
            noise[i] = rng.standard_normal(code.N)
        u = np.zeros((count, code.N), dtype=np.uint8)
        u[:, code.info_set] = u_info
        x = polar_transform(u)
        y = (1.0 - 2.0 * x) + noise * math.sqrt(params.sigma2)
        llrs = channel_llr(y, params)
        res = self.decoder.decode_batch(llrs)
        mismatch = res.u_hat != u_info
        out = {
            "err": mismatch.any(axis=1),
            "bit_errors": mismatch.sum(axis=1).astype(np.int64),
        }
        if cfg.track_ml:
            d_tx = channel_mismatch_metric(llrs, x)
            d_dec = channel_mismatch_metric(llrs, res.x_hat)
            in_list = (res.codewords == x[:, None, :]).all(axis=2).any(axis=1)
            out["ml_upper"] = d_dec < d_tx
            out["ml_lower"] = out["ml_upper"] & in_list
        if cfg.instrument:
            out["evolution"] = res.evolution
            srt = np.sort(res.origins, axis=1)
            out["distinct_origins"] = (np.diff(srt, axis=1) != 0).sum(axis=1) + 1
            packed = np.packbits(res.codewords, axis=-1)
            out["unique_codewords"] = np.array(
                [len({row.tobytes() for row in blk}) for blk in packed],
                dtype=np.int64)
        return out


class _PointAccumulator:
    """Consumes batch results in block-index order; truncates at the error cap."""

    def __init__(self, cfg: SimConfig, ebn0_db: float, info_bits: int):
        self.cfg = cfg
        self.result = PointResult(ebn0_db=ebn0_db, info_bits=info_bits)
        self.done = False
        n = 1 << cfg.code_n
        self._evo_sum = np.zeros(n, dtype=np.float64) if cfg.instrument else None
        self._uniq = [0.0, 0.0]
        self._orig = [0.0, 0.0]

    def consume(self, out: dict):
        cfg = self.cfg
        r = self.result
        flags = out["err"]
        taken = flags.size
        cum = r.frame_errors + np.cumsum(flags)
        hit = np.flatnonzero(cum >= cfg.max_errors)
        if hit.size:
            taken = int(hit[0]) + 1
            self.done = True
        r.blocks += taken
        r.frame_errors += int(flags[:taken].sum())
        r.bit_errors += int(out["bit_errors"][:taken].sum())
        if cfg.track_ml:
            r.ml_upper_count += int(out["ml_upper"][:taken].sum())
            r.ml_lower_count += int(out["ml_lower"][:taken].sum())
        if cfg.instrument:
            self._evo_sum += out["evolution"][:taken].sum(axis=0)
            uq = out["unique_codewords"][:taken].astype(np.float64)
            og = out["distinct_origins"][:taken].astype(np.float64)
            self._uniq[0] += uq.sum()
            self._uniq[1] += (uq * uq).sum()
            self._orig[0] += og.sum()
            self._orig[1] += (og * og).sum()
        if r.blocks >= cfg.max_blocks:
            self.done = True

    def finalize(self):
        r = self.result
        if self.cfg.instrument and r.blocks:
            n = r.blocks
            r.evolution_mean = self._evo_sum / n
            for (s, s2), (m_attr, e_attr) in (
                (self._uniq, ("mean_unique_codewords", "sem_unique_codewords")),
                (self._orig, ("mean_distinct_origins", "sem_distinct_origins")),
            ):
                mean = s / n
                var = max(s2 / n - mean * mean, 0.0)
                setattr(r, m_attr, mean)
                setattr(r, e_attr, math.sqrt(var / n))
        return r


_WORKER_CTX: _Context | None = None


def _init_worker(cfg: SimConfig):
    global _WORKER_CTX
    _WORKER_CTX = _Context(cfg)


def _worker_batch(args):
    point_idx, start, count = args
    return _WORKER_CTX.run_batch(point_idx, start, count)


def _run_point(cfg, ctx, executor, point_idx, ebn0_db):
    acc = _PointAccumulator(cfg, ebn0_db, ctx.code.K)
    t0 = time.perf_counter()
    if executor is None:
        start = 0
        while not acc.done and start < cfg.max_blocks:
            count = min(cfg.batch_size, cfg.max_blocks - start)
            acc.consume(ctx.run_batch(point_idx, start, count))
            start += count
    else:
        window = max(cfg.workers, 1) * 2
        pending = deque()
        start = 0
        while True:
            while not acc.done and start < cfg.max_blocks and len(pending) < window:
                count = min(cfg.batch_size, cfg.max_blocks - start)
                pending.append(executor.submit(_worker_batch, (point_idx, start, count)))
                start += count
            if not pending:
                break
            acc.consume(pending.popleft().result())
            if acc.done:
                for fut in pending:
                    fut.cancel()
                pending.clear()
                break
    res = acc.finalize()
    res.seconds = time.perf_counter() - t0
    return res


def run_fer(cfg: SimConfig) -> SimResult:
    """Sweep the configured SNR points, stopping each at max_errors or max_blocks.

    Results are fully determined by (config, seed) and independent of
    ``workers`` and ``batch_size``.
    """
    ctx = _Context(cfg)
    points = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers,
                                 initializer=_init_worker,
                                 initargs=(cfg,)) as executor:
            for pi, ebn0 in enumerate(cfg.snr_points):
                points.append(_run_point(cfg, ctx, executor, pi, ebn0))
    else:
        for pi, ebn0 in enumerate(cfg.snr_points):
            points.append(_run_point(cfg, ctx, None, pi, ebn0))
    return SimResult(config=cfg, points=points)


def ml_bounds(cfg: SimConfig, oracle_list_size: int | None = None):
    """Upper/lower ML failure-rate estimates from a large-list SCL oracle.

    A block counts toward the upper bound when the oracle's winner is strictly
    closer to the channel output (in the mismatch metric) than the transmitted
    codeword, and toward the lower bound when additionally the transmitted
    codeword appears in the oracle's final list.  Returns one (upper, lower)
    rate pair per SNR point.
    """
    size = oracle_list_size if oracle_list_size is not None else 128
    oracle = replace(cfg, algorithm="scl", track_ml=True,
                     decoder=replace(cfg.decoder, list_size=size))
    result = run_fer(oracle)
    return [(p.ml_upper_count / p.blocks if p.blocks else 0.0,
             p.ml_lower_count / p.blocks if p.blocks else 0.0)
            for p in result.points]


def analyze(cfg: SimConfig) -> SimResult:
    """Run the permutation-statistics campaign (SCAL only).

    Records, per SNR point, the mean number of distinct origins after every
    bit index plus the mean number of unique un-permuted codewords and of
    distinct origins in the final list.  Runs exactly ``max_blocks`` blocks
    per point (the error cap does not apply) with fast nodes disabled so that
    every leaf is materialized.
    """
    if cfg.algorithm != "scal":
        raise ValueError("analyze requires the scal decoder")
    cfg = replace(cfg, instrument=True, max_errors=cfg.max_blocks + 1,
                  track_ml=False)
    return run_fer(cfg)


def permutation_evolution(cfg: SimConfig):
    """Mean distinct-origin count after each bit index, one vector per SNR point."""
    return [p.evolution_mean for p in analyze(cfg).points]


def final_list_stats(cfg: SimConfig):
    """(mean unique codewords, mean distinct origins) in the final list, per point."""
    return [(p.mean_unique_codewords, p.mean_distinct_origins)
            for p in analyze(cfg).points]


# -- output formatting ------------------------------------------------------

CSV_HEADER = ("ebn0_db,blocks,frame_errors,bit_errors,fer,ber,"
              "fer_ci_low,fer_ci_high,ml_upper,ml_lower,seconds")


def results_csv(result: SimResult, include_timing: bool = False) -> str:
    """Render the sweep as CSV.

    ``seconds`` is written as 0.000 unless ``include_timing`` is set, keeping
    default output files byte-identical across reruns and worker counts.
    """
    lines = [CSV_HEADER]
    for p in result.points:
        lo, hi = p.fer_ci
        blocks = max(p.blocks, 1)
        secs = p.seconds if include_timing else 0.0
        lines.append(
            f"{p.ebn0_db:g},{p.blocks},{p.frame_errors},{p.bit_errors},"
            f"{p.fer:.6e},{p.ber:.6e},{lo:.6e},{hi:.6e},"
            f"{p.ml_upper_count / blocks:.6e},{p.ml_lower_count / blocks:.6e},"
            f"{secs:.3f}")
    return "\n".join(lines) + "\n"


def perm_evolution_csv(result: SimResult) -> str:
    """Mean distinct-origin evolution: one row per bit index, one column per SNR point."""
    points = result.points
    if any(p.evolution_mean is None for p in points):
        raise ValueError("result carries no permutation-evolution statistics")
    header = "bit_index," + ",".join(f"{p.ebn0_db:g}" for p in points)
    lines = [header]
    n = points[0].evolution_mean.size
    for i in range(n):
        row = ",".join(f"{p.evolution_mean[i]:.6f}" for p in points)
        lines.append(f"{i},{row}")
    return "\n".join(lines) + "\n"


def final_list_csv(result: SimResult) -> str:
    lines = ["ebn0_db,mean_unique_codewords,mean_distinct_origins"]
    for p in result.points:
        if p.mean_unique_codewords is None:
            raise ValueError("result carries no final-list statistics")
        lines.append(f"{p.ebn0_db:g},{p.mean_unique_codewords:.6f},"
                     f"{p.mean_distinct_origins:.6f}")
    return "\n".join(lines) + "\n"

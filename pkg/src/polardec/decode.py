"""SC, SCL, SCAL and AED decoding over the polar factor tree.

The engine processes a batch of blocks at once: every tree operation is
vectorized over (block, path) and the Sort & Select step reduces to a stable
argsort per block.  Live per-path tree state (the alpha/beta vectors held by
ancestors of the current leaf) is tracked through cheap row maps, so a path
permutation only touches (block, path)-sized index arrays; full vectors are
re-gathered once, when they are consumed.

Float mode (float64) is the reference; quantized mode uses saturating
integer arithmetic only and is bit-reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .autom import PermutationSet
from .code import PolarCode, polar_transform

__all__ = [
    "DecoderConfig",
    "Candidate",
    "DecodeOutcome",
    "BatchResult",
    "ListEngine",
    "AedEnsemble",
    "f_minsum",
    "g_minsum",
    "h_combine",
    "quantize_llr",
    "channel_mismatch_metric",
    "sc_decode",
    "scl_decode",
    "scal_decode",
    "aed_decode",
]


def f_minsum(a, b):
    """Min-sum f-function: sign(a) sign(b) min(|a|, |b|)."""
    a = np.asarray(a)
    b = np.asarray(b)
    mn = np.minimum(np.abs(a), np.abs(b))
    if a.dtype.kind == "f" or b.dtype.kind == "f":
        return np.copysign(mn, a * b)
    return np.sign(a) * np.sign(b) * mn


def g_minsum(a, b, beta, max_mag=None):
    """Min-sum g-function: b + (1 - 2 beta) a, saturating to ±max_mag if given."""
    a = np.asarray(a)
    b = np.asarray(b)
    out = b + np.where(np.asarray(beta) != 0, -a, a)
    if max_mag is not None:
        out = np.clip(out, -max_mag, max_mag)
    return out


def h_combine(beta_l, beta_r):
    """Partial-sum combination: concatenate (beta_l XOR beta_r) with beta_r."""
    bl = np.asarray(beta_l, dtype=np.uint8)
    br = np.asarray(beta_r, dtype=np.uint8)
    if bl.shape != br.shape:
        raise ValueError("partial-sum halves must have equal shape")
    return np.concatenate([bl ^ br, br], axis=-1)


def quantize_llr(v, bits: int = 6, scale: float = 2.0):
    """Round-to-even quantizer with symmetric saturation to ``bits`` total width."""
    if bits < 2:
        raise ValueError("need at least 2 bits")
    mag = (1 << (bits - 1)) - 1
    q = np.rint(np.asarray(v, dtype=np.float64) * scale)
    return np.clip(q, -mag, mag).astype(np.int32)


def channel_mismatch_metric(llrs, codewords):
    """Sum of |llr| over positions where the codeword disagrees with the hard decision.

    Broadcasts over leading axes, so a single LLR vector can be scored against
    many candidate codewords at once.
    """
    llrs = np.asarray(llrs)
    cw = np.asarray(codewords, dtype=np.uint8)
    mismatch = cw.astype(bool) ^ (llrs < 0)
    return np.where(mismatch, np.abs(llrs), 0).sum(axis=-1)


@dataclass(frozen=True)
class DecoderConfig:
    """List size, quantization widths and fast special-node settings.

    ``spc_split_limit`` caps the candidate-generation stages of a fast SPC
    node (None = full splitting, which is bit-exact against the leaf-by-leaf
    recursion); fast SPC handling only applies to nodes larger than
    ``2**spc_size_param``, smaller ones fall back to the exact recursion.
    """

    list_size: int = 1
    quantize: bool = False
    llr_bits: int = 6
    pm_bits: int = 8
    llr_scale: float = 2.0
    fast_rate0: bool = False
    fast_rate1: bool = False
    fast_rep: bool = False
    fast_spc: bool = False
    spc_split_limit: int | None = None
    spc_size_param: int = 0

    def __post_init__(self):
        if self.list_size < 1:
            raise ValueError("list_size must be >= 1")
        if self.llr_bits < 2 or self.pm_bits < 1:
            raise ValueError("quantizer widths too small")
        if self.spc_split_limit is not None and self.spc_split_limit < 0:
            raise ValueError("spc_split_limit must be >= 0")
        if self.spc_size_param < 0:
            raise ValueError("spc_size_param must be >= 0")

    @classmethod
    def with_fast_nodes(cls, list_size: int = 1, **kwargs) -> "DecoderConfig":
        return cls(list_size=list_size, fast_rate0=True, fast_rate1=True,
                   fast_rep=True, fast_spc=True, **kwargs)

    @property
    def any_fast(self) -> bool:
        return self.fast_rate0 or self.fast_rate1 or self.fast_rep or self.fast_spc


@dataclass(frozen=True)
class Candidate:
    codeword: np.ndarray
    pm: float
    origin: int


@dataclass(frozen=True)
class DecodeOutcome:
    """Winning codeword plus the full pm-sorted final candidate list."""

    x_hat: np.ndarray
    u_hat: np.ndarray
    winner_origin: int
    final_list: tuple[Candidate, ...]


@dataclass
class BatchResult:
    """Per-block arrays from a batched decode; list axis is pm-sorted.

    ``codewords`` are already un-permuted for permutation-seeded decoders.
    ``evolution[b, i]`` (optional) is the number of distinct origins among
    surviving paths right after leaf ``i`` was decided.
    """

    codewords: np.ndarray  # (B, P, N) uint8
    pms: np.ndarray        # (B, P)
    origins: np.ndarray    # (B, P) int32
    x_hat: np.ndarray      # (B, N) uint8
    u_hat: np.ndarray      # (B, K) uint8
    evolution: np.ndarray | None = None


def _node_plan(code: PolarCode, cfg: DecoderConfig) -> dict:
    """Maximal subtrees handled by fast special nodes, keyed by (depth, node)."""
    plan = {}

    def walk(depth, node):
        size = 1 << (code.n - depth)
        lo = node * size
        seg = code.frozen_mask[lo:lo + size]
        if size >= 2:
            if cfg.fast_rate0 and seg.all():
                plan[(depth, node)] = "rate0"
                return
            if cfg.fast_rate1 and not seg.any():
                plan[(depth, node)] = "rate1"
                return
            if cfg.fast_rep and seg[:-1].all() and not seg[-1]:
                plan[(depth, node)] = "rep"
                return
            if (cfg.fast_spc and seg[0] and not seg[1:].any()
                    and size > (1 << cfg.spc_size_param)):
                plan[(depth, node)] = "spc"
                return
        if depth < code.n:
            walk(depth + 1, 2 * node)
            walk(depth + 1, 2 * node + 1)

    walk(0, 0)
    return plan


class _Live:
    """A per-path array kept alive across Sort & Select steps.

    ``rowmap`` composes all path permutations since registration; None means
    the identity.  The array is re-gathered only on release.
    """

    __slots__ = ("arr", "rowmap")

    def __init__(self, arr):
        self.arr = arr
        self.rowmap = None


class ListEngine:
    """Batched successive-cancellation list decoder.

    One instance decodes any number of batches sequentially (state is reset
    per call) but is not thread-safe.  With ``perms`` given, the list starts
    full: path l works on the l-th permuted input and carries origin l, and
    winning codewords are un-permuted before they are reported.
    """

    def __init__(self, code: PolarCode, cfg: DecoderConfig,
                 perms: PermutationSet | None = None,
                 record_evolution: bool = False):
        if perms is not None and len(perms) != cfg.list_size:
            raise ValueError(
                f"permutation count {len(perms)} != list size {cfg.list_size}")
        self.code = code
        self.cfg = cfg
        self.perms = perms
        self._plan = _node_plan(code, cfg)
        if record_evolution and self._plan:
            raise ValueError("evolution recording requires fast nodes disabled")
        self.record_evolution = record_evolution
        self.llr_max = (1 << (cfg.llr_bits - 1)) - 1 if cfg.quantize else None
        self.pm_max = (1 << cfg.pm_bits) - 1 if cfg.quantize else None
        if perms is not None:
            self._perm_mat = perms.perm_matrix()
            self._inv_mat = perms.inv_perm_matrix()

    # -- live-state helpers -------------------------------------------------

    def _register(self, arr) -> _Live:
        entry = _Live(arr)
        self._live.append(entry)
        return entry

    def _release(self, entry: _Live):
        assert self._live.pop() is entry
        if entry.rowmap is None:
            return entry.arr
        return entry.arr[self._bidx, entry.rowmap]

    def _pm_add(self, pen):
        self.pm = self.pm + pen
        if self.pm_max is not None:
            np.minimum(self.pm, self.pm_max, out=self.pm)

    def _distinct_origins(self):
        srt = np.sort(self.origin, axis=1)
        return (np.diff(srt, axis=1) != 0).sum(axis=1) + 1

    def _split2(self, pen_flip, pen_keep=None, extras=()):
        """Split every path into keep/flip candidates and select the best L.

        Candidates are ordered [keep paths..., flip paths...] and sorted
        stably, so at equal pm a continuation outranks its sibling flip and
        survivors keep their pre-sort rank.  Returns the flip flags of the
        survivors plus path-gathered copies of ``extras``.
        """
        P = self.pm.shape[1]
        L = self.cfg.list_size
        keep = self.pm if pen_keep is None else self.pm + pen_keep
        flip_pm = self.pm + pen_flip
        if self.pm_max is not None:
            if pen_keep is not None:
                keep = np.minimum(keep, self.pm_max)
            flip_pm = np.minimum(flip_pm, self.pm_max)
        if P == 1 and L == 1:
            # degenerate list: the flip branch survives only on a strict win
            flip = flip_pm < keep
            self.pm = np.where(flip, flip_pm, keep)
            return flip, extras
        cand = np.concatenate([keep, flip_pm], axis=1)
        if 2 * P <= L:
            order = np.broadcast_to(np.arange(2 * P), cand.shape)
        else:
            order = np.argsort(cand, axis=1, kind="stable")[:, :L]
        parent = order % P
        flip = order >= P
        self.pm = cand[self._bidx, order]
        self.origin = self.origin[self._bidx, parent]
        for entry in self._live:
            entry.rowmap = parent if entry.rowmap is None \
                else entry.rowmap[self._bidx, parent]
        gathered = tuple(arr[self._bidx, parent] for arr in extras)
        return flip, gathered

    # -- tree traversal -----------------------------------------------------

    def _visit(self, depth, node, alpha):
        kind = self._plan.get((depth, node))
        if kind == "rate0":
            return self._node_rate0(alpha)
        if kind == "rate1":
            return self._node_rate1(alpha)
        if kind == "rep":
            return self._node_rep(alpha)
        if kind == "spc":
            return self._node_spc(alpha)
        if depth == self.code.n:
            return self._leaf(node, alpha)
        half = alpha.shape[-1] // 2
        left = f_minsum(alpha[..., :half], alpha[..., half:])
        held = self._register(alpha)
        beta_l = self._visit(depth + 1, 2 * node, left)
        alpha = self._release(held)
        right = g_minsum(alpha[..., :half], alpha[..., half:], beta_l,
                         max_mag=self.llr_max)
        held = self._register(beta_l)
        beta_r = self._visit(depth + 1, 2 * node + 1, right)
        beta_l = self._release(held)
        return np.concatenate([beta_l ^ beta_r, beta_r], axis=-1)

    def _leaf(self, node, alpha):
        a = alpha[..., 0]
        if self.code.frozen_mask[node]:
            self._pm_add(np.where(a < 0, -a, 0))
            beta = np.zeros(a.shape + (1,), dtype=np.uint8)
        else:
            hdd = (a < 0).astype(np.uint8)
            flip, (hdd,) = self._split2(np.abs(a), extras=(hdd,))
            beta = (hdd ^ flip.astype(np.uint8))[..., None]
        if self.evo is not None:
            self.evo[:, node] = self._distinct_origins()
        return beta

    def _node_rate0(self, alpha):
        self._pm_add(np.where(alpha < 0, -alpha, 0).sum(axis=-1))
        return np.zeros(alpha.shape, dtype=np.uint8)

    def _node_rep(self, alpha):
        width = alpha.shape[-1]
        cost0 = np.where(alpha < 0, -alpha, 0).sum(axis=-1)
        cost1 = np.where(alpha > 0, alpha, 0).sum(axis=-1)
        flip, _ = self._split2(cost1, pen_keep=cost0)
        return np.repeat(flip.astype(np.uint8)[:, :, None], width, axis=2)

    def _node_rate1(self, alpha):
        bits = (alpha < 0).astype(np.uint8)
        nsplits = min(self.cfg.list_size - 1, alpha.shape[-1])
        if nsplits == 0:
            return bits
        mag = np.abs(alpha)
        cols = np.argsort(mag, axis=-1, kind="stable")[..., :nsplits]
        pens = np.take_along_axis(mag, cols, axis=-1)
        held = self._register(bits)
        flips = np.zeros(cols.shape, dtype=np.uint8)
        for s in range(nsplits):
            flip, (flips, cols, pens) = self._split2(
                pens[..., s], extras=(flips, cols, pens))
            flips[..., s] = flip
        bits = self._release(held)
        for s in range(nsplits):
            rb, rp = np.nonzero(flips[..., s])
            bits[rb, rp, cols[rb, rp, s]] ^= 1
        return bits

    def _node_spc(self, alpha):
        width = alpha.shape[-1]
        bits = (alpha < 0).astype(np.uint8)
        mag = np.abs(alpha)
        # min(L, width-1) stages already reproduce the leaf-by-leaf list exactly
        full = min(self.cfg.list_size, width - 1)
        limit = full if self.cfg.spc_split_limit is None \
            else min(self.cfg.spc_split_limit, width - 1)
        cols = np.argsort(mag, axis=-1, kind="stable")[..., :limit + 1]
        pens = np.take_along_axis(mag, cols, axis=-1)
        parity = np.bitwise_xor.reduce(bits, axis=-1)
        amin = pens[..., 0]
        self._pm_add(np.where(parity != 0, amin, np.zeros_like(amin)))
        held = self._register(bits)
        # fstate: 1 while the least-reliable position is flipped
        fstate = parity
        flips = np.zeros(cols.shape[:2] + (limit,), dtype=np.uint8)
        for s in range(1, 1 + limit):
            delta = pens[..., s] + np.where(fstate != 0, -pens[..., 0], pens[..., 0])
            flip, (flips, cols, pens, fstate) = self._split2(
                delta, extras=(flips, cols, pens, fstate))
            flip8 = flip.astype(np.uint8)
            flips[..., s - 1] = flip8
            fstate = fstate ^ flip8
        bits = self._release(held)
        rb, rp = np.nonzero(fstate)
        bits[rb, rp, cols[rb, rp, 0]] ^= 1
        for s in range(limit):
            rb, rp = np.nonzero(flips[..., s])
            bits[rb, rp, cols[rb, rp, s + 1]] ^= 1
        return bits

    # -- entry points ---------------------------------------------------------

    def decode_batch(self, channel_llrs) -> BatchResult:
        channel_llrs = np.asarray(channel_llrs, dtype=np.float64)
        if channel_llrs.ndim != 2 or channel_llrs.shape[1] != self.code.N:
            raise ValueError(f"expected (B, {self.code.N}) channel LLRs")
        B = channel_llrs.shape[0]
        if self.perms is not None:
            root = channel_llrs[:, self._inv_mat]  # path l sees the l-th permutation
            origin0 = np.arange(len(self.perms), dtype=np.int32)
        else:
            root = channel_llrs[:, None, :]
            origin0 = np.zeros(1, dtype=np.int32)
        if self.cfg.quantize:
            root = quantize_llr(root, self.cfg.llr_bits, self.cfg.llr_scale)
            self.pm = np.zeros((B, root.shape[1]), dtype=np.int64)
        else:
            self.pm = np.zeros((B, root.shape[1]), dtype=np.float64)
        self.origin = np.broadcast_to(origin0, (B, root.shape[1])).copy()
        self.evo = np.zeros((B, self.code.N), dtype=np.int16) \
            if self.record_evolution else None
        self._bidx = np.arange(B)[:, None]
        self._live = []
        beta_root = self._visit(0, 0, root)
        assert not self._live
        return self._finalize(beta_root)

    def _finalize(self, beta_root) -> BatchResult:
        order = np.argsort(self.pm, axis=1, kind="stable")
        pms = self.pm[self._bidx, order]
        origins = self.origin[self._bidx, order]
        codewords = beta_root[self._bidx, order]
        if self.perms is not None:
            codewords = np.take_along_axis(codewords, self._perm_mat[origins], axis=2)
        x_hat = codewords[:, 0, :]
        u_hat = polar_transform(x_hat)[:, self.code.info_set]
        return BatchResult(codewords=codewords, pms=pms, origins=origins,
                           x_hat=x_hat, u_hat=u_hat, evolution=self.evo)


class AedEnsemble:
    """Automorphism ensemble: independent inner decoders on permuted inputs.

    The ensemble is folded into the batch axis, so all M constituent decoders
    run through one engine call; the winner minimizes the channel mismatch
    metric against the original (un-permuted) LLRs, ties broken by the lowest
    ensemble index.
    """

    def __init__(self, code: PolarCode, perms: PermutationSet,
                 inner: DecoderConfig | None = None):
        self.code = code
        self.perms = perms
        self.inner = inner if inner is not None else DecoderConfig()
        self._engine = ListEngine(code, self.inner)
        self._perm_mat = perms.perm_matrix()
        self._inv_mat = perms.inv_perm_matrix()

    def decode_batch(self, channel_llrs) -> BatchResult:
        channel_llrs = np.asarray(channel_llrs, dtype=np.float64)
        if channel_llrs.ndim != 2 or channel_llrs.shape[1] != self.code.N:
            raise ValueError(f"expected (B, {self.code.N}) channel LLRs")
        B = channel_llrs.shape[0]
        M = len(self.perms)
        permuted = channel_llrs[:, self._inv_mat]  # (B, M, N)
        res = self._engine.decode_batch(permuted.reshape(B * M, self.code.N))
        x = res.x_hat.reshape(B, M, self.code.N)
        x = np.take_along_axis(x, np.broadcast_to(self._perm_mat, (B, M, self.code.N)),
                               axis=2)
        ref = channel_llrs
        if self.inner.quantize:
            ref = quantize_llr(ref, self.inner.llr_bits, self.inner.llr_scale)
        metric = channel_mismatch_metric(ref[:, None, :], x)
        order = np.argsort(metric, axis=1, kind="stable")
        bidx = np.arange(B)[:, None]
        codewords = x[bidx, order]
        pms = metric[bidx, order]
        x_hat = codewords[:, 0, :]
        u_hat = polar_transform(x_hat)[:, self.code.info_set]
        return BatchResult(codewords=codewords, pms=pms,
                           origins=order.astype(np.int32),
                           x_hat=x_hat, u_hat=u_hat)


def _outcome(res: BatchResult, b: int = 0) -> DecodeOutcome:
    final = tuple(
        Candidate(codeword=res.codewords[b, p].copy(),
                  pm=float(res.pms[b, p]),
                  origin=int(res.origins[b, p]))
        for p in range(res.pms.shape[1])
    )
    return DecodeOutcome(x_hat=res.x_hat[b].copy(), u_hat=res.u_hat[b].copy(),
                         winner_origin=int(res.origins[b, 0]), final_list=final)


def sc_decode(code: PolarCode, channel_llrs, cfg: DecoderConfig | None = None) -> DecodeOutcome:
    """Plain successive cancellation (a list decoder with L = 1)."""
    cfg = replace(cfg, list_size=1) if cfg is not None else DecoderConfig()
    llrs = np.asarray(channel_llrs, dtype=np.float64)[None, :]
    return _outcome(ListEngine(code, cfg).decode_batch(llrs))


def scl_decode(code: PolarCode, channel_llrs, cfg: DecoderConfig) -> DecodeOutcome:
    """Successive cancellation list decoding; the winner is list index 0."""
    llrs = np.asarray(channel_llrs, dtype=np.float64)[None, :]
    return _outcome(ListEngine(code, cfg).decode_batch(llrs))


def scal_decode(code: PolarCode, channel_llrs, perms: PermutationSet,
                cfg: DecoderConfig) -> DecodeOutcome:
    """List decoding seeded with one permuted input per path.

    All L paths start with pm 0 and compete from the first frozen leaf on;
    every reported codeword is un-permuted by its own origin's inverse.
    """
    llrs = np.asarray(channel_llrs, dtype=np.float64)[None, :]
    return _outcome(ListEngine(code, cfg, perms=perms).decode_batch(llrs))


def aed_decode(code: PolarCode, channel_llrs, perms: PermutationSet,
               inner: DecoderConfig | None = None) -> DecodeOutcome:
    """Automorphism ensemble decoding with SC (default) or SCL constituents."""
    llrs = np.asarray(channel_llrs, dtype=np.float64)[None, :]
    return _outcome(AedEnsemble(code, perms, inner).decode_batch(llrs))

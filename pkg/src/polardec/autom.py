"""BLTA automorphisms of decreasing polar codes: block profile, sampling, selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .code import PolarCode, polar_transform

__all__ = [
    "Automorphism",
    "PermutationSet",
    "InsufficientClassesError",
    "block_profile",
    "bit_level_transposition",
    "make_automorphism",
    "identity_automorphism",
    "sample_blta",
    "apply_perm",
    "apply_inv_perm",
    "is_automorphism",
    "select_permutations",
    "perms_to_dict",
    "perms_from_dict",
]


class InsufficientClassesError(RuntimeError):
    """Fewer SC-inequivalent automorphisms were found than requested."""


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank of a binary matrix over GF(2)."""
    rows = [int.from_bytes(np.packbits(r, bitorder="little").tobytes(), "little")
            for r in np.asarray(matrix, dtype=np.uint8) & 1]
    rank = 0
    for c in range(matrix.shape[1]):
        bit = 1 << c
        pivot = next((k for k in range(rank, len(rows)) if rows[k] & bit), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for k in range(len(rows)):
            if k != rank and rows[k] & bit:
                rows[k] ^= rows[rank]
        rank += 1
    return rank


def bit_level_transposition(k: int, m: int, n: int) -> np.ndarray:
    """Index permutation that exchanges bit-levels ``k`` and ``m``."""
    idx = np.arange(1 << n, dtype=np.int64)
    bk = (idx >> k) & 1
    bm = (idx >> m) & 1
    return idx ^ ((bk ^ bm) << k) ^ ((bk ^ bm) << m)


def block_profile(code: PolarCode) -> tuple[int, ...]:
    """Coarsest block sizes (LSB level first) of the code's BLTA group.

    Adjacent bit-levels merge into one block iff transposing them maps the
    information set onto itself; merging repeats until a fixpoint.
    """
    n = code.n
    info = set(int(i) for i in code.info_set)
    merged = [False] * (n - 1)
    changed = True
    while changed:
        changed = False
        for k in range(n - 1):
            if merged[k]:
                continue
            perm = bit_level_transposition(k, k + 1, n)
            if all(int(perm[i]) in info for i in info):
                merged[k] = True
                changed = True
    sizes = []
    run = 1
    for k in range(n - 1):
        if merged[k]:
            run += 1
        else:
            sizes.append(run)
            run = 1
    sizes.append(run)
    return tuple(sizes)


@dataclass(frozen=True)
class Automorphism:
    """Affine bit-index transform z' = A z + b with materialized permutation tables.

    ``perm[i]`` is the image of index ``i``; ``inv_perm`` is its inverse.
    """

    matrix: np.ndarray  # (n, n) over GF(2), invertible
    offset: np.ndarray  # (n,)
    perm: np.ndarray    # (N,)
    inv_perm: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.perm, np.arange(self.perm.size)))

    def to_dict(self) -> dict:
        return {"A": self.matrix.tolist(), "b": self.offset.tolist()}


def make_automorphism(matrix, offset) -> Automorphism:
    """Materialize permutation tables for z' = A z + b; A must be invertible."""
    A = (np.asarray(matrix, dtype=np.uint8) & 1).copy()
    b = (np.asarray(offset, dtype=np.uint8) & 1).copy()
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError("matrix must be n x n and offset length n")
    if gf2_rank(A) != n:
        raise ValueError("matrix is singular over GF(2)")
    size = 1 << n
    z = ((np.arange(size)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.uint8)
    zp = (z @ A.T + b) & 1
    perm = (zp.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64)))
    inv = np.empty_like(perm)
    inv[perm] = np.arange(size, dtype=np.int64)
    for arr in (A, b, perm, inv):
        arr.setflags(write=False)
    return Automorphism(matrix=A, offset=b, perm=perm, inv_perm=inv)


def identity_automorphism(n: int) -> Automorphism:
    return make_automorphism(np.eye(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))


def sample_blta(profile, rng) -> Automorphism:
    """Sample uniformly from the BLTA group for ``profile`` (LSB block first).

    Allowed entries of A (on or below the block diagonal) are filled i.i.d.
    uniform and the draw is rejected until A is invertible over GF(2); the
    acceptance rate exceeds 0.28 for every profile.  b is uniform.
    """
    profile = tuple(int(s) for s in profile)
    if any(s < 1 for s in profile):
        raise ValueError("block sizes must be positive")
    n = sum(profile)
    block = np.repeat(np.arange(len(profile)), profile)
    allowed = block[:, None] >= block[None, :]
    while True:
        A = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        A[~allowed] = 0
        if gf2_rank(A) == n:
            break
    b = rng.integers(0, 2, size=n, dtype=np.uint8)
    return make_automorphism(A, b)


def apply_perm(autom: Automorphism, v: np.ndarray) -> np.ndarray:
    """Scatter along the last axis: out[perm[i]] = v[i]."""
    v = np.asarray(v)
    if v.shape[-1] != autom.perm.size:
        raise ValueError(f"vector length {v.shape[-1]} != N={autom.perm.size}")
    return v[..., autom.inv_perm]


def apply_inv_perm(autom: Automorphism, v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`apply_perm`: out[i] = v[perm[i]]."""
    v = np.asarray(v)
    if v.shape[-1] != autom.perm.size:
        raise ValueError(f"vector length {v.shape[-1]} != N={autom.perm.size}")
    return v[..., autom.perm]


def is_automorphism(perm, code: PolarCode) -> bool:
    """True iff scattering codeword positions through ``perm`` preserves the code.

    Each information row of G_N is permuted and tested for membership via the
    self-inverse transform.
    """
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (code.N,) or not np.array_equal(np.sort(perm), np.arange(code.N)):
        raise ValueError("not a valid permutation table")
    rows = np.zeros((code.K, code.N), dtype=np.uint8)
    rows[np.arange(code.K), code.info_set] = 1
    gen = polar_transform(rows)
    permuted = np.empty_like(gen)
    permuted[:, perm] = gen
    return not polar_transform(permuted)[:, code.frozen_mask].any()


@dataclass(frozen=True)
class PermutationSet:
    """Ordered automorphisms seeding an ensemble; index 0 is the identity."""

    perms: tuple[Automorphism, ...]

    def __post_init__(self):
        if not self.perms:
            raise ValueError("permutation set must not be empty")
        if not self.perms[0].is_identity():
            raise ValueError("perms[0] must be the identity automorphism")
        tables = [a.perm.tobytes() for a in self.perms]
        if len(set(tables)) != len(tables):
            raise ValueError("permutation tables must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.perms)

    def __iter__(self):
        return iter(self.perms)

    def __getitem__(self, i) -> Automorphism:
        return self.perms[i]

    def perm_matrix(self) -> np.ndarray:
        return np.stack([a.perm for a in self.perms])

    def inv_perm_matrix(self) -> np.ndarray:
        return np.stack([a.inv_perm for a in self.perms])


def perms_to_dict(pset: PermutationSet) -> dict:
    return {"perms": [a.to_dict() for a in pset]}


def perms_from_dict(d: dict) -> PermutationSet:
    """Rebuild a permutation set; tables are rematerialized and revalidated."""
    return PermutationSet(tuple(make_automorphism(p["A"], p["b"]) for p in d["perms"]))


def _sc_signature(code: PolarCode, autom: Automorphism, probe_llrs: np.ndarray) -> bytes:
    """Digest of SC decoding results on permuted probes, un-permuted for comparison."""
    from .decode import ListEngine, DecoderConfig

    engine = ListEngine(code, DecoderConfig(list_size=1))
    res = engine.decode_batch(apply_perm(autom, probe_llrs))
    return apply_inv_perm(autom, res.x_hat).tobytes()


def select_permutations(
    code: PolarCode,
    L: int,
    rng,
    distinct_classes: bool = True,
    probes: int = 32,
    probe_ebn0_db: float = 3.0,
    max_draws: int | None = None,
) -> PermutationSet:
    """Pick the identity plus L-1 BLTA automorphisms from distinct SC classes.

    Class separation is empirical: two automorphisms are considered equivalent
    when SC decoding of their permuted inputs agrees, after un-permutation, on
    every probe noise vector.  With ``distinct_classes=False`` only distinct
    permutation tables are required.
    """
    from .channel import ChannelParams, modulate, add_noise, llr
    from .code import encode

    if L < 1:
        raise ValueError("L must be >= 1")
    profile = block_profile(code)
    chosen = [identity_automorphism(code.n)]
    if L == 1:
        return PermutationSet(tuple(chosen))

    params = ChannelParams(ebn0_db=probe_ebn0_db, code_rate=code.K / code.N)
    u = np.zeros((probes, code.N), dtype=np.uint8)
    u[:, code.info_set] = rng.integers(0, 2, size=(probes, code.K), dtype=np.uint8)
    probe_llrs = llr(add_noise(modulate(encode(code, u)), params, rng), params)

    seen_tables = {chosen[0].perm.tobytes()}
    seen_sigs = {_sc_signature(code, chosen[0], probe_llrs)} if distinct_classes else set()
    cap = max_draws if max_draws is not None else 512 + 256 * L
    draws = 0
    while len(chosen) < L and draws < cap:
        cand = sample_blta(profile, rng)
        draws += 1
        key = cand.perm.tobytes()
        if key in seen_tables:
            continue
        if distinct_classes:
            sig = _sc_signature(code, cand, probe_llrs)
            if sig in seen_sigs:
                continue
            seen_sigs.add(sig)
        seen_tables.add(key)
        chosen.append(cand)
    if len(chosen) < L:
        raise InsufficientClassesError(
            f"found only {len(chosen)} of {L} requested automorphism classes "
            f"after {draws} draws; the code may not support this ensemble size "
            "(retry with distinct_classes=False)"
        )
    return PermutationSet(tuple(chosen))

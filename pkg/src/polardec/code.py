"""Decreasing polar codes: partial order, construction, GF(2) encoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolarCode",
    "partial_order_leq",
    "build_code",
    "encode",
    "is_codeword",
    "polar_transform",
    "code_to_dict",
    "code_from_dict",
]


def partial_order_leq(i: int, j: int, n: int) -> bool:
    """True iff index ``i`` precedes ``j`` in the decreasing-monomial partial order.

    ``i <= j`` holds iff the 1-bits of ``i`` admit an order-preserving
    injection into the 1-bits of ``j`` that never maps a bit to a lower
    position.  Bit 0 is the least significant bit.  The greedy check pairs
    the k-th highest 1-bit of ``i`` with the k-th highest 1-bit of ``j``.
    """
    size = 1 << n
    if not (0 <= i < size) or not (0 <= j < size):
        raise ValueError(f"indices must lie in [0, {size}), got i={i}, j={j}")
    ones_i = [p for p in range(n - 1, -1, -1) if (i >> p) & 1]
    ones_j = [p for p in range(n - 1, -1, -1) if (j >> p) & 1]
    if len(ones_i) > len(ones_j):
        return False
    return all(pj >= pi for pi, pj in zip(ones_i, ones_j))


@dataclass(frozen=True)
class PolarCode:
    """A decreasing polar code, fully determined by its minimal information set.

    Immutable after construction and safe to share across workers.
    ``frozen_mask[i]`` is True when leaf ``i`` carries a frozen bit.
    """

    n: int
    N: int
    K: int
    info_set: np.ndarray
    frozen_set: np.ndarray
    min_info_set: tuple[int, ...]
    frozen_mask: np.ndarray

    @property
    def rate(self) -> float:
        return self.K / self.N

    def __repr__(self) -> str:
        return f"PolarCode(N={self.N}, K={self.K}, min_info_set={list(self.min_info_set)})"


def build_code(n: int, min_info_set) -> PolarCode:
    """Construct the code whose information set is the upward closure of the generators.

    Redundant generators (those dominated by another generator) are absorbed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    size = 1 << n
    gens = sorted({int(g) for g in min_info_set})
    for g in gens:
        if not 0 <= g < size:
            raise ValueError(f"generator {g} out of range for n={n}")
    info = [j for j in range(size) if any(partial_order_leq(g, j, n) for g in gens)]
    info_arr = np.asarray(info, dtype=np.int64)
    frozen_mask = np.ones(size, dtype=bool)
    frozen_mask[info_arr] = False
    frozen_arr = np.flatnonzero(frozen_mask).astype(np.int64)
    minimal = tuple(
        g for g in gens
        if not any(h != g and partial_order_leq(h, g, n) for h in gens)
    )
    for arr in (info_arr, frozen_arr, frozen_mask):
        arr.setflags(write=False)
    return PolarCode(
        n=n,
        N=size,
        K=len(info),
        info_set=info_arr,
        frozen_set=frozen_arr,
        min_info_set=minimal,
        frozen_mask=frozen_mask,
    )


def polar_transform(x: np.ndarray) -> np.ndarray:
    """Multiply by G_N = G_2^(tensor n) over GF(2) along the last axis.

    The transform is its own inverse.  Accepts any leading batch shape.
    """
    out = np.array(x, dtype=np.uint8, copy=True)
    size = out.shape[-1]
    if size == 0 or size & (size - 1):
        raise ValueError(f"length must be a power of two, got {size}")
    h = 1
    while h < size:
        v = out.reshape(out.shape[:-1] + (size // (2 * h), 2, h))
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return out


def encode(code: PolarCode, u) -> np.ndarray:
    """Encode an input vector: x = u G_N, computed via the O(N log N) butterfly.

    ``u`` must hold 0 at every frozen position; anything else is a caller bug.
    """
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != code.N:
        raise ValueError(f"input length {u.shape[-1]} != N={code.N}")
    if np.any(u[..., code.frozen_mask]):
        raise ValueError("nonzero bit at a frozen position")
    return polar_transform(u)


def is_codeword(code: PolarCode, x) -> bool:
    """True iff the inverse transform of ``x`` is zero on every frozen position."""
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (code.N,):
        raise ValueError(f"expected a vector of length {code.N}, got shape {x.shape}")
    return not polar_transform(x)[code.frozen_mask].any()


def code_to_dict(code: PolarCode) -> dict:
    """JSON-ready description; ``info_set`` is informational only."""
    return {
        "n": code.n,
        "min_info_set": [int(g) for g in code.min_info_set],
        "info_set": [int(i) for i in code.info_set],
    }


def code_from_dict(d: dict) -> PolarCode:
    """Rebuild a code from its JSON description (``info_set`` is ignored)."""
    return build_code(int(d["n"]), d["min_info_set"])

"""Batch-agnostic slot operations on tensor proxies.

A rank-m proxy is an array whose trailing m axes are tensor slots; any leading
axes are batch axes and broadcast against the batch axes of the operators.
Slots are 1-based, axes are addressed from the right.
"""
from __future__ import annotations

import numpy as np


def slot_axis(rank: int, slot: int) -> int:
    return slot - 1 - rank


def _pad(a: np.ndarray, lead: int, k: int) -> np.ndarray:
    """Insert k singleton axes before the last `lead` axes of a."""
    shape = a.shape[: a.ndim - lead] + (1,) * k + a.shape[a.ndim - lead:]
    return a.reshape(shape)


def apply(M: np.ndarray, T: np.ndarray, rank: int, slot: int) -> np.ndarray:
    """[M ·_slot T]^{..i..} = M^i_k T^{..k..} for M of shape (..., a, b)."""
    ax = slot_axis(rank, slot)
    Tm = np.moveaxis(T, ax, -1)[..., None]
    out = (_pad(M, 2, rank - 1) @ Tm)[..., 0]
    return np.moveaxis(out, -1, ax)


def take(T: np.ndarray, rank: int, slot: int, index: int) -> np.ndarray:
    return np.take(T, index, axis=slot_axis(rank, slot))


def contract(w: np.ndarray, T: np.ndarray, rank: int, slot: int) -> np.ndarray:
    """Σ_k w_k T^{..k..}; drops the slot."""
    ax = slot_axis(rank, slot)
    return (np.moveaxis(T, ax, -1) * _pad(w, 1, rank - 1)).sum(-1)


def insert(w: np.ndarray, T: np.ndarray, rank_out: int, slot: int) -> np.ndarray:
    """Outer product placing w's index at `slot` of a rank_out result."""
    out = T[..., None] * _pad(w, 1, rank_out - 1)
    return np.moveaxis(out, -1, slot_axis(rank_out, slot))


def scale(s, T: np.ndarray, rank: int) -> np.ndarray:
    s = np.asarray(s)
    return s.reshape(s.shape + (1,) * rank) * T


def transpose_mixed(M: np.ndarray, g: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """Metric transpose of a mixed tensor: (Mᵀ)^i_k = g^{ij} M^l_j g_lk."""
    return g_inv @ np.swapaxes(M, -1, -2) @ g

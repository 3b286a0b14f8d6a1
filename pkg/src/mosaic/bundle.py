"""Spacetime n-tensors in chart coordinates and in bundle form.

Coordinate proxies R^{I₁…Iₙ} use the index order I ∈ (t, 1, 2) ↦ (0, 1, 2).
The bundle form keeps one tangential (n−α)-tensor r_σ per shuffle σ: the
transversal slots σ(1..α) are tested against ζτ_I and the instantaneous slots
are projected with P^S.  Since ζτ_I = (1, 0, 0) in chart coordinates, this
reduces to

    transversal slot:    take the t-component,
    instantaneous slot:  R^i + v^i R^t,

and the inverse places τ = [1, −v] on the transversal slots.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

import numpy as np

from . import _slots
from .errors import EventMismatch, RankCap, RankMismatch
from .shuffles import MAX_RANK, Shuffle, all_shuffles


def _as_shuffle(key, n: int) -> Shuffle:
    if isinstance(key, Shuffle):
        return key
    if isinstance(key, str):
        return Shuffle.parse(key) if key.startswith("(") else Shuffle.from_word(key)
    raise TypeError(f"cannot index a rep with {key!r}")


class SpacetimeTensorRep:
    """Bundle form of a rank-n spacetime tensor: σ ↦ r_σ over all 2ⁿ shuffles."""

    __slots__ = ("n", "blocks")

    def __init__(self, n: int, blocks: Mapping[Shuffle, np.ndarray]):
        if n > MAX_RANK:
            raise RankCap(f"rank {n} exceeds the cap {MAX_RANK}")
        order = all_shuffles(n)
        if set(blocks) != set(order):
            raise ValueError("a rep needs exactly one block per shuffle")
        self.n = n
        self.blocks = {s: np.asarray(blocks[s], dtype=float) for s in order}
        for s, b in self.blocks.items():
            m = n - s.alpha
            if b.ndim < m or b.shape[b.ndim - m:] != (2,) * m:
                raise ValueError(f"block {s} has shape {b.shape}, expected trailing {(2,) * m}")

    @classmethod
    def zeros(cls, n: int, batch: tuple = ()) -> "SpacetimeTensorRep":
        return cls(n, {s: np.zeros(tuple(batch) + (2,) * (n - s.alpha)) for s in all_shuffles(n)})

    @classmethod
    def instantaneous(cls, q: np.ndarray, n: int) -> "SpacetimeTensorRep":
        """Rep supported on the purely instantaneous block 𝒮ⁿ."""
        q = np.asarray(q, dtype=float)
        batch = q.shape[: q.ndim - n]
        rep = cls.zeros(n, batch)
        rep.blocks[all_shuffles(n)[0]] = q.copy()
        return rep

    def __getitem__(self, key) -> np.ndarray:
        return self.blocks[_as_shuffle(key, self.n)]

    def __iter__(self) -> Iterator[tuple[Shuffle, np.ndarray]]:
        return iter(self.blocks.items())

    @property
    def batch_shape(self) -> tuple:
        s = all_shuffles(self.n)[-1]
        return self.blocks[s].shape

    def _binary(self, other, op) -> "SpacetimeTensorRep":
        if not isinstance(other, SpacetimeTensorRep):
            return NotImplemented
        if other.n != self.n:
            raise RankMismatch(f"ranks differ: {self.n} vs {other.n}")
        return SpacetimeTensorRep(self.n, {s: op(b, other.blocks[s]) for s, b in self.blocks.items()})

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return SpacetimeTensorRep(self.n, {s: -b for s, b in self.blocks.items()})

    def scaled(self, c) -> "SpacetimeTensorRep":
        """Multiply by a scalar field c (shape = batch shape) or a number."""
        return SpacetimeTensorRep(
            self.n, {s: _slots.scale(c, b, self.n - s.alpha) for s, b in self.blocks.items()}
        )

    def __mul__(self, c):
        return self.scaled(c)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(b), initial=0.0)) for b in self.blocks.values())

    def flat(self) -> np.ndarray:
        """All 3ⁿ scalars per batch point, blocks concatenated in canonical order."""
        parts = []
        for s, b in self.blocks.items():
            m = self.n - s.alpha
            parts.append(b.reshape(b.shape[: b.ndim - m] + (-1,)))
        return np.concatenate(parts, axis=-1)

    def __repr__(self) -> str:
        inner = ", ".join(f"{s.word() or '∅'}: {b.tolist()}" for s, b in self.blocks.items())
        return f"SpacetimeTensorRep(n={self.n}, {inner})"


@dataclass(frozen=True)
class SpacetimeCoordTensor:
    """Chart proxies R^{I₁…Iₙ}; trailing n axes have length 3."""

    n: int
    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim < self.n or d.shape[d.ndim - self.n:] != (3,) * self.n:
            raise ValueError(f"proxy array of shape {d.shape} is not rank {self.n}")
        object.__setattr__(self, "data", d)


@dataclass(frozen=True)
class TangentialJet:
    """Tangential tensor proxy with its time and spatial partial derivatives."""

    value: np.ndarray
    dt: np.ndarray
    dy: tuple

    @classmethod
    def frozen(cls, value) -> "TangentialJet":
        """Jet with vanishing partials."""
        value = np.asarray(value, dtype=float)
        z = np.zeros_like(value)
        return cls(value, z, (z, z))


@dataclass(frozen=True)
class TensorFieldJet:
    """Rep of a spacetime tensor field together with ∂_t and ∂_k of every block."""

    value: SpacetimeTensorRep
    dt: SpacetimeTensorRep
    dy: tuple

    @property
    def n(self) -> int:
        return self.value.n

    def block(self, sigma: Shuffle) -> TangentialJet:
        return TangentialJet(self.value.blocks[sigma], self.dt.blocks[sigma],
                             (self.dy[0].blocks[sigma], self.dy[1].blocks[sigma]))

    @classmethod
    def instantaneous(cls, q: TangentialJet, n: int) -> "TensorFieldJet":
        inst = SpacetimeTensorRep.instantaneous
        return cls(inst(q.value, n), inst(q.dt, n), (inst(q.dy[0], n), inst(q.dy[1], n)))


def _tau_vector(v: np.ndarray) -> np.ndarray:
    return np.concatenate([np.ones(v.shape[:-1] + (1,)), -v], axis=-1)


def transversal_instantaneous_projectors(frame, kin) -> tuple[np.ndarray, np.ndarray]:
    """(P^τ, P^S) as mixed 3×3 tensors, row index up, column index down."""
    v = kin.v
    batch = v.shape[:-1]
    Pt = np.zeros(batch + (3, 3))
    Pt[..., :, 0] = _tau_vector(v)
    Ps = np.zeros(batch + (3, 3))
    Ps[..., 1:, 0] = v
    Ps[..., 1, 1] = Ps[..., 2, 2] = 1.0
    return Pt, Ps


def _inst_map(v: np.ndarray) -> np.ndarray:
    """2×3 matrix R ↦ (R^i + v^i R^t)."""
    M = np.zeros(v.shape[:-1] + (2, 3))
    M[..., :, 0] = v
    M[..., 0, 1] = M[..., 1, 2] = 1.0
    return M


_EMBED = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def decompose(R, frame, kin) -> SpacetimeTensorRep:
    """⟦R⟧ for coordinate proxies R."""
    if not isinstance(R, SpacetimeCoordTensor):
        raise TypeError("decompose expects a SpacetimeCoordTensor")
    n = R.n
    if n > MAX_RANK:
        raise RankCap(f"rank {n} exceeds the cap {MAX_RANK}")
    M = _inst_map(kin.v)
    blocks = {}
    for s in all_shuffles(n):
        T = R.data
        rank = n
        # right to left so that axes of unprocessed slots stay put
        for p in range(n, 0, -1):
            ax = (p - 1) - rank
            if s.is_transversal(p):
                T = np.take(T, 0, axis=ax)
                rank -= 1
            else:
                Tm = np.moveaxis(T, ax, -1)[..., None]
                out = (_slots._pad(M, 2, rank - 1) @ Tm)[..., 0]
                T = np.moveaxis(out, -1, ax)
        blocks[s] = T
    return SpacetimeTensorRep(n, blocks)


def reconstruct(rep: SpacetimeTensorRep, frame, kin) -> SpacetimeCoordTensor:
    """⟦·⟧⁻¹: coordinate proxies from the bundle form."""
    n = rep.n
    tau = _tau_vector(kin.v)
    total = None
    for s, r in rep:
        m = n - s.alpha
        T = r
        for slot in range(1, m + 1):
            T = _slots.apply(_EMBED, T, m, slot)
        rank = m
        for p in s.transversal:
            rank += 1
            T = _slots.insert(tau, T, rank, p)
        total = T if total is None else total + T
    return SpacetimeCoordTensor(n, total)


def _transition_jacobian(transition: Callable, t, y: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """∂y_B/∂y_A by 4th-order central differences; shape (..., 2, 2) as J[b, a]."""
    y = np.asarray(y, dtype=float)
    cols = []
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        d = (-transition(t, y + 2 * e) + 8 * transition(t, y + e)
             - 8 * transition(t, y - e) + transition(t, y - 2 * e)) / (12 * h)
        cols.append(d)
    return np.stack(cols, axis=-1)


def change_observer(rep: SpacetimeTensorRep, chart_a, chart_b, t: float, y_a, transition: Callable,
                    jacobian: Callable | None = None, tol: float = 1e-9):
    """Re-express a rep given in chart A at (t, y_A) in chart B.

    `transition(t, y_A)` returns y_B at the same event.  Blocks are tangential
    tensors, so every slot transforms with J = ∂y_B/∂y_A.  Returns (rep_B, y_B).
    """
    y_a = np.asarray(y_a, dtype=float)
    y_b = np.asarray(transition(t, y_a), dtype=float)
    gap = np.max(np.abs(chart_a.eval(t, y_a) - chart_b.eval(t, y_b)), initial=0.0)
    if gap > tol:
        raise EventMismatch(f"charts disagree by {gap:.3e} at mapped points")
    J = jacobian(t, y_a) if jacobian is not None else _transition_jacobian(transition, t, y_a)
    blocks = {}
    for s, r in rep:
        m = rep.n - s.alpha
        T = r
        for slot in range(1, m + 1):
            T = _slots.apply(J, T, m, slot)
        blocks[s] = T
    return SpacetimeTensorRep(rep.n, blocks), y_b

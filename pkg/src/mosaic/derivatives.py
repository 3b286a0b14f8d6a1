"""Observer-invariant time derivatives of spacetime tensor fields in bundle form.

Two families of code paths ship side by side:

* general rank, block by block over shuffles (material_derivative,
  convected_derivative, jaumann_derivative);
* instantaneous fast paths for vectors and 2-tensors written as matrix
  products of ṙ with B_m and B_mᵀ.

They are independent formula routes for the same quantities and the test suite
checks them against each other and against the coordinate-level oracle.

All tangential proxies are contravariant.  A rank-m proxy has m trailing axes
of length 2; leading axes are batch axes shared with the frame arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _slots
from .bundle import SpacetimeTensorRep, TangentialJet, TensorFieldJet
from .errors import MissingJet, RankMismatch, SlotOutOfRange, UnknownKind
from .shuffles import (Shuffle, all_shuffles, flat_word, lower_shuffle, raise_shuffle,
                       sharp_instantaneous_slots, sharp_word)


# ---------------------------------------------------------------- kinds

_NAMED_WORDS = {
    "upper-convected": "♯",
    "lower-convected": "♭",
    "upper-lower-convected": "♯♭",
    "lower-upper-convected": "♭♯",
}


@dataclass(frozen=True)
class DerivativeKind:
    """material | convected (with a flat word) | jaumann | truesdell.

    For 'convected', `word` is either a Shuffle (fixed rank) or a one-letter
    pattern '♯'/'♭' that repeats to any rank.
    """

    family: str
    word: object = None

    def __post_init__(self):
        if self.family not in ("material", "convected", "jaumann", "truesdell"):
            raise UnknownKind(f"unknown derivative family {self.family!r}")
        if self.family == "convected" and self.word is None:
            raise UnknownKind("convected kind needs a flat word")

    @classmethod
    def parse(cls, text: str) -> "DerivativeKind":
        key = text.strip().lower()
        if key in ("material", "jaumann", "truesdell"):
            return cls(key)
        if key in _NAMED_WORDS:
            w = _NAMED_WORDS[key]
            return cls("convected", w if len(w) == 1 else Shuffle.from_word(w))
        if key.startswith("convected:"):
            try:
                return cls("convected", Shuffle.from_word(text.strip()[len("convected:"):]))
            except ValueError as exc:
                raise UnknownKind(str(exc)) from None
        raise UnknownKind(f"unknown derivative kind {text!r}")

    def word_for(self, n: int) -> Shuffle:
        if self.family != "convected":
            raise UnknownKind(f"{self.family} has no flat word")
        if isinstance(self.word, Shuffle):
            if self.word.n != n:
                raise RankMismatch(f"flat word {self.word.flat_word()} has rank {self.word.n}, field has {n}")
            return self.word
        return sharp_word(n) if self.word == "♯" else flat_word(n)

    @property
    def label(self) -> str:
        if self.family != "convected":
            return self.family
        w = self.word.flat_word() if isinstance(self.word, Shuffle) else self.word
        return f"convected[{w}]"


@dataclass(frozen=True)
class RateResult:
    value: object          # SpacetimeTensorRep or ndarray
    path: str              # which formula route produced the value


# ---------------------------------------------------------------- helpers

def _rank(frame, arr: np.ndarray, rank: int | None) -> int:
    if rank is not None:
        return rank
    return arr.ndim - (frame.g.ndim - 2)


def _gamma_u(frame, u: np.ndarray) -> np.ndarray:
    """[Γ(u)]^i_j = Γ^i_kj u^k."""
    return (np.swapaxes(frame.christoffel, -1, -2) @ u[..., None, :, None])[..., 0]


def _check_jet(jet) -> None:
    if jet.dt is None or jet.dy is None or len(jet.dy) != 2:
        raise MissingJet("field jet lacks time or spatial partials")


def covariant_along(frame, r: TangentialJet, w: np.ndarray, m: int) -> np.ndarray:
    """∇_w r = w^k ∂_k r + Σ_slots (Γ^i_kj w^k) ·_slot r."""
    out = _slots.scale(w[..., 0], r.dy[0], m) + _slots.scale(w[..., 1], r.dy[1], m)
    if m:
        Gw = np.einsum("...ikj,...k->...ij", frame.christoffel, w)
        for slot in range(1, m + 1):
            out = out + _slots.apply(Gw, r.value, m, slot)
    return out


def _total(r: TangentialJet, m: int, frame, kin, mat) -> np.ndarray:
    out = r.dt + covariant_along(frame, r, mat.u, m)
    for slot in range(1, m + 1):
        out = out + _slots.apply(kin.B, r.value, m, slot)
    return out


# ---------------------------------------------------------------- scalar / tangential

def scalar_rate(f_jet: TangentialJet, mat) -> np.ndarray:
    """ḟ = ∂_t f + ∇_u f, common to every derivative kind."""
    _check_jet(f_jet)
    return f_jet.dt + (mat.u[..., 0] * f_jet.dy[0] + mat.u[..., 1] * f_jet.dy[1])


def tangential_total_derivative(q_jet: TangentialJet, frame, kin, mat, rank: int | None = None) -> np.ndarray:
    """q̇ = ∂_t q + ∇_u q + Σ_β B ·_β q."""
    _check_jet(q_jet)
    m = _rank(frame, np.asarray(q_jet.value), rank)
    if m == 0:
        return scalar_rate(q_jet, mat)
    return _total(q_jet, m, frame, kin, mat)


# ---------------------------------------------------------------- Hodge / curl

def hodge(frame, T: np.ndarray, slot: int = 1, rank: int | None = None) -> np.ndarray:
    """*_β T = −ε ·_β T."""
    m = _rank(frame, T, rank)
    if not 1 <= slot <= m:
        raise SlotOutOfRange(f"slot {slot} not in 1..{m}")
    return -_slots.apply(frame.eps_mixed, T, m, slot)


def rot(frame, grad_w: np.ndarray) -> np.ndarray:
    """rot w = −⟨∇w, ε⟩ for a mixed gradient [∇w]^i_k."""
    contra = grad_w @ frame.g_inv
    return -np.einsum("...ij,...ij->...", contra, frame.eps)


def pair_eps(frame, q: np.ndarray) -> np.ndarray:
    """⟨q, ε⟩ for a contravariant 2-tensor."""
    return np.einsum("...ij,...ij->...", q, frame.eps)


def trace2(frame, q: np.ndarray) -> np.ndarray:
    """g_ij q^ij."""
    return np.einsum("...ij,...ij->...", q, frame.g)


# ---------------------------------------------------------------- general rank

def material_derivative(jet: TensorFieldJet, frame, kin, mat) -> SpacetimeTensorRep:
    """Block-wise material derivative 𝔡⟦R⟧."""
    _check_jet(jet)
    n = jet.n
    zn = kin.zeta * kin.nu
    b_up = frame.raise_(mat.b_m)
    out = {}
    for s in all_shuffles(n):
        a, m = s.alpha, n - s.alpha
        r = jet.block(s)
        val = _total(r, m, frame, kin, mat)
        if a:
            val = val + _slots.scale(a * zn * mat.nu_dot, r.value, m)
        for beta in range(1, a + 1):
            s_up, p = raise_shuffle(s, beta)
            val = val + _slots.scale(zn, _slots.contract(mat.b_m, jet.value.blocks[s_up], m + 1, p), m)
        for beta in range(1, m + 1):
            s_dn, _ = lower_shuffle(s, beta)
            val = val - _slots.scale(kin.nu, _slots.insert(b_up, jet.value.blocks[s_dn], m, beta), m)
        out[s] = val
    return SpacetimeTensorRep(n, out)


def convected_derivative(jet: TensorFieldJet, word: Shuffle, frame, kin, mat) -> SpacetimeTensorRep:
    """Block-wise shuffled convected derivative Ľ^{♭σ̃}⟦R⟧ for the flat word σ̃."""
    _check_jet(jet)
    n = jet.n
    if word.n != n:
        raise RankMismatch(f"flat word rank {word.n} differs from field rank {n}")
    BBt = kin.B + frame.transpose(kin.B)
    gu = mat.grad_u
    guT = frame.transpose(gu)
    lie_low = frame.lower(mat.lie_vm)
    zeta, two_znn = kin.zeta, 2.0 * kin.zeta * kin.nu * mat.nu_dot
    out = {}
    for s in all_shuffles(n):
        a, m = s.alpha, n - s.alpha
        r = jet.block(s)
        sharp = sharp_instantaneous_slots(word, s)
        # ∂_t^{♭σ̌} r: lowered slots pick up ∂_t g = B + Bᵀ
        val = r.dt
        for beta in range(1, m + 1):
            if beta not in sharp:
                val = val + _slots.apply(BBt, r.value, m, beta)
        val = val + covariant_along(frame, r, mat.u, m)
        for beta in range(1, m + 1):
            if beta in sharp:
                val = val - _slots.apply(gu, r.value, m, beta)
            else:
                val = val + _slots.apply(guT, r.value, m, beta)
        for beta in range(1, a + 1):
            if not word.is_transversal(s(beta)):
                s_up, p = raise_shuffle(s, beta)
                val = val + _slots.scale(zeta, _slots.contract(lie_low, jet.value.blocks[s_up], m + 1, p), m)
                val = val + _slots.scale(two_znn, r.value, m)
        for beta in range(1, m + 1):
            if beta in sharp:
                s_dn, _ = lower_shuffle(s, beta)
                val = val - _slots.insert(mat.lie_vm, jet.value.blocks[s_dn], m, beta)
        out[s] = val
    return SpacetimeTensorRep(n, out)


def jaumann_derivative(jet: TensorFieldJet, frame, kin, mat, method: str = "average") -> SpacetimeTensorRep:
    """Jaumann derivative: ½(Ľ^{♯ⁿ} + Ľ^{♭ⁿ}) or the closed rot/Hodge form."""
    n = jet.n
    if method == "average":
        up = convected_derivative(jet, sharp_word(n), frame, kin, mat)
        down = convected_derivative(jet, flat_word(n), frame, kin, mat)
        return (up + down).scaled(0.5)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    _check_jet(jet)
    half_rot = 0.5 * rot(frame, mat.grad_vm)
    lie_low = frame.lower(mat.lie_vm)
    zn_nd = kin.zeta * kin.nu * mat.nu_dot
    out = {}
    for s in all_shuffles(n):
        a, m = s.alpha, n - s.alpha
        r = jet.block(s)
        val = _total(r, m, frame, kin, mat)
        if a:
            val = val + _slots.scale(a * zn_nd, r.value, m)
        for beta in range(1, m + 1):
            val = val - _slots.scale(half_rot, hodge(frame, r.value, beta, m), m)
        for beta in range(1, a + 1):
            s_up, p = raise_shuffle(s, beta)
            val = val + _slots.scale(0.5 * kin.zeta, _slots.contract(lie_low, jet.value.blocks[s_up], m + 1, p), m)
        for beta in range(1, m + 1):
            s_dn, _ = lower_shuffle(s, beta)
            val = val - 0.5 * _slots.insert(mat.lie_vm, jet.value.blocks[s_dn], m, beta)
        out[s] = val
    return SpacetimeTensorRep(n, out)


def bundle_rate(kind: DerivativeKind, jet: TensorFieldJet, frame, kin, mat) -> RateResult:
    """Dispatch a general-rank derivative by kind."""
    if kind.family == "material":
        return RateResult(material_derivative(jet, frame, kin, mat), "general/material")
    if kind.family == "convected":
        w = kind.word_for(jet.n)
        return RateResult(convected_derivative(jet, w, frame, kin, mat), f"general/convected[{w.flat_word()}]")
    if kind.family == "jaumann":
        return RateResult(jaumann_derivative(jet, frame, kin, mat), "general/jaumann-average")
    raise UnknownKind("the bundle-level Truesdell rate is only available through the oracle")


# ---------------------------------------------------------------- fast paths

def instantaneous_vector_rate(kind, r_jet: TangentialJet, frame, kin, mat) -> np.ndarray:
    """ṙ, 𝔍r = ṙ − (rot v_m/2) *r, Ľ̂♯r = ṙ − B_m r, Ľ̂♭r = ṙ + B_mᵀ r."""
    if isinstance(kind, str):
        kind = DerivativeKind.parse(kind)
    _check_jet(r_jet)
    Gu = _gamma_u(frame, mat.u)
    mv = lambda M, x: np.einsum("...ij,...j->...i", M, x)
    u = mat.u
    r = r_jet.value
    rdot = r_jet.dt + u[..., 0, None] * r_jet.dy[0] + u[..., 1, None] * r_jet.dy[1] + mv(Gu + kin.B, r)
    if kind.family == "material":
        return rdot
    if kind.family == "jaumann":
        W = 0.5 * (mat.B_m - frame.transpose(mat.B_m))
        return rdot - mv(W, r)
    if kind.family == "convected":
        w = kind.word_for(1)
        if w.alpha == 1:
            return rdot - mv(mat.B_m, r)
        return rdot + mv(frame.transpose(mat.B_m), r)
    raise UnknownKind(f"{kind.label} is not defined for vectors")


def instantaneous_two_tensor_rate(kind, q_jet: TangentialJet, frame, kin, mat) -> np.ndarray:
    """q̇ and the Jaumann, ♯♯, ♭♭, ♯♭, ♭♯ and Truesdell rates of a tangential 2-tensor."""
    if isinstance(kind, str):
        kind = DerivativeKind.parse(kind)
    _check_jet(q_jet)
    u = mat.u
    q = q_jet.value
    Gu = _gamma_u(frame, mat.u)
    L = Gu + kin.B
    T = lambda M: np.swapaxes(M, -1, -2)
    qdot = (q_jet.dt + u[..., 0, None, None] * q_jet.dy[0] + u[..., 1, None, None] * q_jet.dy[1]
            + L @ q + q @ T(L))
    Bm = mat.B_m
    BmT = frame.transpose(Bm)
    if kind.family == "material":
        return qdot
    if kind.family == "jaumann":
        W = 0.5 * (Bm - BmT)
        return qdot - W @ q - q @ T(W)
    if kind.family == "truesdell":
        factor = (np.trace(mat.grad_vm, axis1=-2, axis2=-1)
                  - kin.nu * np.trace(frame.II_mixed, axis1=-2, axis2=-1)
                  + kin.zeta * kin.nu * mat.nu_dot)
        return qdot - Bm @ q - q @ T(Bm) + factor[..., None, None] * q
    if kind.family == "convected":
        w = kind.word_for(2)
        first = -Bm if w.is_transversal(1) else BmT
        second = -Bm if w.is_transversal(2) else BmT
        return qdot + first @ q + q @ T(second)
    raise UnknownKind(f"unknown kind {kind}")


def truesdell_rate(q_jet: TangentialJet, frame, kin, mat) -> np.ndarray:
    """Ľ°q = Ľ̂^{♯♯}q + (div v_m − ν tr II + ζνν̇) q."""
    return instantaneous_two_tensor_rate(DerivativeKind("truesdell"), q_jet, frame, kin, mat)


def instantaneous_rate(kind, jet: TangentialJet, frame, kin, mat, rank: int) -> np.ndarray:
    if isinstance(kind, str):
        kind = DerivativeKind.parse(kind)
    if rank == 0:
        return scalar_rate(jet, mat)
    if rank == 1:
        return instantaneous_vector_rate(kind, jet, frame, kin, mat)
    if rank == 2:
        return instantaneous_two_tensor_rate(kind, jet, frame, kin, mat)
    if kind.family == "truesdell":
        raise UnknownKind("Truesdell rate is defined for 2-tensors only")
    res = bundle_rate(kind, TensorFieldJet.instantaneous(jet, rank), frame, kin, mat).value
    return res.blocks[all_shuffles(rank)[0]]


# ---------------------------------------------------------------- acceleration

def material_acceleration(frame, kin, mat) -> tuple[np.ndarray, np.ndarray]:
    """(a_m, λ_m): tangential and normal material acceleration."""
    mv = lambda M, x: np.einsum("...ij,...j->...i", M, x)
    grad_nu = frame.raise_(kin.dnu[..., 1:])
    a_m = (mat.dt_vm + mv(mat.grad_vm, mat.u) + mv(kin.grad_v, mat.v_m)
           - kin.nu[..., None] * (2.0 * mv(frame.II_mixed, mat.v_m) + grad_nu))
    lam_m = mat.nu_dot + np.einsum("...i,...i->...", mat.v_m, mat.b_m)
    return a_m, lam_m


def material_direction_rep(frame, kin, mat) -> TensorFieldJet:
    """⟦τ_m⟧ = (1, v_m) with its jets."""
    batch = kin.v.shape[:-1]
    s_S, s_t = all_shuffles(1)
    one, zero = np.ones(batch), np.zeros(batch)
    rep = lambda sc, vec: SpacetimeTensorRep(1, {s_S: vec, s_t: sc})
    dv = mat.dv_m
    return TensorFieldJet(rep(one, mat.v_m), rep(zero, dv[..., 0, :]),
                          (rep(zero, dv[..., 1, :]), rep(zero, dv[..., 2, :])))


def transversal_direction_rep(frame, kin) -> TensorFieldJet:
    """⟦τ⟧ = (1, 0); its blocks are constant in any chart."""
    batch = kin.v.shape[:-1]
    s_S, s_t = all_shuffles(1)
    rep = SpacetimeTensorRep(1, {s_S: np.zeros(batch + (2,)), s_t: np.ones(batch)})
    z = SpacetimeTensorRep.zeros(1, batch)
    return TensorFieldJet(rep, z, (z, z))


# ---------------------------------------------------------------- linear maps

def shuffled_linear_sum(Q: SpacetimeTensorRep, R: SpacetimeTensorRep, word: Shuffle, frame, kin) -> SpacetimeTensorRep:
    """⟦Σ_{l≤α̃} Q ·_{σ̃(l)} R − Σ_{l>α̃} Qᵀ ·_{σ̃(l)} R⟧ computed block-wise."""
    if Q.n != 2:
        raise RankMismatch("Q must be a rank-2 rep")
    if word.n != R.n:
        raise RankMismatch(f"flat word rank {word.n} differs from R rank {R.n}")
    n = R.n
    q_SS = Q.blocks[Shuffle(2, ())]
    q_tS = Q.blocks[Shuffle(2, (1,))]
    q_St = Q.blocks[Shuffle(2, (2,))]
    q_tt = Q.blocks[Shuffle(2, (1, 2))]
    qSS_mixed = q_SS @ frame.g
    qSS_mixed_T = np.swapaxes(q_SS, -1, -2) @ frame.g
    q_tS_low, q_St_low = frame.lower(q_tS), frame.lower(q_St)
    q_tt_z = q_tt / kin.zeta
    inv_z = 1.0 / kin.zeta
    out = {}
    for s in all_shuffles(n):
        a, m = s.alpha, n - s.alpha
        r = R.blocks[s]
        val = np.zeros_like(r)
        for beta in range(1, a + 1):
            s_up, p = raise_shuffle(s, beta)
            if word.is_transversal(s(beta)):
                val = val + _slots.contract(q_tS_low, R.blocks[s_up], m + 1, p) + _slots.scale(q_tt_z, r, m)
            else:
                val = val - _slots.contract(q_St_low, R.blocks[s_up], m + 1, p) - _slots.scale(q_tt_z, r, m)
        for beta in range(1, m + 1):
            s_dn, _ = lower_shuffle(s, beta)
            if word.is_transversal(s(a + beta)):
                val = (val + _slots.apply(qSS_mixed, r, m, beta)
                       + _slots.scale(inv_z, _slots.insert(q_St, R.blocks[s_dn], m, beta), m))
            else:
                val = (val - _slots.apply(qSS_mixed_T, r, m, beta)
                       - _slots.scale(inv_z, _slots.insert(q_tS, R.blocks[s_dn], m, beta), m))
        out[s] = val
    return SpacetimeTensorRep(n, out)

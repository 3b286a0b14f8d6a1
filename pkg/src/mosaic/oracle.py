"""Brute-force spacetime-coordinate derivatives, used as ground truth.

Everything here works on the 3ⁿ chart proxies R^{I…} at a single point and
never touches the bundle formulas: the spacetime metric is the ℝ⁴ Gram matrix
of {∂_t X, ∂_1 X, ∂_2 X}, v is read off η through v_i = η_ti, Christoffel
symbols are ⟨∂_I∂_J X, ∂_K X⟩ raised by the inverse Gram matrix, and partial
derivatives of products are propagated by a small first-order jet type.
"""
from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from .bundle import SpacetimeCoordTensor, SpacetimeTensorRep, TangentialJet, TensorFieldJet, decompose
from .errors import MissingJet, RankMismatch
from .shuffles import Shuffle

_LETTERS = string.ascii_lowercase


@dataclass(frozen=True)
class Jet:
    """A value with its partials along (t, y¹, y²): grad[K, ...] = ∂_K val."""

    val: np.ndarray
    grad: np.ndarray

    @classmethod
    def const(cls, val) -> "Jet":
        val = np.asarray(val, dtype=float)
        return cls(val, np.zeros((3,) + val.shape))

    def __getitem__(self, idx) -> "Jet":
        idx = idx if isinstance(idx, tuple) else (idx,)
        return Jet(self.val[idx], self.grad[(slice(None),) + idx])

    def __add__(self, other: "Jet") -> "Jet":
        return Jet(self.val + other.val, self.grad + other.grad)

    def __sub__(self, other: "Jet") -> "Jet":
        return Jet(self.val - other.val, self.grad - other.grad)

    def __neg__(self) -> "Jet":
        return Jet(-self.val, -self.grad)

    def __mul__(self, c: float) -> "Jet":
        return Jet(c * self.val, c * self.grad)

    __rmul__ = __mul__


def _jet(x) -> Jet:
    return x if isinstance(x, Jet) else Jet.const(x)


def jeinsum(subscripts: str, *ops) -> Jet:
    """einsum with the product rule.  Subscripts must not use the letter 'Z'."""
    ops = [_jet(o) for o in ops]
    ins, out = subscripts.replace(" ", "").split("->")
    specs = ins.split(",")
    val = np.einsum(subscripts, *[o.val for o in ops])
    grad = np.zeros((3,) + val.shape)
    for i, o in enumerate(ops):
        if not np.any(o.grad):
            continue
        sp = list(specs)
        sp[i] = "Z" + sp[i]
        args = [o.grad if j == i else ops[j].val for j in range(len(ops))]
        grad = grad + np.einsum(",".join(sp) + "->Z" + out, *args)
    return Jet(val, grad)


def jinv(A: Jet) -> Jet:
    inv = np.linalg.inv(A.val)
    return Jet(inv, -np.einsum("ij,Kjk,kl->Kil", inv, A.grad, inv))


def jdet(A: Jet) -> Jet:
    d = np.linalg.det(A.val)
    inv = np.linalg.inv(A.val)
    return Jet(np.asarray(d), d * np.einsum("ij,Kji->K", inv, A.grad))


def jsqrt(s: Jet) -> Jet:
    r = np.sqrt(s.val)
    return Jet(r, s.grad / (2.0 * r))


def jconcat(parts) -> Jet:
    parts = [_jet(p) for p in parts]
    return Jet(np.concatenate([np.atleast_1d(p.val) for p in parts]),
               np.concatenate([p.grad.reshape(3, -1) for p in parts], axis=1))


@dataclass(frozen=True)
class EmbeddingSetup:
    """Spacetime geometry at one event, from the ℝ⁴ Gram construction."""

    eta: Jet                 # η_IJ
    eta_inv: np.ndarray
    christoffel: np.ndarray  # [L, I, J] = γ^L_IJ
    v: Jet                   # observer tangential velocity
    tau: Jet                 # τ = [1, −v]
    tau_m: Jet               # τ_m = [1, u]

    @property
    def kin_like(self):
        return SimpleNamespace(v=self.v.val)


def embedding_setup(chart, t: float, y, v_m_jet: TangentialJet) -> EmbeddingSetup:
    y = np.asarray(y, dtype=float)
    if y.shape != (2,):
        raise ValueError("the oracle works at a single point")
    jets = chart.jets(t, y)
    if jets.DD is None or not jets.has_tt:
        raise MissingJet("the oracle needs all second partials of the chart")
    D, DD = jets.D, jets.DD
    eta_val = D @ D.T
    eta_val[0, 0] += 1.0
    first = np.einsum("IJx,Kx->IJK", DD, D)             # ⟨∂_I∂_J X, ∂_K X⟩
    eta = Jet(eta_val, first + np.swapaxes(first, 1, 2))  # ∂_K η_IJ = γ_KIJ + γ_KJI
    eta_inv = np.linalg.inv(eta_val)
    gam = np.einsum("LK,IJK->LIJ", eta_inv, first)
    g = eta[1:, 1:]
    v_low = eta[0, 1:]
    v = jeinsum("ij,j->i", jinv(g), v_low)
    vm = Jet(np.asarray(v_m_jet.value, dtype=float),
             np.stack([v_m_jet.dt, v_m_jet.dy[0], v_m_jet.dy[1]]).astype(float))
    u = vm - v
    return EmbeddingSetup(eta, eta_inv, gam, v, jconcat([1.0, -v]), jconcat([1.0, u]))


_EMBED = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def coordinate_jet(jet: TensorFieldJet, setup: EmbeddingSetup) -> Jet:
    """R^{I…} with partials, from a pointwise bundle jet, by the product rule."""
    n = jet.n
    total = Jet.const(np.zeros((3,) * n))
    for s, r in jet.value:
        rj = Jet(r, np.stack([jet.dt.blocks[s], jet.dy[0].blocks[s], jet.dy[1].blocks[s]]))
        out_letters = _LETTERS[:n]
        inner = _LETTERS[n:2 * n]
        specs, ops, r_spec = [], [], ""
        for p in range(1, n + 1):
            o = out_letters[p - 1]
            if s.is_transversal(p):
                specs.append(o)
                ops.append(setup.tau)
            else:
                specs.append(o + inner[p - 1])
                ops.append(_EMBED)
                r_spec += inner[p - 1]
        specs.append(r_spec)
        ops.append(rj)
        total = total + jeinsum(",".join(specs) + "->" + out_letters, *ops)
    return total


def _slot_einsum(M: np.ndarray, T: np.ndarray, slot: int, rank: int, lead: str = "") -> np.ndarray:
    """Σ_J M[lead, I, J] T[..J..] with I placed at `slot` (1-based), lead axes first."""
    letters = _LETTERS[:rank]
    src = letters.replace(letters[slot - 1], "y")
    dst = letters
    return np.einsum(f"{lead}{letters[slot - 1]}y,{src}->{lead}{dst}", M, T)


def covariant_derivative(R: Jet, gamma: np.ndarray, lower: tuple = ()) -> np.ndarray:
    """∇_K R with one γ correction per slot; result [K, I…].  `lower` lists covariant slots."""
    n = R.val.ndim
    cov = R.grad.copy()
    for s in range(1, n + 1):
        if s in lower:
            # −γ^J_{K I_s} R_{..J..}
            G = np.transpose(gamma, (1, 2, 0))          # [K, I, J] = γ^J_KI
            cov = cov - _slot_einsum(G, R.val, s, n, lead="k").reshape(cov.shape)
        else:
            G = np.transpose(gamma, (1, 0, 2))          # [K, I, J] = γ^I_KJ
            cov = cov + _slot_einsum(G, R.val, s, n, lead="k").reshape(cov.shape)
    return cov


def oracle_material_derivative(R: Jet, gamma: np.ndarray, tau_m: np.ndarray, lower: tuple = ()) -> np.ndarray:
    """𝔇R = τ_m^K R_{;K}."""
    tau_m = tau_m.val if isinstance(tau_m, Jet) else np.asarray(tau_m)
    return np.tensordot(tau_m, covariant_derivative(R, gamma, lower), axes=(0, 0))


def _lower_slots(R: Jet, eta: Jet, slots) -> Jet:
    n = R.val.ndim
    out = R
    for s in slots:
        letters = _LETTERS[:n]
        src = letters.replace(letters[s - 1], "y")
        out = jeinsum(f"{letters[s - 1]}y,{src}->{letters}", eta, out)
    return out


def _raise_slots(T: np.ndarray, eta_inv: np.ndarray, slots) -> np.ndarray:
    n = T.ndim
    for s in slots:
        T = _slot_einsum(eta_inv, T, s, n)
    return T


def oracle_lie_derivative(R: Jet, word: Shuffle, setup: EmbeddingSetup, form: str = "partial") -> np.ndarray:
    """Ľ^{♭σ̃}R = ♯^{σ̃} ℒ_{τ_m} ♭^{σ̃} R at coordinate level.

    form='partial' uses raw partials of τ_m and of ♭R; form='covariant'
    replaces them by covariant derivatives built from the Gram Christoffels.
    """
    n = R.val.ndim
    if word.n != n:
        raise RankMismatch(f"flat word rank {word.n} differs from tensor rank {n}")
    flats = [p for p in range(1, n + 1) if not word.is_transversal(p)]
    Rb = _lower_slots(R, setup.eta, flats)
    tau = setup.tau_m
    if form == "partial":
        dR = Rb.grad
        dtau = tau.grad.T                                  # [I, J] = ∂_J τ^I
    elif form == "covariant":
        dR = covariant_derivative(Rb, setup.christoffel, lower=tuple(flats))
        dtau = tau.grad.T + np.einsum("IJK,K->IJ", setup.christoffel, tau.val)
    else:
        raise ValueError(f"unknown form {form!r}")
    L = np.tensordot(tau.val, dR, axes=(0, 0))
    for s in range(1, n + 1):
        if s in flats:
            L = L + _slot_einsum(dtau.T, Rb.val, s, n)     # + ∂_{I_s} τ^J R_{..J..}
        else:
            L = L - _slot_einsum(dtau, Rb.val, s, n)       # − ∂_J τ^{I_s} R^{..J..}
    return _raise_slots(L, setup.eta_inv, flats)


def levi_civita_hat() -> np.ndarray:
    e = np.zeros((3, 3, 3))
    e[0, 1, 2] = e[1, 2, 0] = e[2, 0, 1] = 1.0
    e[0, 2, 1] = e[2, 1, 0] = e[1, 0, 2] = -1.0
    return e


def spacetime_levi_civita(eta: Jet, orientation: float = 1.0) -> Jet:
    """ε_IJK = √det η · ε̂_IJK."""
    sq = jsqrt(jdet(eta))
    return jeinsum(",ijk->ijk", sq, orientation * levi_civita_hat())


def hodge_star(Q: Jet, eta: Jet, orientation: float = 1.0) -> Jet:
    """[⊛Q]^{IJK} = −ε^{IJ}_L Q^{LK}."""
    eps = spacetime_levi_civita(eta, orientation)
    einv = jinv(eta)
    eps_uul = jeinsum("ia,jb,abl->ijl", einv, einv, eps)
    return -jeinsum("ijl,lk->ijk", eps_uul, Q)


def hodge_star_inverse(S: np.ndarray, eta: np.ndarray, orientation: float = 1.0) -> np.ndarray:
    """[⊛⁻¹S]^{IJ} = −½ ε^I_{KL} S^{KLJ}."""
    eps = np.sqrt(np.linalg.det(eta)) * orientation * levi_civita_hat()
    eps_ukl = np.einsum("ia,akl->ikl", np.linalg.inv(eta), eps)
    return -0.5 * np.einsum("ikl,klj->ij", eps_ukl, S)


def oracle_truesdell(Q: Jet, setup: EmbeddingSetup, orientation: float = 1.0) -> SpacetimeTensorRep:
    """⟦⊛⁻¹ Ľ^{♭♭♯} ⊛ Q⟧ for a rank-2 coordinate jet; the SS block is the tangential rate."""
    S = hodge_star(Q, setup.eta, orientation)
    LS = oracle_lie_derivative(S, Shuffle(3, (3,)), setup)
    out = hodge_star_inverse(LS, setup.eta.val, orientation)
    return decompose(SpacetimeCoordTensor(2, out), None, setup.kin_like)


def oracle_shuffled_linear_sum(Q: SpacetimeTensorRep, R: SpacetimeTensorRep, word: Shuffle,
                               frame, kin, eta: np.ndarray) -> SpacetimeTensorRep:
    """Reconstruct, apply Σ Q·R − Σ Qᵀ·R on coordinate proxies, decompose."""
    from .bundle import reconstruct

    n = R.n
    Qc = reconstruct(Q, frame, kin).data
    Rc = reconstruct(R, frame, kin).data
    Qm = np.einsum("...ij,...jk->...ik", Qc, eta)                    # Q^I_K
    QTm = np.einsum("...ji,...jk->...ik", Qc, eta)                   # (Qᵀ)^I_K
    from . import _slots
    out = np.zeros_like(Rc)
    for p in range(1, n + 1):
        if word.is_transversal(p):
            out = out + _slots.apply(Qm, Rc, n, p)
        else:
            out = out - _slots.apply(QTm, Rc, n, p)
    return decompose(SpacetimeCoordTensor(n, out), frame, kin)


@dataclass
class OracleReport:
    max_abs: float
    per_block: dict = field(default_factory=dict)
    digest: str = ""

    def ok(self, tol: float) -> bool:
        return self.max_abs <= tol


def compare_reps(a: SpacetimeTensorRep, b: SpacetimeTensorRep, inputs: tuple = ()) -> OracleReport:
    if a.n != b.n:
        raise RankMismatch(f"ranks differ: {a.n} vs {b.n}")
    per = {}
    for s, x in a:
        per[s.word() or "∅"] = float(np.max(np.abs(x - b.blocks[s]), initial=0.0))
    h = hashlib.sha256()
    for arr in inputs:
        h.update(np.ascontiguousarray(np.asarray(arr, dtype=float)).tobytes())
    return OracleReport(max(per.values(), default=0.0), per, h.hexdigest()[:16])

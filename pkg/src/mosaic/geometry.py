"""Pointwise geometry and kinematics of a moving surface under an observer chart.

Spacetime index order is (t, y¹, y²) ↦ (0, 1, 2).  All evaluators accept a
time t and coordinates y of shape (..., 2) and return arrays with the same
leading batch shape.

Conventions
-----------
* N = ∂_1Z × ∂_2Z / ‖·‖, II_ij = ⟨∂_i∂_jZ, N⟩ (outward N and II = −g on the
  round sphere in colatitude/longitude coordinates).
* ε_12 = +√det g.
* Mixed tensors are stored as M[..., i, k] = M^i_k.  Christoffel symbols are
  stored upper index first: Gamma[..., k, i, j] = Γ^k_ij.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bundle import SpacetimeTensorRep, TangentialJet
from .errors import DomainError, JetUnavailable, SingularMetric
from .shuffles import Shuffle

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ChartJets:
    """Z, first and second partials.  D[..., I, :] = ∂_I Z, DD[..., I, J, :] = ∂_I∂_J Z."""

    Z: np.ndarray
    D: np.ndarray
    DD: np.ndarray | None
    has_tt: bool = True


def _as_points(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[-1:] != (2,):
        raise ValueError(f"coordinates need a trailing axis of length 2, got shape {y.shape}")
    return y


def _as_time(t, y: np.ndarray):
    """A float, or an array broadcastable to the batch shape of y (many times in one call)."""
    if np.ndim(t) == 0:
        return float(t)
    t = np.asarray(t, dtype=float)
    np.broadcast_shapes(t.shape, y.shape[:-1])
    return t


class Chart:
    """Time-dependent parametrization Z(t, y¹, y²) ∈ ℝ³ with partial-derivative jets.

    `func(t, y1, y2)` must broadcast over array arguments and return a
    3-sequence of arrays.  In 'analytic' mode jets come from `jet_func`
    (same signature, returning a ChartJets); in 'finite-difference' mode they
    are computed by 4th-order central differences of `func`.
    """

    def __init__(self, func: Callable, jet_func: Callable | None = None, *, mode: str | None = None,
                 h: float = 1e-5, h2: float = 1e-3, y1_range: tuple | None = None,
                 scale: float = 1.0, name: str = "chart"):
        if mode is None:
            mode = "analytic" if jet_func is not None else "finite-difference"
        if mode not in ("analytic", "finite-difference"):
            raise ValueError(f"unknown chart mode {mode!r}")
        self.func = func
        self.jet_func = jet_func
        self.mode = mode
        self.h = h
        self.h2 = h2
        self.y1_range = y1_range
        self.scale = scale
        self.name = name

    def __repr__(self) -> str:
        return f"Chart({self.name!r}, mode={self.mode!r})"

    def with_mode(self, mode: str) -> "Chart":
        return Chart(self.func, self.jet_func, mode=mode, h=self.h, h2=self.h2,
                     y1_range=self.y1_range, scale=self.scale, name=self.name)

    def _check_domain(self, y: np.ndarray) -> None:
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite coordinates")
        if self.y1_range is not None:
            lo, hi = self.y1_range
            if np.any(y[..., 0] <= lo) or np.any(y[..., 0] >= hi):
                raise DomainError(f"y1 outside the open interval ({lo}, {hi})")

    def _raw(self, t, y) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = self.func(t, y[..., 0], y[..., 1])
        shape = np.broadcast_shapes(t.shape, y.shape[:-1])
        return np.stack([np.broadcast_to(np.asarray(c, dtype=float), shape) for c in out], axis=-1)

    def eval(self, t, y) -> np.ndarray:
        y = _as_points(y)
        self._check_domain(y)
        return self._raw(t, y)

    def jets(self, t, y) -> ChartJets:
        y = _as_points(y)
        self._check_domain(y)
        if self.mode == "analytic":
            if self.jet_func is None:
                raise JetUnavailable(f"{self.name}: no analytic jets and finite differences disabled")
            return self.jet_func(_as_time(t, y), y)
        return self._fd_jets(_as_time(t, y), y)

    def _shifted(self, t, y, steps) -> np.ndarray:
        """Evaluate with x = (t, y1, y2) shifted by `steps` (a 3-vector of arrays)."""
        yy = np.stack([y[..., 0] + steps[1], y[..., 1] + steps[2]], axis=-1)
        return self._raw(t + steps[0], yy)

    def _fd_jets(self, t, y: np.ndarray) -> ChartJets:
        batch = y.shape[:-1]
        x = [np.full(batch, t), y[..., 0], y[..., 1]]
        h1 = [self.h * (1.0 + np.abs(c)) for c in x]
        h2 = [self.h2 * (1.0 + np.abs(c)) for c in x]
        zero = np.zeros(batch)

        def step(I, a, hh):
            s = [zero, zero, zero]
            s[I] = a * hh[I]
            return s

        def d1(f_shift, I, hh):
            c = (-f_shift(step(I, 2, hh)) + 8 * f_shift(step(I, 1, hh))
                 - 8 * f_shift(step(I, -1, hh)) + f_shift(step(I, -2, hh)))
            return c / (12 * hh[I][..., None])

        base = lambda s: self._shifted(t, y, s)
        Z = base([zero, zero, zero])
        D = np.stack([d1(base, I, h1) for I in range(3)], axis=-2)
        DD = np.empty(batch + (3, 3, 3))
        for I in range(3):
            c = (-base(step(I, 2, h2)) + 16 * base(step(I, 1, h2)) - 30 * Z
                 + 16 * base(step(I, -1, h2)) - base(step(I, -2, h2)))
            DD[..., I, I, :] = c / (12 * h2[I][..., None] ** 2)
            for J in range(I + 1, 3):
                def inner(s, J=J):
                    return d1(lambda s2: base([s[k] + s2[k] for k in range(3)]), J, h2)
                DD[..., I, J, :] = DD[..., J, I, :] = d1(inner, I, h2)
        return ChartJets(Z, D, DD, True)

    @classmethod
    def from_sympy(cls, build: Callable, *, y1_range: tuple | None = None, name: str = "chart",
                   scale: float = 1.0) -> "Chart":
        """Analytic chart from a function building sympy expressions of (t, y1, y2)."""
        return SympyChartFamily(build, 0, y1_range=y1_range)((), name=name, scale=scale)


class SympyChartFamily:
    """Charts Z(t, y; p) sharing one symbolic form, differentiated and compiled once.

    `build(t, y1, y2, *p)` returns three sympy expressions; calling the family
    with numeric parameter values yields an analytic Chart.
    """

    def __init__(self, build: Callable, n_params: int, *, y1_range: tuple | None = None):
        import sympy as sp

        t, y1, y2 = sp.symbols("t y1 y2", real=True)
        P = sp.symbols(f"p0:{n_params}", real=True) if n_params else ()
        X = (t, y1, y2)
        Z = [sp.sympify(e) for e in build(t, y1, y2, *P)]
        D = [[sp.diff(z, x) for z in Z] for x in X]
        DD = [[[sp.diff(d, x) for d in D[J]] for J in range(3)] for x in X]
        flat_dd = [DD[I][J][k] for I in range(3) for J in range(3) for k in range(3)]
        args = X + tuple(P)
        self._val = sp.lambdify(args, Z, modules="numpy", cse=True)
        self._all = sp.lambdify(args, Z + [d for row in D for d in row] + flat_dd, modules="numpy", cse=True)
        self.expressions = tuple(Z)
        self.n_params = n_params
        self.y1_range = y1_range

    def __call__(self, values=(), *, name: str = "chart", scale: float = 1.0) -> Chart:
        values = tuple(float(v) for v in values)
        if len(values) != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {len(values)}")
        f_val, f_all = self._val, self._all

        def func(tt, a, b):
            return f_val(tt, a, b, *values)

        def jet_func(tt, y):
            batch = y.shape[:-1]
            vals = f_all(tt, y[..., 0], y[..., 1], *values)
            arr = np.stack([np.broadcast_to(np.asarray(v, dtype=float), batch) for v in vals], axis=-1)
            return ChartJets(arr[..., :3], arr[..., 3:12].reshape(batch + (3, 3)),
                             arr[..., 12:].reshape(batch + (3, 3, 3)), True)

        chart = Chart(func, jet_func, mode="analytic", y1_range=self.y1_range, name=name, scale=scale)
        chart.expressions = self.expressions
        chart.parameters = values
        return chart


@dataclass(frozen=True)
class SurfaceFrame:
    t: float
    y: np.ndarray
    jets: ChartJets
    basis: np.ndarray        # (..., 2, 3)   ∂_i Z
    N: np.ndarray            # (..., 3)
    g: np.ndarray            # (..., 2, 2)
    g_inv: np.ndarray
    det_g: np.ndarray
    christoffel_first: np.ndarray   # (..., 2, 2, 2)  Γ_ijk = ⟨∂_i∂_jZ, ∂_kZ⟩
    christoffel: np.ndarray         # (..., 2, 2, 2)  [k, i, j] = Γ^k_ij
    II: np.ndarray           # (..., 2, 2) covariant
    eps: np.ndarray          # (..., 2, 2) covariant ε_ij

    @property
    def II_mixed(self) -> np.ndarray:
        return self.g_inv @ self.II

    @property
    def eps_mixed(self) -> np.ndarray:
        """ε^i_j."""
        return self.g_inv @ self.eps

    def lower(self, r: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self.g, r)

    def raise_(self, w: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...j->...i", self.g_inv, w)

    def inner(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("...i,...ij,...j->...", a, self.g, b)

    def transpose(self, M: np.ndarray) -> np.ndarray:
        """Metric transpose of a mixed tensor."""
        return self.g_inv @ np.swapaxes(M, -1, -2) @ self.g


def evaluate_frame(chart: Chart, t: float, y) -> SurfaceFrame:
    y = _as_points(y)
    jets = chart.jets(t, y)
    if jets.DD is None:
        raise JetUnavailable(f"{chart.name}: second jets required for the surface frame")
    basis = jets.D[..., 1:, :]
    basis_T = np.swapaxes(basis, -1, -2)
    g = basis @ basis_T
    det_g = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    if np.any(det_g <= SINGULAR_TOL * chart.scale ** 2):
        raise SingularMetric(f"det g = {np.min(det_g):.3e} at or below tolerance")
    g_inv = np.empty_like(g)
    g_inv[..., 0, 0] = g[..., 1, 1] / det_g
    g_inv[..., 1, 1] = g[..., 0, 0] / det_g
    g_inv[..., 0, 1] = g_inv[..., 1, 0] = -g[..., 0, 1] / det_g
    cross = np.cross(basis[..., 0, :], basis[..., 1, :])
    N = cross / np.linalg.norm(cross, axis=-1, keepdims=True)
    dd = jets.DD[..., 1:, 1:, :]
    gam1 = dd @ basis_T[..., None, :, :]                       # [i, j, k]
    gam2 = np.moveaxis(gam1 @ g_inv[..., None, :, :], -1, -3)   # g⁻¹ symmetric; [l, i, j]
    II = (dd @ N[..., None, :, None])[..., 0]
    sq = np.sqrt(det_g)
    eps = np.zeros_like(g)
    eps[..., 0, 1] = sq
    eps[..., 1, 0] = -sq
    return SurfaceFrame(_as_time(t, y), y, jets, basis, N, g, g_inv, det_g, gam1, gam2, II, eps)


@dataclass(frozen=True)
class KinematicState:
    V: np.ndarray        # (..., 3)
    v: np.ndarray        # (..., 2) contravariant
    nu: np.ndarray
    zeta: np.ndarray
    B: np.ndarray        # (..., 2, 2) mixed B^i_j
    B_low: np.ndarray    # B_ij = ⟨∂_jV, ∂_iZ⟩
    b: np.ndarray        # (..., 2) covariant
    a: np.ndarray | None     # (..., 2) contravariant observer acceleration
    lam: np.ndarray | None   # normal observer acceleration
    dv: np.ndarray | None    # (..., 3, 2)  ∂_K v^i
    dnu: np.ndarray | None   # (..., 3)     ∂_K ν
    grad_v: np.ndarray       # (..., 2, 2)  [∇v]^i_k = v^i_{|k}


def observer_kinematics(chart: Chart, t: float, y, frame: SurfaceFrame | None = None) -> KinematicState:
    if frame is None:
        frame = evaluate_frame(chart, t, y)
    jets = frame.jets
    basis, N, g_inv = frame.basis, frame.N, frame.g_inv
    V = jets.D[..., 0, :]
    dV = jets.DD[..., 0, :, :]            # ∂_K V
    basis_T = np.swapaxes(basis, -1, -2)
    col = lambda w: w[..., None]
    v_low = (basis @ col(V))[..., 0]
    v = (g_inv @ col(v_low))[..., 0]
    nu = (V * N).sum(-1)
    zeta = 1.0 / (1.0 + nu ** 2)
    B_low = basis @ np.swapaxes(dV[..., 1:, :], -1, -2)      # B_ij = ⟨∂_jV, ∂_iZ⟩
    B = g_inv @ B_low
    b = (dV[..., 1:, :] @ col(N))[..., 0]
    grad_v = B + nu[..., None, None] * frame.II_mixed
    a = lam = dv = dnu = None
    if jets.has_tt:
        A = dV[..., 0, :]
        a = (g_inv @ (basis @ col(A)))[..., 0]
        lam = (A * N).sum(-1)
        # ∂_K v_i = ⟨∂_K V, ∂_i Z⟩ + ⟨V, ∂_K∂_i Z⟩ and ∂_K g_ij
        dKb = jets.DD[..., :, 1:, :]
        dv_low = dV @ basis_T + (dKb @ V[..., None, :, None])[..., 0]
        dg = dKb @ basis_T[..., None, :, :]
        dg = dg + np.swapaxes(dg, -1, -2)
        gi = g_inv[..., None, :, :]
        dg_inv = -(gi @ dg @ gi)
        dv = (dg_inv @ v_low[..., None, :, None])[..., 0] + dv_low @ g_inv
        dnu = (dV @ col(N))[..., 0] - ((dKb @ N[..., None, :, None])[..., 0] * v[..., None, :]).sum(-1)
    return KinematicState(V, v, nu, zeta, B, B_low, b, a, lam, dv, dnu, grad_v)


@dataclass(frozen=True)
class MaterialData:
    v_m: np.ndarray        # (..., 2)
    dv_m: np.ndarray       # (..., 3, 2) ∂_K v_m^i
    u: np.ndarray
    grad_vm: np.ndarray    # [∇v_m]^i_k
    grad_u: np.ndarray     # [∇u]^i_k
    B_m: np.ndarray        # mixed
    b_m: np.ndarray        # covariant
    nu_dot: np.ndarray     # ∂_t ν + ∇_u ν
    lie_vm: np.ndarray     # Ľ♯v_m = ∂_t v_m + ∇_u v_m − ∇_{v_m} u  (contravariant)

    @property
    def dt_vm(self) -> np.ndarray:
        return self.dv_m[..., 0, :]


def tangent_gradient(frame: SurfaceFrame, w: np.ndarray, dw: np.ndarray) -> np.ndarray:
    """[∇w]^i_k = ∂_k w^i + Γ^i_kj w^j, with dw[..., k, i] = ∂_k w^i (k spatial)."""
    return np.swapaxes(dw, -1, -2) + (frame.christoffel @ w[..., None, :, None])[..., 0]


def vector_jet_array(jet: TangentialJet) -> np.ndarray:
    """(..., 3, 2) array of ∂_K w^i from a vector jet."""
    return np.stack([jet.dt, jet.dy[0], jet.dy[1]], axis=-2)


def lagrangian_material(kin: KinematicState) -> TangentialJet:
    """Material velocity jet of a Lagrangian observer (v_m = v)."""
    if kin.dv is None:
        raise JetUnavailable("observer velocity jets need ∂_t∂_t Z")
    return TangentialJet(kin.v, kin.dv[..., 0, :], (kin.dv[..., 1, :], kin.dv[..., 2, :]))


def material_kinematics(frame: SurfaceFrame, kin: KinematicState, v_m_jet: TangentialJet) -> MaterialData:
    if kin.dnu is None:
        raise JetUnavailable("material data needs ∂_K ν (requires ∂_t∂_t Z)")
    v_m = np.broadcast_to(np.asarray(v_m_jet.value, dtype=float), kin.v.shape)
    dv_m = np.broadcast_to(vector_jet_array(v_m_jet), kin.v.shape[:-1] + (3, 2))
    u = v_m - kin.v
    grad_vm = tangent_gradient(frame, v_m, dv_m[..., 1:, :])
    grad_u = grad_vm - kin.grad_v
    B_m = grad_vm - kin.nu[..., None, None] * frame.II_mixed
    mv = lambda M, x: (M @ x[..., None])[..., 0]
    b_m = kin.dnu[..., 1:] + mv(frame.II, v_m)
    nu_dot = kin.dnu[..., 0] + (u * kin.dnu[..., 1:]).sum(-1)
    lie_vm = dv_m[..., 0, :] + mv(grad_vm, u) - mv(grad_u, v_m)
    return MaterialData(v_m, dv_m, u, grad_vm, grad_u, B_m, b_m, nu_dot, lie_vm)


@dataclass(frozen=True)
class SpacetimeMetric:
    eta: np.ndarray          # (..., 3, 3)
    eta_inv: np.ndarray
    det_eta: np.ndarray
    christoffel_first: np.ndarray | None = None   # [I, J, K] = γ_IJK
    christoffel: np.ndarray | None = None         # [L, I, J] = γ^L_IJ


def spacetime_metric(frame: SurfaceFrame, kin: KinematicState) -> SpacetimeMetric:
    v, zeta, g = kin.v, kin.zeta, frame.g
    v_low = frame.lower(v)
    batch = v.shape[:-1]
    eta = np.empty(batch + (3, 3))
    eta[..., 0, 0] = np.einsum("...i,...i->...", v, v_low) + 1.0 / zeta
    eta[..., 0, 1:] = v_low
    eta[..., 1:, 0] = v_low
    eta[..., 1:, 1:] = g
    inv = np.empty(batch + (3, 3))
    inv[..., 0, 0] = zeta
    inv[..., 0, 1:] = -zeta[..., None] * v
    inv[..., 1:, 0] = -zeta[..., None] * v
    inv[..., 1:, 1:] = frame.g_inv + zeta[..., None, None] * np.einsum("...i,...j->...ij", v, v)
    return SpacetimeMetric(eta, inv, frame.det_g / zeta)


def christoffel_table(frame: SurfaceFrame, kin: KinematicState) -> np.ndarray:
    """γ^L_IJ from the closed-form table in surface quantities; [L, I, J]."""
    if kin.a is None:
        raise JetUnavailable("γ_tt needs ∂_t∂_t Z")
    zn = kin.zeta * kin.nu
    v = kin.v
    batch = v.shape[:-1]
    gam = np.empty(batch + (3, 3, 3))
    gt_ij = zn[..., None, None] * frame.II
    gt_tj = zn[..., None] * kin.b
    gt_tt = zn * kin.lam
    gam[..., 0, 1:, 1:] = gt_ij
    gam[..., 0, 0, 1:] = gam[..., 0, 1:, 0] = gt_tj
    gam[..., 0, 0, 0] = gt_tt
    gam[..., 1:, 1:, 1:] = frame.christoffel - np.einsum("...ij,...k->...kij", gt_ij, v)
    gk_tj = kin.B - np.einsum("...j,...k->...kj", gt_tj, v)
    gam[..., 1:, 0, 1:] = gk_tj
    gam[..., 1:, 1:, 0] = gk_tj
    gam[..., 1:, 0, 0] = kin.a - gt_tt[..., None] * v
    return gam


def christoffel_gram(chart: Chart, t: float, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(η, γ_IJK, γ^L_IJ) from the ℝ⁴ Gram construction with X = [t, Z]."""
    jets = chart.jets(t, _as_points(y))
    if jets.DD is None:
        raise JetUnavailable(f"{chart.name}: second jets missing")
    D, DD = jets.D, jets.DD
    eta = np.einsum("...Ix,...Jx->...IJ", D, D)
    eta[..., 0, 0] += 1.0
    first = np.einsum("...IJx,...Kx->...IJK", DD, D)
    second = np.einsum("...LK,...IJK->...LIJ", np.linalg.inv(eta), first)
    return eta, first, second


def spacetime_christoffels(chart: Chart, t: float, y, method: str = "closed") -> SpacetimeMetric:
    """Spacetime metric with its Christoffel symbols.

    method='closed' assembles γ from surface quantities; method='gram' uses
    γ_IJK = ⟨∂_I∂_J X, ∂_K X⟩ raised by the inverse Gram matrix.
    """
    if method == "gram":
        eta, first, second = christoffel_gram(chart, t, y)
        return SpacetimeMetric(eta, np.linalg.inv(eta), np.linalg.det(eta), first, second)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    frame = evaluate_frame(chart, t, y)
    kin = observer_kinematics(chart, t, y, frame)
    sm = spacetime_metric(frame, kin)
    second = christoffel_table(frame, kin)
    first = np.einsum("...KL,...LIJ->...IJK", sm.eta, second)
    return SpacetimeMetric(sm.eta, sm.eta_inv, sm.det_eta, first, second)


def grad_material_direction(frame: SurfaceFrame, kin: KinematicState, mat: MaterialData) -> SpacetimeTensorRep:
    """⟦∇τ_m⟧ as a rank-2 rep (first slot: component, second slot: direction)."""
    zeta, nu = kin.zeta, kin.nu
    b_up = frame.raise_(mat.b_m)
    B_contra = mat.B_m @ frame.g_inv
    blocks = {
        Shuffle(2, ()): B_contra,
        Shuffle(2, (2,)): zeta[..., None] * (mat.lie_vm - nu[..., None] * b_up),
        Shuffle(2, (1,)): (zeta * nu)[..., None] * b_up,
        Shuffle(2, (1, 2)): zeta ** 2 * nu * mat.nu_dot,
    }
    return SpacetimeTensorRep(2, blocks)


@dataclass(frozen=True)
class Evaluation:
    """Frame, kinematics and material data at a set of points."""

    frame: SurfaceFrame
    kin: KinematicState
    mat: MaterialData


def evaluate(chart: Chart, t: float, y, v_m: Callable | TangentialJet | None = None) -> Evaluation:
    """Convenience bundle.  v_m: None (Lagrangian), a jet, or a callable (frame, kin) -> jet."""
    frame = evaluate_frame(chart, t, y)
    kin = observer_kinematics(chart, t, y, frame)
    if v_m is None:
        jet = lagrangian_material(kin)
    elif callable(v_m):
        jet = v_m(frame, kin)
    else:
        jet = v_m
    return Evaluation(frame, kin, material_kinematics(frame, kin, jet))

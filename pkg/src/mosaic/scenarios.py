"""Analytic moving-sphere experiments, transport solvers, Q-tensor tools and diagnostics.

Three Lagrangian charts share one family

    Z(t, y¹, y²) = [sin y¹ cos(y² + 2πωt), sin y¹ sin(y² + 2πωt), (1 + κt) cos y¹]

with (κ, ω) = (1, 0) for the stretching spheroid, (0, 1) for the rotating
sphere and (1, 1) for the helical spheroid.  All three have the metric
g = diag(G, sin²y¹) with G = 1 + κt(2 + κt) sin²y¹, which is what makes every
closed form below a short expression.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import optimize

from .bundle import SpacetimeTensorRep, TangentialJet, change_observer
from .derivatives import DerivativeKind, instantaneous_rate
from .errors import (CFLViolation, NoCirculation, StepTooLarge, UnknownKind, UnsupportedKind,
                     ZeroField)
from .geometry import Chart, evaluate

TWO_PI = 2.0 * np.pi
POLE_MARGIN = 0.15
CFL_NUMBER = 0.5
DIVERGENCE_GROWTH = 1e6

_PARAMS = {
    "stretching-spheroid": (1.0, 0.0),
    "rotating-sphere": (0.0, 1.0),
    "helical-spheroid": (1.0, 1.0),
}
SCENARIOS = tuple(_PARAMS)


def initial_vector(y) -> np.ndarray:
    """r₀ = (−1, 1/sin y¹)/√2, unit length on the round sphere with φ² = π/4."""
    y = np.asarray(y, dtype=float)
    s = np.sin(y[..., 0])
    return np.stack([-np.ones_like(s), 1.0 / s], axis=-1) / np.sqrt(2.0)


def wavy_initial_vector(y) -> np.ndarray:
    """A longitude-dependent variant of r₀, used to exercise advection."""
    y = np.asarray(y, dtype=float)
    s = np.sin(y[..., 0])
    a = -1.0 + 0.5 * np.sin(y[..., 1])
    b = (1.0 + 0.5 * np.cos(2.0 * y[..., 1])) / s
    return np.stack([a, b], axis=-1) / np.sqrt(2.0)


# ---------------------------------------------------------------- Q-tensor ops

def _metric_norm(r: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...i,...ij,...j->...", r, g, r))


def q_tensor_map(r: np.ndarray, frame) -> np.ndarray:
    """ρ(r) = (2/‖r‖)(r⊗r − ½‖r‖² g⁻¹), contravariant."""
    r = np.asarray(r, dtype=float)
    nrm = _metric_norm(r, frame.g)
    if np.any(nrm == 0.0):
        raise ZeroField("ρ is undefined for the zero vector")
    outer = r[..., :, None] * r[..., None, :]
    return (2.0 / nrm)[..., None, None] * (outer - 0.5 * (nrm ** 2)[..., None, None] * frame.g_inv)


def trace(q: np.ndarray, frame) -> np.ndarray:
    return np.einsum("...ij,...ij->...", q, frame.g)


def project_Q(q: np.ndarray, frame) -> np.ndarray:
    """Orthogonal projection onto trace-free symmetric tensors: ½(q + qᵀ − tr(q) g⁻¹)."""
    q = np.asarray(q, dtype=float)
    return 0.5 * (q + np.swapaxes(q, -1, -2) - trace(q, frame)[..., None, None] * frame.g_inv)


def symmetric_eigen(q: np.ndarray, frame) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the mixed map q^i_k = q^{ij} g_jk of a symmetric q.

    Returns eigenvalues in descending order and contravariant unit
    eigenvectors as columns [..., :, k].
    """
    L = np.linalg.cholesky(frame.g)                 # g = L Lᵀ
    S = np.swapaxes(L, -1, -2) @ q @ L
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    w, V = np.linalg.eigh(S)
    vecs = np.linalg.solve(np.swapaxes(L, -1, -2), V)
    return w[..., ::-1], vecs[..., :, ::-1]


# ---------------------------------------------------------------- diagnostics

def _angles(r: np.ndarray, frame, apolar: bool = False) -> tuple[np.ndarray, np.ndarray]:
    nrm = _metric_norm(r, frame.g)
    if np.any(nrm == 0.0):
        raise ZeroField("angles are undefined for the zero vector")
    low = frame.lower(r)
    out = []
    for i in (1, 2):
        c = (-1) ** i * low[..., i - 1] / (np.sqrt(frame.g[..., i - 1, i - 1]) * nrm)
        if apolar:
            c = np.abs(c)
        out.append(np.arccos(np.clip(c, -1.0, 1.0)))
    return out[0], out[1]


def diagnostics(field: np.ndarray, frame, rank: int | None = None) -> dict:
    """Norm and angles φ¹, φ² of a vector; for 2-tensors also trace, ⟨q, ε⟩ and eigenpairs.

    The angles of a 2-tensor are those of its leading eigenvector (an apolar
    director, so φ is reported in [0, π/2]).
    """
    field = np.asarray(field, dtype=float)
    if rank is None:
        rank = field.ndim - (frame.g.ndim - 2)
    if rank == 1:
        phi1, phi2 = _angles(field, frame)
        return {"norm": _metric_norm(field, frame.g), "phi1": phi1, "phi2": phi2}
    if rank != 2:
        raise UnsupportedKind(f"diagnostics cover ranks 1 and 2, got {rank}")
    low = frame.g @ field @ frame.g
    nrm = np.sqrt(np.einsum("...ij,...ij->...", low, field))
    sym = 0.5 * (field + np.swapaxes(field, -1, -2))
    w, V = symmetric_eigen(sym, frame)
    phi1, phi2 = _angles(V[..., :, 0], frame, apolar=True)
    return {
        "norm": nrm, "phi1": phi1, "phi2": phi2,
        "trace": trace(field, frame),
        "asym": np.einsum("...ij,...ij->...", field, frame.eps),
        "eig1": w[..., 0], "eig2": w[..., 1], "eigvec1": V[..., :, 0], "eigvec2": V[..., :, 1],
    }


# ---------------------------------------------------------------- scenarios

@lru_cache(maxsize=None)
def _chart(kappa: float, omega: float, name: str) -> Chart:
    import sympy as sp

    def build(t, y1, y2):
        phase = y2 + 2 * sp.pi * omega * t if omega else y2
        return (sp.sin(y1) * sp.cos(phase), sp.sin(y1) * sp.sin(phase), (1 + kappa * t) * sp.cos(y1))

    return Chart.from_sympy(build, y1_range=(0.0, np.pi), name=name)


@dataclass(frozen=True)
class Scenario:
    name: str
    kappa: float        # stretch rate of the polar semi-axis
    omega: float        # revolutions per unit time

    @classmethod
    def get(cls, name: "str | Scenario") -> "Scenario":
        if isinstance(name, Scenario):
            return name
        if name not in _PARAMS:
            raise UnsupportedKind(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
        k, w = _PARAMS[name]
        return cls(name, k, w)

    # charts ---------------------------------------------------------
    @property
    def chart(self) -> Chart:
        """Lagrangian observer chart."""
        return _chart(self.kappa, self.omega, self.name)

    @property
    def eulerian_chart(self) -> Chart | None:
        """Stationary chart, available for shape-stationary motions only."""
        if self.kappa != 0.0:
            return None
        return _chart(0.0, 0.0, self.name + "/eulerian")

    def to_lagrangian(self, t, y_e) -> np.ndarray:
        y = np.array(y_e, dtype=float, copy=True)
        y[..., 1] -= TWO_PI * self.omega * t
        return y

    def to_eulerian(self, t, y_m) -> np.ndarray:
        y = np.array(y_m, dtype=float, copy=True)
        y[..., 1] += TWO_PI * self.omega * t
        return y

    def eulerian_material(self, frame, kin) -> TangentialJet:
        """v_m = 2πω ∂₂ in the stationary chart."""
        batch = kin.v.shape[:-1]
        v = np.zeros(batch + (2,))
        v[..., 1] = TWO_PI * self.omega
        return TangentialJet.frozen(v)

    # closed-form ingredients ---------------------------------------
    def G(self, t, y1) -> np.ndarray:
        """g₁₁ = 1 + κt(2 + κt) sin²y¹; g¹¹ = 1/G."""
        kt = self.kappa * t
        return 1.0 + kt * (2.0 + kt) * np.sin(y1) ** 2

    def f(self, t, y1) -> np.ndarray:
        """Revolutions of the material-transported field relative to the Jaumann one."""
        y1 = np.asarray(y1, dtype=float)
        if self.omega == 0.0:
            return np.zeros(np.broadcast(t, y1).shape)
        if self.kappa == 0.0:
            return self.omega * t * np.cos(y1)
        s = np.sin(y1)
        k = self.kappa
        root = np.sqrt(self.G(t, y1))
        # ∫₀ᵗ ω cos y¹ / √G ds, with G quadratic in κs
        return self.omega / k * np.cos(y1) / s * np.log(((1 + k * t) * s + root) / (1 + s))

    def f_prime(self, t, y1) -> np.ndarray:
        return self.omega * np.cos(y1) / np.sqrt(self.G(t, y1))

    def rotation(self, t, y1) -> np.ndarray:
        """Ω = cos(2πf) Id + sin(2πf) ε as a mixed 2×2 tensor."""
        y1 = np.asarray(y1, dtype=float)
        th = TWO_PI * self.f(t, y1)
        s = np.sin(y1)
        sq = np.sqrt(self.G(t, y1))
        c, sn = np.cos(th), np.sin(th)
        return np.stack([np.stack([c, sn * s / sq], -1), np.stack([-sn * sq / s, c], -1)], -2)

    def unit_sphere_frame(self, y):
        """Frame data at t = 0 (the round sphere), enough for ρ and diagnostics."""
        y = np.asarray(y, dtype=float)
        s2 = np.sin(y[..., 0]) ** 2
        g = np.zeros(y.shape[:-1] + (2, 2))
        g[..., 0, 0], g[..., 1, 1] = 1.0, s2
        g_inv = np.zeros_like(g)
        g_inv[..., 0, 0], g_inv[..., 1, 1] = 1.0, 1.0 / s2
        return _MetricFrame(g, g_inv)

    def initial_tensor(self, y, vector: Callable = initial_vector) -> np.ndarray:
        """Q₀ = ρ(r₀) at t = 0."""
        return q_tensor_map(vector(y), self.unit_sphere_frame(y))

    def closed_form(self, kind, t, y, rank: int = 1, initial: Callable | None = None) -> np.ndarray:
        """Exact solution of the force-free transport problem in Lagrangian components."""
        kind = DerivativeKind.parse(kind) if isinstance(kind, str) else kind
        y = np.asarray(y, dtype=float)
        y1 = y[..., 0]
        G = self.G(t, y1)
        if rank == 1:
            r0 = (initial or initial_vector)(y)
            scale = _slot_scales(kind, 1, G, self)
            r = r0 * scale[0]
            if kind.family == "material":
                r = np.einsum("...ij,...j->...i", self.rotation(t, y1), r)
            return r
        if rank == 2:
            q0 = (initial or self.initial_tensor)(y)
            a, b = _slot_scales(kind, 2, G, self)
            q = q0 * a[..., :, None] * b[..., None, :]
            if kind.family == "material":
                Om = self.rotation(t, y1)
                q = Om @ q @ np.swapaxes(Om, -1, -2)
            return q
        raise UnsupportedKind(f"closed forms cover ranks 1 and 2, got {rank}")


@dataclass(frozen=True)
class _MetricFrame:
    g: np.ndarray
    g_inv: np.ndarray

    def lower(self, r):
        return np.einsum("...ij,...j->...i", self.g, r)


def _slot_scales(kind: DerivativeKind, rank: int, G, scen: Scenario) -> list[np.ndarray]:
    """Per-slot factors on the (1, 2) components of the initial tensor.

    ♯ slots are frozen, ♭ slots pick up g¹¹ = 1/G, and material/Jaumann slots
    sit halfway with 1/√G (before the material rotation).
    """
    ones = np.ones(np.shape(G))
    if kind.family in ("material", "jaumann"):
        per = [np.stack([1.0 / np.sqrt(G), ones], -1)] * rank
    elif kind.family == "convected":
        w = kind.word_for(rank)
        per = [np.stack([ones if w.is_transversal(p) else 1.0 / G, ones], -1) for p in range(1, rank + 1)]
    elif kind.family == "truesdell":
        if rank != 2:
            raise UnknownKind("Truesdell rate is defined for 2-tensors only")
        if scen.kappa != 0.0:
            raise UnsupportedKind(f"no closed-form Truesdell solution on {scen.name}")
        # rigid motion: the scalar factor vanishes and the rate is the ♯♯ one
        per = [np.stack([ones, ones], -1)] * 2
    else:
        raise UnknownKind(kind.label)
    return per


def closed_form_solution(scenario, kind, t, y, rank: int = 1, initial: Callable | None = None,
                         observer: str = "lagrangian") -> np.ndarray:
    """Closed-form transported field; for observer='eulerian', y are stationary coordinates."""
    scen = Scenario.get(scenario)
    if observer == "eulerian":
        if scen.eulerian_chart is None:
            raise UnsupportedKind(f"{scen.name} has no stationary chart")
        y = scen.to_lagrangian(t, y)
    elif observer != "lagrangian":
        raise ValueError(f"unknown observer {observer!r}")
    return scen.closed_form(kind, t, y, rank, initial)


# ---------------------------------------------------------------- circulation

def circulation_times(y1: float, alpha: int | float, scenario="helical-spheroid", tol: float = 1e-12) -> float:
    """Time of the α-th tangential half-circulation, |f(t)| = α/2.

    The root is bracketed by doubling from t = 0, located by bisection and
    polished with Newton steps using f′ = ω cos y¹/√G.
    """
    scen = Scenario.get(scenario)
    if scen.omega == 0.0:
        raise NoCirculation(f"{scen.name} does not rotate")
    if not 0.0 < y1 < np.pi:
        raise ValueError("y1 must lie in (0, π)")
    if abs(math.cos(y1)) < 1e-14:
        raise NoCirculation("f vanishes identically on the equator")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    sign = math.copysign(1.0, math.cos(y1))
    target = 0.5 * alpha
    h = lambda t: sign * float(scen.f(t, y1)) - target
    hp = lambda t: sign * float(scen.f_prime(t, y1))
    hi = 1.0
    while h(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise NoCirculation("no circulation within t < 1e12")
    t0 = optimize.bisect(h, 0.0, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    return float(optimize.newton(h, t0, fprime=hp, tol=tol, maxiter=8))


def circulation_time_closed_form(alpha: float) -> float:
    """Half-circulation time at 30° latitude on the helical spheroid."""
    r3 = math.sqrt(3.0)
    return math.sinh(r3 * alpha / 2 + math.log(2 + r3)) / r3 - 1.0


# ---------------------------------------------------------------- transport

def _threads() -> int:
    raw = os.environ.get("MOSAIC_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class TransportProblem:
    scenario: str
    kind: str = "material"
    grid: tuple = (16, 32)
    dt: float = 1e-3
    t_end: float = 1.0
    observer: str = "lagrangian"
    rank: int = 1
    delta: float = POLE_MARGIN
    initial: Callable | None = field(default=None, compare=False)
    sample_every: int | None = None

    def __post_init__(self):
        n1, n2 = self.grid
        if n1 < 1 or n2 < 1:
            raise ValueError(f"grid must be nonempty, got {n1}x{n2}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if self.observer not in ("lagrangian", "eulerian"):
            raise ValueError(f"unknown observer {self.observer!r}")
        if self.rank not in (1, 2):
            raise ValueError("transport is implemented for vectors and 2-tensors")
        if not 0 < self.delta < np.pi / 2:
            raise ValueError("pole margin must lie in (0, π/2)")
        Scenario.get(self.scenario)
        kind = self.derivative_kind()
        if kind.family == "truesdell" and self.rank != 2:
            raise UnknownKind("truesdell is defined here for 2-tensors only")
        if kind.family == "convected":
            kind.word_for(self.rank)

    def derivative_kind(self) -> DerivativeKind:
        return DerivativeKind.parse(self.kind) if isinstance(self.kind, str) else self.kind

    @property
    def steps(self) -> int:
        n = int(round(self.t_end / self.dt))
        if abs(n * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError("t_end must be an integer multiple of dt")
        return n

    def stride(self) -> int:
        if self.sample_every is not None:
            return max(1, int(self.sample_every))
        return max(1, math.ceil(self.steps / 100))

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """(y¹ values, y² values); nodes are their tensor product in row-major order."""
        n1, n2 = self.grid
        y1 = np.linspace(self.delta, np.pi - self.delta, n1) if n1 > 1 else np.array([np.pi / 2 - np.pi / 6])
        y2 = TWO_PI * np.arange(n2) / n2
        return y1, y2

    def node_array(self) -> np.ndarray:
        y1, y2 = self.nodes()
        Y1, Y2 = np.meshgrid(y1, y2, indexing="ij")
        return np.stack([Y1.ravel(), Y2.ravel()], axis=-1)

    def initial_field(self, y: np.ndarray) -> np.ndarray:
        scen = Scenario.get(self.scenario)
        if self.rank == 1:
            return (self.initial or initial_vector)(y)
        return (self.initial or scen.initial_tensor)(y)


@dataclass
class Trajectory:
    problem: TransportProblem
    times: np.ndarray        # (K,)
    nodes: np.ndarray        # (P, 2), coordinates of the problem's observer
    values: np.ndarray       # (K, P) + (2,)*rank

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


def _rk4(rhs: Callable, r: np.ndarray, steps: int, dt: float, stride: int, start_norm: float):
    times, out = [0.0], [r.copy()]
    limit = DIVERGENCE_GROWTH * max(start_norm, 1e-300)
    for k in range(steps):
        t = k * dt
        k1 = rhs(2 * k, r)
        k2 = rhs(2 * k + 1, r + 0.5 * dt * k1)
        k3 = rhs(2 * k + 1, r + 0.5 * dt * k2)
        k4 = rhs(2 * k + 2, r + dt * k3)
        r = r + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(r)) or np.max(np.abs(r), initial=0.0) > limit:
            raise StepTooLarge(f"RK4 diverged at t = {t + dt:.6g}; reduce dt")
        if (k + 1) % stride == 0 or k + 1 == steps:
            times.append((k + 1) * dt)
            out.append(r.copy())
    return np.array(times), np.stack(out)


_TIME_BLOCK = 8


def _lagrangian_chunk(problem: TransportProblem, y: np.ndarray, r0: np.ndarray):
    scen = Scenario.get(problem.scenario)
    chart = scen.chart
    kind = problem.derivative_kind()
    rank = problem.rank
    dim = 2 ** rank
    P = len(y)
    basis = np.eye(dim).reshape((dim,) + (2,) * rank)
    dt = problem.dt
    cache: dict[int, np.ndarray] = {}

    def block(b: int) -> np.ndarray:
        """Operators L(t) for half-step indices b·H … b·H + H − 1, shape (H, P, out, in)."""
        halves = np.arange(b * _TIME_BLOCK, (b + 1) * _TIME_BLOCK)
        t = (halves * (dt / 2))[:, None, None]
        yb = np.broadcast_to(y[None, :, None, :], (len(halves), P, 1, 2))
        ev = evaluate(chart, t, yb)
        value = np.broadcast_to(basis, (len(halves), P) + basis.shape)
        rate = instantaneous_rate(kind, TangentialJet.frozen(value), ev.frame, ev.kin, ev.mat, rank)
        return rate.reshape(len(halves), P, dim, dim).swapaxes(-1, -2)

    def operator(half: int) -> np.ndarray:
        b = half // _TIME_BLOCK
        if b not in cache:
            for key in [k for k in cache if k < b]:
                del cache[key]
            cache[b] = block(b)
        return cache[b][half % _TIME_BLOCK]

    flat0 = r0.reshape(P, dim)
    rhs = lambda half, r: -np.einsum("pij,pj->pi", operator(half), r)
    times, vals = _rk4(rhs, flat0, problem.steps, dt, problem.stride(),
                       float(np.max(np.abs(flat0), initial=0.0)))
    return times, vals.reshape(vals.shape[:2] + (2,) * rank)


def solve_lagrangian_transport(problem: TransportProblem, nodes: np.ndarray | None = None) -> Trajectory:
    """Pointwise RK4 solve of rate(r) = 0 in the Lagrangian chart (u = 0).

    With u = 0 the rate is ∂_t r + L(t) r for a pointwise linear L(t), which
    is assembled once per stage time by applying the rate to basis tensors.
    Operators for a block of consecutive stage times are assembled in one vectorised
    call.  Node chunks run on up to MOSAIC_THREADS threads.
    """
    if problem.observer != "lagrangian":
        raise ValueError("solve_lagrangian_transport needs observer='lagrangian'")
    y = problem.node_array() if nodes is None else np.asarray(nodes, dtype=float).reshape(-1, 2)
    r0 = problem.initial_field(y)
    n = min(_threads(), len(y))
    chunks = np.array_split(np.arange(len(y)), n)
    if n == 1:
        parts = [_lagrangian_chunk(problem, y, r0)]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(lambda idx: _lagrangian_chunk(problem, y[idx], r0[idx]), chunks))
    times = parts[0][0]
    values = np.concatenate([p[1] for p in parts], axis=1)
    return Trajectory(problem, times, y, values)


def _d2_periodic(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order central first derivative on a periodic axis."""
    r = lambda s: np.roll(f, s, axis=axis)
    return (-r(-2) + 8 * r(-1) - 8 * r(1) + r(2)) / (12.0 * h)


def solve_eulerian_transport(problem: TransportProblem) -> Trajectory:
    """Method of lines in the stationary chart: periodic 4th-order FD in y², RK4 in t.

    Only the rotating sphere qualifies; its stationary observer sees
    u = v_m = 2π∂₂, so only y²-derivatives of the field enter.
    """
    if problem.observer != "eulerian":
        raise ValueError("solve_eulerian_transport needs observer='eulerian'")
    scen = Scenario.get(problem.scenario)
    chart = scen.eulerian_chart
    if chart is None:
        raise UnsupportedKind(f"{scen.name} changes shape; the Eulerian solver needs a stationary surface")
    kind = problem.derivative_kind()
    rank = problem.rank
    y1, y2 = problem.nodes()
    n1, n2 = len(y1), len(y2)
    Y = problem.node_array().reshape(n1, n2, 2)
    ev = evaluate(chart, 0.0, Y, scen.eulerian_material)
    u = ev.mat.u
    if np.max(np.abs(u[..., 0])) > 1e-12:
        raise UnsupportedKind("the Eulerian solver advects along y² only")
    hy = TWO_PI / n2
    umax = float(np.max(np.abs(u[..., 1])))
    if umax > 0 and problem.dt > CFL_NUMBER * hy / umax:
        raise CFLViolation(f"dt = {problem.dt:g} exceeds {CFL_NUMBER}·Δy/max|u| = {CFL_NUMBER * hy / umax:.3e}")
    zeros = None

    def rhs(_half, r):
        nonlocal zeros
        if zeros is None:
            zeros = np.zeros_like(r)
        d2 = _d2_periodic(r, hy, axis=1)
        jet = TangentialJet(r, zeros, (zeros, d2))
        return -instantaneous_rate(kind, jet, ev.frame, ev.kin, ev.mat, rank)

    r0 = problem.initial_field(Y)
    times, vals = _rk4(rhs, r0, problem.steps, problem.dt, problem.stride(),
                       float(np.max(np.abs(r0), initial=0.0)))
    P = n1 * n2
    return Trajectory(problem, times, Y.reshape(P, 2), vals.reshape((len(times), P) + (2,) * rank))


def solve_transport(problem: TransportProblem) -> Trajectory:
    if problem.observer == "lagrangian":
        return solve_lagrangian_transport(problem)
    return solve_eulerian_transport(problem)


def eulerian_to_lagrangian(traj: Trajectory, index: int = -1) -> tuple[np.ndarray, np.ndarray]:
    """Push an Eulerian snapshot into Lagrangian components; returns (y_m, values)."""
    scen = Scenario.get(traj.problem.scenario)
    t = float(traj.times[index])
    rank = traj.problem.rank
    rep = SpacetimeTensorRep.instantaneous(traj.values[index], rank)
    rep_m, y_m = change_observer(rep, scen.eulerian_chart, scen.chart, t, traj.nodes,
                                 scen.to_lagrangian, jacobian=lambda t_, y_: np.broadcast_to(np.eye(2), y_.shape[:-1] + (2, 2)))
    return y_m, rep_m.blocks[next(iter(rep_m.blocks))]


def observer_invariance_residual(problem: TransportProblem, reference_dt: float | None = None) -> float:
    """max |Eulerian solve mapped to Lagrangian components − Lagrangian solve at the same events|.

    The Lagrangian reference is a pointwise ODE solve; `reference_dt` lets it
    run at a coarser step than the method of lines, whose step is set by the
    spatial grid.
    """
    eul = solve_eulerian_transport(replace(problem, observer="eulerian"))
    y_m, r_e = eulerian_to_lagrangian(eul)
    ref = replace(problem, observer="lagrangian", dt=reference_dt or problem.dt, sample_every=None)
    lag = solve_lagrangian_transport(ref, nodes=y_m)
    return float(np.max(np.abs(r_e - lag.final)))

"""Randomised analytic test material: perturbed moving spheres and smooth fields.

Charts are built symbolically so every jet is exact.  Fields are finite
trigonometric sums in (t, y¹, y²) with closed-form gradients.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bundle import SpacetimeTensorRep, TangentialJet, TensorFieldJet
from .geometry import Chart, SympyChartFamily
from .shuffles import all_shuffles

Y1_SAMPLE = (0.45, np.pi - 0.45)


_FIXED = 13          # drift(2), spin, tilt, shift(3), growth, and five spare slots kept at zero


@lru_cache(maxsize=None)
def _fourier_family(modes: int) -> SympyChartFamily:
    import sympy as sp

    def build(t, y1, y2, *p):
        drift1, drift2, spin, tilt, sx, sy, sz, growth = p[:8]
        rho = 1 + growth * t / (1 + t ** 2)
        for m in range(modes):
            k1, k2, w, c, ph = p[_FIXED + 5 * m: _FIXED + 5 * m + 5]
            rho = rho + c * sp.cos(k1 * y1 + k2 * y2 + w * t + ph)
        th = y1 + drift1 * sp.sin(t + y2)
        phi = y2 + drift2 * t + spin * t * sp.cos(y1)
        x = rho * sp.sin(th) * sp.cos(phi)
        y = rho * sp.sin(th) * sp.sin(phi)
        z = rho * sp.cos(th)
        # rigid tilt about the x-axis, angle growing in time
        a = tilt * t
        y, z = sp.cos(a) * y - sp.sin(a) * z, sp.sin(a) * y + sp.cos(a) * z
        return (x + sx * t, y + sy * t ** 2, z + sz * sp.sin(t))

    return SympyChartFamily(build, _FIXED + 5 * modes)


def fourier_sphere_chart(rng: np.random.Generator, modes: int = 3, amplitude: float = 0.08,
                         name: str = "fourier-sphere") -> Chart:
    """A sphere with a moving Fourier-perturbed radius, a drifting and
    rotating parametrisation, and a translating centre.

    The observer is neither Lagrangian nor normal, and ν, B, b, a, λ are all
    generically nonzero.  The symbolic form is compiled once per mode count;
    each call only draws coefficients.
    """
    k = rng.integers(0, 3, size=(modes, 2))
    w = rng.uniform(-1.5, 1.5, size=modes)
    c = rng.uniform(-amplitude, amplitude, size=modes)
    ph = rng.uniform(0, 2 * np.pi, size=modes)
    drift = rng.uniform(-0.15, 0.15, size=2)
    spin = rng.uniform(-1.0, 1.0)
    tilt = rng.uniform(-0.6, 0.6)
    shift = rng.uniform(-0.3, 0.3, size=3)
    growth = rng.uniform(-0.2, 0.3)
    params = [*drift, spin, tilt, *shift, growth] + [0.0] * (_FIXED - 8)
    for m in range(modes):
        params += [k[m, 0], k[m, 1], w[m], c[m], ph[m]]
    return _fourier_family(modes)(params, name=name)


@dataclass(frozen=True)
class TrigField:
    """Σ_m A_m sin(k_m·x + φ_m) + c over x = (t, y¹, y²), per output component."""

    amp: np.ndarray      # (M, C)
    wave: np.ndarray     # (M, 3)
    phase: np.ndarray    # (M, C)
    offset: np.ndarray   # (C,)
    shape: tuple

    @classmethod
    def random(cls, rng: np.random.Generator, shape: tuple, modes: int = 3, scale: float = 1.0) -> "TrigField":
        C = int(np.prod(shape)) if shape else 1
        return cls(rng.normal(size=(modes, C)) * scale / modes,
                   rng.integers(-2, 3, size=(modes, 3)).astype(float),
                   rng.uniform(0, 2 * np.pi, size=(modes, C)),
                   rng.normal(size=C) * scale, tuple(shape))

    def __call__(self, t, y) -> TangentialJet:
        y = np.asarray(y, dtype=float)
        batch = y.shape[:-1]
        x = np.concatenate([np.full(batch + (1,), float(t)), y], axis=-1)
        arg = (x @ self.wave.T)[..., None] + self.phase          # batch + (M, C)
        val = (self.amp * np.sin(arg)).sum(-2) + self.offset
        cos = self.amp * np.cos(arg)
        grad = np.einsum("...mc,mk->...kc", cos, self.wave)      # batch + (3, C)
        shp = batch + self.shape
        return TangentialJet(val.reshape(shp), grad[..., 0, :].reshape(shp),
                             (grad[..., 1, :].reshape(shp), grad[..., 2, :].reshape(shp)))


@dataclass(frozen=True)
class RandomRepField:
    """A rank-n spacetime tensor field given block-wise by trigonometric sums."""

    n: int
    blocks: dict

    @classmethod
    def random(cls, rng: np.random.Generator, n: int, modes: int = 3) -> "RandomRepField":
        return cls(n, {s: TrigField.random(rng, (2,) * (n - s.alpha), modes) for s in all_shuffles(n)})

    def __call__(self, t, y) -> TensorFieldJet:
        jets = {s: f(t, y) for s, f in self.blocks.items()}
        mk = lambda get: SpacetimeTensorRep(self.n, {s: get(j) for s, j in jets.items()})
        return TensorFieldJet(mk(lambda j: j.value), mk(lambda j: j.dt),
                              (mk(lambda j: j.dy[0]), mk(lambda j: j.dy[1])))


@dataclass(frozen=True)
class PerturbedMaterial:
    """v_m = v + δ with a trigonometric δ: a material that slides past the observer."""

    delta: TrigField

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 0.5) -> "PerturbedMaterial":
        return cls(TrigField.random(rng, (2,), modes=2, scale=scale))

    def __call__(self, frame, kin) -> TangentialJet:
        d = self.delta(frame.t, frame.y)
        dv = kin.dv
        return TangentialJet(kin.v + d.value, dv[..., 0, :] + d.dt,
                             (dv[..., 1, :] + d.dy[0], dv[..., 2, :] + d.dy[1]))


def sample_points(rng: np.random.Generator, count: int) -> np.ndarray:
    y1 = rng.uniform(*Y1_SAMPLE, size=count)
    y2 = rng.uniform(0, 2 * np.pi, size=count)
    return np.stack([y1, y2], axis=-1)

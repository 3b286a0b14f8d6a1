from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mosaic import _slots
from mosaic.bundle import (SpacetimeCoordTensor, SpacetimeTensorRep, TangentialJet, change_observer, decompose,
                           reconstruct, transversal_instantaneous_projectors)
from mosaic.errors import EventMismatch, RankCap, RankMismatch
from mosaic.geometry import evaluate, spacetime_metric
from mosaic.scenarios import Scenario
from mosaic.shuffles import Shuffle, all_shuffles

finite = st.floats(-5, 5, allow_nan=False)


def kin_with(v):
    return SimpleNamespace(v=np.asarray(v, dtype=float))


@st.composite
def coord_tensors(draw, max_n=4):
    n = draw(st.integers(0, max_n))
    data = draw(arrays(float, (3,) * n, elements=finite))
    v = draw(arrays(float, (2,), elements=finite))
    return SpacetimeCoordTensor(n, data), kin_with(v)


@given(coord_tensors())
def test_round_trip(args):
    R, kin = args
    rep = decompose(R, None, kin)
    back = reconstruct(rep, None, kin)
    assert np.allclose(back.data, R.data, atol=1e-12 * max(1.0, np.abs(R.data).max(initial=0)))
    again = decompose(back, None, kin)
    assert all(np.allclose(again[s], b, atol=1e-10) for s, b in rep)


@given(coord_tensors())
def test_scalar_count(args):
    R, kin = args
    rep = decompose(R, None, kin)
    assert sum(b.size for _, b in rep) == 3 ** R.n
    assert rep.flat().size == 3 ** R.n


def test_examples():
    kin = kin_with([0.0, 0.0])
    assert decompose(SpacetimeCoordTensor(0, np.array(2.5)), None, kin)[Shuffle(0, ())] == 2.5
    rep = decompose(SpacetimeCoordTensor(1, np.array([1.0, 2.0, 3.0])), None, kin_with([0.5, -1.0]))
    assert rep[Shuffle(1, (1,))] == 1.0
    assert np.allclose(rep[Shuffle(1, ())], [2.5, 2.0])
    # τ itself is purely transversal
    tau = SpacetimeCoordTensor(1, np.array([1.0, -0.5, 1.0]))
    rep = decompose(tau, None, kin_with([0.5, -1.0]))
    assert np.allclose(rep[Shuffle(1, ())], 0) and rep[Shuffle(1, (1,))] == 1.0


def test_instantaneous_reps_have_no_time_proxies(rng):
    for n in range(1, 4):
        q = rng.normal(size=(2,) * n)
        R = reconstruct(SpacetimeTensorRep.instantaneous(q, n), None, kin_with(rng.normal(size=2)))
        for p in range(1, n + 1):
            assert np.allclose(_slots.take(R.data, n, p, 0), 0)


def test_orthogonality_of_parts(fourier_chart, rng):
    ev = evaluate(fourier_chart, 0.4, np.array([1.0, 2.0]))
    eta = spacetime_metric(ev.frame, ev.kin).eta
    for n in (1, 2, 3):
        R = SpacetimeCoordTensor(n, rng.normal(size=(3,) * n))
        rep = decompose(R, ev.frame, ev.kin)
        parts = {}
        for s in all_shuffles(n):
            only = SpacetimeTensorRep.zeros(n)
            only.blocks[s] = rep[s]
            parts[s] = reconstruct(only, ev.frame, ev.kin).data
        for s in all_shuffles(n):
            for s2 in all_shuffles(n):
                if s == s2:
                    continue
                A, B = parts[s], parts[s2]
                for p in range(1, n + 1):
                    B = _slots.apply(eta, B, n, p)
                scale = np.abs(A).max() * np.abs(B).max() + 1
                assert abs(np.sum(A * B)) < 1e-10 * scale


def test_projectors(fourier_chart):
    ev = evaluate(fourier_chart, 0.2, np.array([1.2, 0.5]))
    Pt, Ps = transversal_instantaneous_projectors(ev.frame, ev.kin)
    assert np.allclose(Pt + Ps, np.eye(3))
    assert np.allclose(Pt @ Pt, Pt) and np.allclose(Ps @ Ps, Ps)


def test_rep_arithmetic_and_validation(rng):
    a = SpacetimeTensorRep.instantaneous(rng.normal(size=(2, 2)), 2)
    b = SpacetimeTensorRep.zeros(2)
    assert (a + b - a).max_abs() == 0
    assert np.allclose((a * 2.0)["SS"], 2 * a["SS"]) and np.allclose((-a)["(|1 2)"], -a["SS"])
    with pytest.raises(RankMismatch):
        a + SpacetimeTensorRep.zeros(1)
    with pytest.raises(ValueError):
        SpacetimeTensorRep(1, {Shuffle(1, ()): np.zeros(2)})
    with pytest.raises(ValueError):
        SpacetimeTensorRep(1, {Shuffle(1, ()): np.zeros(3), Shuffle(1, (1,)): 0.0})
    with pytest.raises(RankCap):
        SpacetimeTensorRep.zeros(9)
    with pytest.raises(ValueError):
        SpacetimeCoordTensor(2, np.zeros((3, 2)))


def test_change_observer():
    scen = Scenario.get("rotating-sphere")
    rep = SpacetimeTensorRep.instantaneous(np.array([0.3, -1.2]), 1)
    y_m = np.array([0.8, 1.0])
    t = 0.25
    out, y_e = change_observer(rep, scen.chart, scen.eulerian_chart, t, y_m, scen.to_eulerian)
    assert np.allclose(y_e, [0.8, 1.0 + 2 * np.pi * t])
    assert np.allclose(out["S"], rep["S"], atol=1e-10)
    same, y_same = change_observer(rep, scen.chart, scen.chart, t, y_m, lambda t, y: y)
    assert np.allclose(same["S"], rep["S"]) and np.allclose(y_same, y_m)
    with pytest.raises(EventMismatch):
        change_observer(rep, scen.chart, scen.eulerian_chart, t, y_m, lambda t, y: y)


def test_change_observer_reparametrisation():
    from mosaic.geometry import Chart
    a = Chart.from_sympy(lambda t, y1, y2: (y1, y2, y1 * y2 * t))
    b = Chart.from_sympy(lambda t, y1, y2: (2 * y1, y2, 2 * y1 * y2 * t))
    rep = SpacetimeTensorRep.instantaneous(np.array([[1.0, 2.0], [3.0, 4.0]]), 2)
    out, _ = change_observer(rep, a, b, 0.5, np.array([0.3, 0.7]), lambda t, y: y * np.array([0.5, 1.0]))
    assert np.allclose(out["SS"], np.diag([0.5, 1]) @ rep["SS"] @ np.diag([0.5, 1]), atol=1e-9)


def test_frozen_jet():
    j = TangentialJet.frozen([1.0, 2.0])
    assert np.all(j.dt == 0) and np.all(j.dy[1] == 0)

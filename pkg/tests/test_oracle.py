import numpy as np
import pytest

from mosaic.bundle import SpacetimeCoordTensor, TangentialJet, TensorFieldJet, decompose
from mosaic.corpus import PerturbedMaterial, RandomRepField, TrigField, fourier_sphere_chart, sample_points
from mosaic.derivatives import (convected_derivative, instantaneous_two_tensor_rate, jaumann_derivative,
                                material_derivative, transversal_direction_rep, truesdell_rate)
from mosaic.errors import MissingJet, RankMismatch
from mosaic.geometry import Chart, ChartJets, evaluate
from mosaic.oracle import (Jet, compare_reps, coordinate_jet, embedding_setup, hodge_star, hodge_star_inverse,
                           levi_civita_hat, oracle_lie_derivative, oracle_material_derivative, oracle_truesdell)
from mosaic.scenarios import Scenario
from mosaic.shuffles import Shuffle, all_shuffles, flat_word, sharp_word

PLANE = Chart.from_sympy(lambda t, y1, y2: (y1, y2, 0 * t), name="plane")


def event(chart, t, y, material=None):
    ev = evaluate(chart, t, y, material)
    vm = material(ev.frame, ev.kin) if material else TangentialJet(ev.mat.v_m, ev.mat.dt_vm,
                                                                   (ev.mat.dv_m[1], ev.mat.dv_m[2]))
    return ev.frame, ev.kin, ev.mat, embedding_setup(chart, t, y, vm)


def lift(arr, n, f, k):
    return decompose(SpacetimeCoordTensor(n, arr), f, k)


def test_constant_proxies_on_static_plane():
    f, k, m, setup = event(PLANE, 0.0, np.array([0.3, 0.4]))
    R = Jet(np.arange(9.0).reshape(3, 3), np.zeros((3, 3, 3)))
    assert np.allclose(oracle_material_derivative(R, setup.christoffel, setup.tau_m), 0)
    assert np.allclose(oracle_lie_derivative(R, Shuffle(2, (1,)), setup), 0)


def test_transversal_direction_on_stretching_spheroid():
    chart = Scenario.get("stretching-spheroid").chart
    f, k, m, setup = event(chart, 0.7, np.array([1.1, 0.3]))
    o = lift(oracle_material_derivative(setup.tau, setup.christoffel, setup.tau_m), 1, f, k)
    assert compare_reps(o, material_derivative(transversal_direction_rep(f, k), f, k, m)).max_abs < 1e-12


def test_scalar_lie_equals_material(fourier_chart, rng):
    y = sample_points(rng, 1)[0]
    mat = PerturbedMaterial.random(rng)
    f, k, m, setup = event(fourier_chart, 0.4, y, mat)
    R = Jet(np.array(1.7), rng.normal(size=3))
    lie = oracle_lie_derivative(R, Shuffle(0, ()), setup)
    mat_rate = oracle_material_derivative(R, setup.christoffel, setup.tau_m)
    assert np.isclose(lie, mat_rate)
    assert np.isclose(mat_rate, R.grad[0] + m.u @ R.grad[1:])


def test_material_direction_is_frozen(fourier_chart, rng):
    y = sample_points(rng, 1)[0]
    f, k, m, setup = event(fourier_chart, 0.6, y, PerturbedMaterial.random(rng))
    assert np.abs(oracle_lie_derivative(setup.tau_m, sharp_word(1), setup)).max() < 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_oracle_agreement_rank3(seed):
    rng = np.random.default_rng(seed)
    chart = fourier_sphere_chart(rng)
    y = sample_points(rng, 1)[0]
    f, k, m, setup = event(chart, float(rng.uniform(0, 1)), y, PerturbedMaterial.random(rng))
    jet = RandomRepField.random(rng, 3)(f.t, y)
    R = coordinate_jet(jet, setup)
    o = lift(oracle_material_derivative(R, setup.christoffel, setup.tau_m), 3, f, k)
    assert compare_reps(material_derivative(jet, f, k, m), o).max_abs < 1e-8 * max(1, o.max_abs())
    lies = {}
    for w in all_shuffles(3):
        lies[w] = lift(oracle_lie_derivative(R, w, setup), 3, f, k)
        cov = lift(oracle_lie_derivative(R, w, setup, "covariant"), 3, f, k)
        assert compare_reps(lies[w], cov).max_abs < 1e-10 * max(1, cov.max_abs())
        res = compare_reps(convected_derivative(jet, w, f, k, m), lies[w])
        assert res.max_abs < 1e-8 * max(1, lies[w].max_abs())
        assert all(v >= 0 for v in res.per_block.values())
    avg = (lies[sharp_word(3)] + lies[flat_word(3)]).scaled(0.5)
    assert compare_reps(jaumann_derivative(jet, f, k, m, "closed"), avg).max_abs < 1e-8 * max(1, avg.max_abs())


def test_truesdell_oracle(rng):
    # zero field
    chart = Scenario.get("stretching-spheroid").chart
    y = np.array([0.9, 0.5])
    f, k, m, setup = event(chart, 0.4, y)
    Z = Jet(np.zeros((3, 3)), np.zeros((3, 3, 3)))
    assert oracle_truesdell(Z, setup).max_abs() == 0
    # stretching spheroid, random q, both orientations
    q = TrigField.random(rng, (2, 2))(0.4, y)
    Q = coordinate_jet(TensorFieldJet.instantaneous(q, 2), setup)
    closed = truesdell_rate(q, f, k, m)
    for sign in (1.0, -1.0):
        assert np.allclose(oracle_truesdell(Q, setup, sign)["SS"], closed, atol=1e-10)
    # rigid rotation: equals the upper-convected rate
    chart = Scenario.get("rotating-sphere").chart
    f, k, m, setup = event(chart, 0.4, y)
    Q = coordinate_jet(TensorFieldJet.instantaneous(q, 2), setup)
    assert np.allclose(oracle_truesdell(Q, setup)["SS"],
                       instantaneous_two_tensor_rate("upper-convected", q, f, k, m), atol=1e-10)


def test_spacetime_hodge_round_trip(fourier_chart, rng):
    f, k, m, setup = event(fourier_chart, 0.3, sample_points(rng, 1)[0])
    for _ in range(5):
        Q = Jet(rng.normal(size=(3, 3)), np.zeros((3, 3, 3)))
        for sign in (1.0, -1.0):
            S = hodge_star(Q, setup.eta, sign)
            assert np.allclose(hodge_star_inverse(S.val, setup.eta.val, sign), Q.val, atol=1e-12)


def test_levi_civita_symbol():
    e = levi_civita_hat()
    assert e[0, 1, 2] == 1 and e[1, 0, 2] == -1 and np.count_nonzero(e) == 6
    assert np.allclose(e, -np.swapaxes(e, 0, 1)) and np.allclose(e, -np.swapaxes(e, 1, 2))


def test_metricity_of_spacetime_connection(fourier_chart, rng):
    for y in sample_points(rng, 4):
        f, k, m, setup = event(fourier_chart, 0.5, y, PerturbedMaterial.random(rng))
        d = oracle_material_derivative(setup.eta, setup.christoffel, setup.tau_m, lower=(1, 2))
        assert np.abs(d).max() < 1e-8


def test_closed_and_gram_christoffels_feed_the_same_oracle(fourier_chart, rng):
    from mosaic.geometry import christoffel_table
    f, k, m, setup = event(fourier_chart, 0.2, sample_points(rng, 1)[0])
    assert np.allclose(christoffel_table(f, k), setup.christoffel, atol=1e-12)


def test_errors(fourier_chart, rng):
    def no_tt(t, y):
        j = fourier_chart.jets(t, y)
        return ChartJets(j.Z, j.D, j.DD, False)
    chart = Chart(fourier_chart.func, no_tt, mode="analytic")
    with pytest.raises(MissingJet):
        embedding_setup(chart, 0.1, np.array([1.0, 1.0]), TangentialJet.frozen(np.zeros(2)))
    with pytest.raises(ValueError):
        embedding_setup(fourier_chart, 0.1, np.ones((2, 2)), TangentialJet.frozen(np.zeros(2)))
    f, k, m, setup = event(fourier_chart, 0.2, np.array([1.0, 1.0]))
    with pytest.raises(RankMismatch):
        oracle_lie_derivative(setup.tau_m, sharp_word(2), setup)
    with pytest.raises(ValueError):
        oracle_lie_derivative(setup.tau_m, sharp_word(1), setup, "other")
    a = lift(np.zeros(3), 1, f, k)
    b = lift(np.zeros((3, 3)), 2, f, k)
    with pytest.raises(RankMismatch):
        compare_reps(a, b)

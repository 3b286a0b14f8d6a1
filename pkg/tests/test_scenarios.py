import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mosaic.errors import CFLViolation, NoCirculation, RankMismatch, StepTooLarge, UnknownKind, UnsupportedKind, ZeroField
from mosaic.geometry import evaluate_frame
from mosaic.scenarios import (SCENARIOS, Scenario, TransportProblem, circulation_time_closed_form,
                              circulation_times, closed_form_solution, diagnostics, eulerian_to_lagrangian,
                              initial_vector, observer_invariance_residual, project_Q, q_tensor_map,
                              solve_eulerian_transport, solve_lagrangian_transport, solve_transport,
                              symmetric_eigen, trace, wavy_initial_vector)

Y30 = np.pi / 2 - np.pi / 6
KINDS_1 = ("material", "jaumann", "upper-convected", "lower-convected")
KINDS_2 = KINDS_1 + ("upper-lower-convected", "lower-upper-convected")


def along_e1(y):
    """A vector along ∂₁: its Q-tensor is diagonal."""
    y = np.asarray(y, dtype=float)
    return np.stack([np.ones(y.shape[:-1]), np.zeros(y.shape[:-1])], -1)


def frame_at(y, t=0.3):
    return evaluate_frame(Scenario.get("helical-spheroid").chart, t, y)


vectors = arrays(float, (2,), elements=st.floats(-3, 3)).filter(lambda r: np.linalg.norm(r) > 1e-3)
points = st.tuples(st.floats(0.3, 2.8), st.floats(0, 6.28)).map(np.array)


@given(vectors, points)
def test_rho_invariants(r, y):
    f = frame_at(y)
    q = q_tensor_map(r, f)
    assert np.allclose(q_tensor_map(-r, f), q)
    assert abs(trace(q, f)) < 1e-12 * max(1, np.abs(q).max())
    nrm = np.sqrt(f.inner(r, r))
    assert np.allclose(q @ f.g @ r, nrm * r, atol=1e-12 * max(1, np.abs(q).max() * np.abs(r).max()))


@given(arrays(float, (2, 2), elements=st.floats(-3, 3)), points)
def test_projection_properties(q, y):
    f = frame_at(y)
    p = project_Q(q, f)
    assert np.allclose(project_Q(p, f), p, atol=1e-12)
    assert np.allclose(p, p.T) and abs(trace(p, f)) < 1e-12
    other = np.arange(4.0).reshape(2, 2)
    ip = lambda a, b: np.einsum("ij,ik,jl,kl->", a, f.g, f.g, b)
    assert np.isclose(ip(project_Q(q, f), other), ip(q, project_Q(other, f)), atol=1e-10)


def test_projection_of_identity_and_zero_field():
    f = frame_at(np.array([1.0, 0.2]))
    assert np.allclose(project_Q(f.g_inv, f), 0)
    with pytest.raises(ZeroField):
        q_tensor_map(np.zeros(2), f)
    with pytest.raises(ZeroField):
        diagnostics(np.zeros(2), f)


def test_symmetric_eigen(rng):
    f = frame_at(np.array([0.8, 1.0]))
    q = project_Q(rng.normal(size=(2, 2)), f)
    w, V = symmetric_eigen(q, f)
    assert w[0] >= w[1] and np.isclose(w[0], -w[1])
    for k in range(2):
        assert np.allclose(q @ f.g @ V[:, k], w[k] * V[:, k])
        assert np.isclose(f.inner(V[:, k], V[:, k]), 1.0)


def test_initial_field_diagnostics():
    scen = Scenario.get("stretching-spheroid")
    y = np.array([[0.4, 0.0], [1.3, 2.0], [2.6, 5.0]])
    frame = scen.unit_sphere_frame(y)
    frame_full = evaluate_frame(scen.chart, 0.0, y)
    d = diagnostics(initial_vector(y), frame_full)
    assert np.allclose(d["norm"], 1) and np.allclose(d["phi2"], np.pi / 4)
    q0 = scen.initial_tensor(y)
    assert np.allclose(q0[:, 0, 0], 0) and np.allclose(q0[:, 1, 1], 0)
    assert np.allclose(q0[:, 0, 1], -1 / np.sin(y[:, 0])) and np.allclose(q0[:, 1, 0], q0[:, 0, 1])
    d = diagnostics(q0, frame_full)
    assert np.allclose(d["trace"], 0, atol=1e-14) and np.allclose(d["asym"], 0)
    assert np.allclose(d["eig1"], 1) and np.allclose(d["eig2"], -1)
    assert frame.g.shape == (3, 2, 2)
    with pytest.raises(UnsupportedKind):
        diagnostics(np.zeros((3, 2, 2, 2)), frame_full, rank=3)


@pytest.mark.parametrize("name", SCENARIOS)
def test_closed_forms_start_at_initial_field(name):
    y = np.array([[0.5, 0.1], [2.0, 3.0]])
    for kind in KINDS_1:
        assert np.array_equal(closed_form_solution(name, kind, 0.0, y), initial_vector(y))
    scen = Scenario.get(name)
    for kind in KINDS_2:
        assert np.allclose(closed_form_solution(name, kind, 0.0, y, rank=2), scen.initial_tensor(y), atol=1e-15)


def test_closed_form_examples():
    y = np.array([[0.7, 0.0], [1.9, 1.0]])
    t = 0.8
    G = 1 + t * (2 + t) * np.sin(y[:, 0]) ** 2
    r0 = initial_vector(y)
    r = closed_form_solution("stretching-spheroid", "material", t, y)
    assert np.allclose(r[:, 0], -1 / (np.sqrt(2) * np.sqrt(G))) and np.allclose(r[:, 1], r0[:, 1])
    assert np.allclose(closed_form_solution("stretching-spheroid", "lower-convected", t, y)[:, 0], r0[:, 0] / G)
    for kind in ("jaumann", "upper-convected", "lower-convected"):
        assert np.allclose(closed_form_solution("rotating-sphere", kind, t, y), r0)
    assert np.allclose(closed_form_solution("helical-spheroid", "jaumann", t, y),
                       closed_form_solution("stretching-spheroid", "jaumann", t, y))
    with pytest.raises(UnsupportedKind):
        closed_form_solution("helical-spheroid", "truesdell", t, y, rank=2)
    with pytest.raises(UnknownKind):
        closed_form_solution("rotating-sphere", "truesdell", t, y, rank=1)
    with pytest.raises(UnsupportedKind):
        closed_form_solution("nowhere", "material", t, y)
    with pytest.raises(UnsupportedKind):
        closed_form_solution("stretching-spheroid", "material", t, y, observer="eulerian")


def test_material_solution_preserves_norm_and_angle():
    y = np.array([[0.7, 0.0], [1.9, 1.0]])
    for name in ("stretching-spheroid", "helical-spheroid"):
        for t in (0.5, 1.7):
            f = evaluate_frame(Scenario.get(name).chart, t, y)
            d = diagnostics(closed_form_solution(name, "jaumann", t, y), f)
            assert np.allclose(d["norm"], 1) and np.allclose(d["phi2"], np.pi / 4)
            d = diagnostics(closed_form_solution(name, "material", t, y), f)
            assert np.allclose(d["norm"], 1)


def test_circulation_times():
    assert abs(circulation_times(Y30, 1) - 1.5286) < 1e-3
    assert abs(circulation_times(Y30, 2) - 5.0755) < 1e-3
    for a in (1, 2, 3):
        assert abs(circulation_times(Y30, a) - circulation_time_closed_form(a)) < 1e-10
        assert abs(circulation_times(np.pi - Y30, a) - circulation_time_closed_form(a)) < 1e-10
        assert abs(circulation_times(Y30, a, "rotating-sphere") - a) < 1e-10
    with pytest.raises(NoCirculation):
        circulation_times(np.pi / 2, 1)
    with pytest.raises(NoCirculation):
        circulation_times(Y30, 1, "stretching-spheroid")
    with pytest.raises(ValueError):
        circulation_times(0.0, 1)
    with pytest.raises(ValueError):
        circulation_times(Y30, 0)


def test_problem_validation():
    with pytest.raises(ValueError):
        TransportProblem("rotating-sphere", grid=(0, 3))
    with pytest.raises(ValueError):
        TransportProblem("rotating-sphere", dt=0.0)
    with pytest.raises(ValueError):
        TransportProblem("rotating-sphere", observer="sideways")
    with pytest.raises(ValueError):
        TransportProblem("rotating-sphere", rank=3)
    with pytest.raises(ValueError):
        TransportProblem("rotating-sphere", delta=2.0)
    with pytest.raises(UnsupportedKind):
        TransportProblem("cylinder")
    with pytest.raises(UnknownKind):
        TransportProblem("rotating-sphere", "oldroyd")
    with pytest.raises(UnknownKind):
        TransportProblem("rotating-sphere", "truesdell", rank=1)
    with pytest.raises(RankMismatch):
        TransportProblem("rotating-sphere", "convected:♯♭", rank=1)
    assert TransportProblem("rotating-sphere", "truesdell", rank=2).rank == 2
    with pytest.raises(ValueError):
        TransportProblem("rotating-sphere", dt=0.3, t_end=1.0).steps
    p = TransportProblem("rotating-sphere", grid=(3, 4), dt=1e-3, t_end=2.0)
    assert p.steps == 2000 and p.steps // p.stride() + 1 <= 101
    y = p.node_array()
    assert y.shape == (12, 2) and np.allclose(y[:4, 0], 0.15) and np.allclose(y[4:8, 1], p.nodes()[1])


def test_lagrangian_solver_matches_closed_forms():
    for name in SCENARIOS:
        for kind in KINDS_1:
            p = TransportProblem(name, kind, grid=(3, 2), dt=1e-2, t_end=1.0)
            tr = solve_transport(p)
            ref = closed_form_solution(name, kind, 1.0, tr.nodes)
            assert np.abs(tr.final - ref).max() < 1e-5 * np.abs(ref).max()
            assert tr.values.shape[0] == len(tr.times) and tr.times[-1] == 1.0


def test_foucault_angle():
    y = np.array([[0.6, 0.0], [Y30, 0.0]])
    p = TransportProblem("rotating-sphere", "material", dt=5e-3, t_end=1.0)
    tr = solve_lagrangian_transport(p, nodes=y)
    f = evaluate_frame(Scenario.get("rotating-sphere").chart, 1.0, y)
    r0, r1 = tr.values[0], tr.final
    cosang = f.inner(r0, r1) / np.sqrt(f.inner(r0, r0) * f.inner(r1, r1))
    # the rotation is by 2π cos y¹; compare through the cosine
    assert np.allclose(cosang, np.cos(2 * np.pi * np.cos(y[:, 0])), atol=1e-6)


def test_lower_convected_shrinks_norm():
    p = TransportProblem("stretching-spheroid", "lower-convected", grid=(3, 1), dt=1e-2, t_end=1.0)
    tr = solve_lagrangian_transport(p)
    f = evaluate_frame(Scenario.get("stretching-spheroid").chart, 1.0, tr.nodes)
    assert np.all(diagnostics(tr.final, f)["norm"] < 0.99)


def test_polar_apolar_consistency():
    scen = Scenario.get("helical-spheroid")
    for kind in ("material", "jaumann"):
        pv = TransportProblem("helical-spheroid", kind, grid=(3, 2), dt=2.5e-3, t_end=1.0)
        pq = TransportProblem("helical-spheroid", kind, grid=(3, 2), dt=2.5e-3, t_end=1.0, rank=2)
        rv, rq = solve_lagrangian_transport(pv), solve_lagrangian_transport(pq)
        f = evaluate_frame(scen.chart, 1.0, rv.nodes)
        assert np.abs(q_tensor_map(rv.final, f) - rq.final).max() < 1e-6 * np.abs(rq.final).max()


def test_q_tensor_closure_conditions():
    scen = Scenario.get("helical-spheroid")
    y = np.array([[0.6, 0.3], [2.2, 1.0]])
    f = evaluate_frame(scen.chart, 1.0, y)
    diag_init = lambda yy: scen.initial_tensor(yy, along_e1)
    for kind in ("upper-convected", "lower-convected"):
        keep = closed_form_solution(scen.name, kind, 1.0, y, 2)
        lose = closed_form_solution(scen.name, kind, 1.0, y, 2, initial=diag_init)
        assert np.allclose(trace(keep, f), 0, atol=1e-13)
        assert np.all(np.abs(trace(lose, f)) > 1e-2)
    for kind in ("upper-lower-convected", "lower-upper-convected"):
        keep = closed_form_solution(scen.name, kind, 1.0, y, 2, initial=diag_init)
        lose = closed_form_solution(scen.name, kind, 1.0, y, 2)
        assert np.allclose(keep, np.swapaxes(keep, -1, -2))
        assert np.all(np.abs(diagnostics(lose, f)["asym"]) > 1e-2)


def test_eulerian_solver_converges_fourth_order():
    errs = []
    for n in (64, 128):
        p = TransportProblem("rotating-sphere", "upper-convected", grid=(2, n), dt=1e-3, t_end=0.25,
                             observer="eulerian", initial=wavy_initial_vector)
        tr = solve_eulerian_transport(p)
        ref = closed_form_solution("rotating-sphere", "upper-convected", 0.25, tr.nodes,
                                   initial=wavy_initial_vector, observer="eulerian")
        errs.append(np.abs(tr.final - ref).max())
    assert errs[1] < 5e-5 and np.log2(errs[0] / errs[1]) > 3.7
    y_m, vals = eulerian_to_lagrangian(tr)
    assert np.allclose(y_m[:, 1], tr.nodes[:, 1] - 2 * np.pi * 0.25)
    zero = TransportProblem("rotating-sphere", "material", grid=(2, 16), dt=1e-2, t_end=0.1,
                            observer="eulerian", initial=lambda y: np.zeros(y.shape))
    assert np.all(solve_transport(zero).final == 0)


def test_eulerian_errors():
    with pytest.raises(CFLViolation):
        solve_eulerian_transport(TransportProblem("rotating-sphere", grid=(2, 256), dt=1e-2, t_end=0.1,
                                                  observer="eulerian"))
    with pytest.raises(UnsupportedKind):
        solve_eulerian_transport(TransportProblem("helical-spheroid", grid=(2, 16), dt=1e-3, t_end=0.01,
                                                  observer="eulerian"))


def test_observer_invariance_small():
    p = TransportProblem("rotating-sphere", "material", grid=(2, 128), dt=2e-3, t_end=0.5, observer="eulerian",
                         initial=wavy_initial_vector)
    assert observer_invariance_residual(p, reference_dt=1e-2) < 1e-3


def test_divergence_is_detected():
    p = TransportProblem("rotating-sphere", "material", grid=(2, 1), dt=1.0, t_end=50.0)
    with pytest.raises(StepTooLarge):
        solve_lagrangian_transport(p)


def test_threaded_solve_is_deterministic(monkeypatch):
    p = TransportProblem("helical-spheroid", "material", grid=(4, 3), dt=1e-2, t_end=0.2, rank=2)
    serial = solve_lagrangian_transport(p).values
    monkeypatch.setenv("MOSAIC_THREADS", "3")
    assert np.array_equal(solve_lagrangian_transport(p).values, serial)

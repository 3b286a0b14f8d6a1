"""Observer-invariant time derivatives of tensor fields on moving surfaces.

Spacetime tensor fields on a moving surface are stored in bundle form: one
tangential proxy per shuffle.  The package computes material, convected,
Jaumann and Truesdell rates of such fields, checks them against a
coordinate-level oracle, and solves the classical transport experiments on
stretching, rotating and helically deforming spheres.
"""
from .bundle import (SpacetimeCoordTensor, SpacetimeTensorRep, TangentialJet, TensorFieldJet, change_observer,
                     decompose, reconstruct)
from .derivatives import (DerivativeKind, convected_derivative, instantaneous_rate, instantaneous_two_tensor_rate,
                          instantaneous_vector_rate, jaumann_derivative, material_derivative, scalar_rate,
                          tangential_total_derivative, truesdell_rate)
from .errors import MosaicError
from .geometry import (Chart, SympyChartFamily, evaluate, evaluate_frame, material_kinematics,
                       observer_kinematics, spacetime_christoffels, spacetime_metric)
from .scenarios import (SCENARIOS, Scenario, TransportProblem, circulation_times, closed_form_solution,
                        diagnostics, solve_eulerian_transport, solve_lagrangian_transport, solve_transport)
from .shuffles import Shuffle, all_shuffles, enumerate_shuffles

__version__ = "0.1.0"

__all__ = [
    "Chart", "SympyChartFamily", "evaluate", "evaluate_frame", "observer_kinematics", "material_kinematics",
    "spacetime_metric", "spacetime_christoffels",
    "Shuffle", "all_shuffles", "enumerate_shuffles",
    "SpacetimeTensorRep", "SpacetimeCoordTensor", "TangentialJet", "TensorFieldJet",
    "decompose", "reconstruct", "change_observer",
    "DerivativeKind", "material_derivative", "convected_derivative", "jaumann_derivative", "truesdell_rate",
    "scalar_rate", "tangential_total_derivative", "instantaneous_rate", "instantaneous_vector_rate",
    "instantaneous_two_tensor_rate",
    "SCENARIOS", "Scenario", "TransportProblem", "closed_form_solution", "circulation_times", "diagnostics",
    "solve_transport", "solve_lagrangian_transport", "solve_eulerian_transport",
    "MosaicError",
]

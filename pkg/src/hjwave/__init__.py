"""Coherent wave packets from the imaginary Hamilton-Jacobi action, checked
against grid quantum mechanics."""
from .action import ActionModel, omega_from_action, scl_eval, scl_grad
from .classical_flow import integrate_flow, q_rotation_residual
from .coherent import (CoherentParams, apply_annihilation, build_state_1d, expected_z,
                       predict_peak)
from .grid import GridSpec, WaveFunctionGrid
from .kernels import BACKEND
from .potential import PotentialSpec, eval_potential, small_oscillation_frequency
from .quantum_grid import ground_state, observables, propagate
from .qvariables import QMap, q_eval, q_grad, q_invert
from .radial2d import RadialModel, angular_rate, build_q12, build_state_2d, propagate_2d, u_eval

__version__ = "0.1.0"

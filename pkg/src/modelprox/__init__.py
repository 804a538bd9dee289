"""Stochastic model-based minimization of weakly convex functions.

A numpy/scipy library implementing the proximal stochastic subgradient
method and the general stochastic model-based iteration with pluggable
one-sided model families (subgradient, prox-linear, proximal point),
Moreau-envelope stationarity measurement with certified inner solves,
closed-form subproblem solvers for robust phase retrieval and blind
deconvolution with independent brute-force oracles, and a benchmark
harness reproducing the step-size sweep experiments.
"""

from .algorithms import (RunRecord, Schedule, make_schedule, run_model_based,
                         run_psg, select_iterate, weighted_average)
from .errors import (ConfigValidationError, DegeneratePolynomialError,
                     DimensionMismatchError, DivergedRunError,
                     InvalidParameterError, NonconvexSubproblemError,
                     ToleranceNotMetError, TrajectoryNotRetainedError,
                     UnsupportedCombinationError)
from .models import (GENERIC_STEP_TOL, ModelFamily, SampledModel,
                     TheoreticalConstants, family_eta, family_tau,
                     model_lipschitz, model_step, model_value)
from .oracle import (OracleReport, default_pairings, faulted_pairings,
                     finite_difference_check, generic_prox_subproblem,
                     grid_minimize, run_verification)
from .problems import (ProblemInstance, SubgradientSample, blind_instance,
                       cvar_instance, cvar_model_step,
                       generate_blind_deconvolution, generate_cvar,
                       generate_lad, generate_phase_retrieval, lad_instance,
                       lad_model_step, objective_value, phase_instance,
                       problem_from_config, problem_to_config,
                       proxlinear_step_blind, proxlinear_step_phase,
                       proxpoint_step_blind, proxpoint_step_phase,
                       solve_linear_model_prox, stochastic_subgradient)
from .quartic import quartic_real_roots
from .regularizers import Regularizer, ball, box, l1, squared_l2, zero
from .rng import RngStream, gaussian_vector, unit_sphere_point
from .stationarity import (EnvelopeReport, QuadraticObjective, moreau_envelope,
                           prox_gradient_mapping)

__version__ = "0.1.0"

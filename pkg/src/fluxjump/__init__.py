"""Numerical laboratory for conservation laws with a flux discontinuity.

The model is ``u_t + f(u)_x = 0`` on ``x > 0`` and ``u_t + g(u)_x = 0`` on
``x < 0`` with strictly convex ``f`` and ``g``, coupled at ``x = 0`` by flux
equality and an entropy rule at the critical connection.  The package
provides exact fractional total variation, a Godunov scheme with an
interface flux, closed-form exact solutions (including a blow-up chain with
prescribed jump asymptotics), and trend-based numerical experiments for the
quantitative regularity properties of the model.
"""
from __future__ import annotations

from .errors import (ConstructionError, DomainError,
                     HypothesisViolationError, InfeasibilityError,
                     ParameterError, RangeError, SizeError, StabilityError,
                     UndefinedExponentError)
from .flux import (BoundReport, FluxPair, FluxSpec, SmoothingExponents,
                   deriv_inv, flux_from_fields, flux_to_fields, gamma_nu,
                   holder_exponent_estimate, inv_minus, inv_plus,
                   max_principle_bound, pair_from_fields, pair_to_fields,
                   power_law_flux, shifted_quadratic, singular_map_lr,
                   singular_map_rl, smoothing_exponents, speed_bound)
from .pvar import (EmbeddingReport, SampledSignal, VariationReport,
                   embedding_check, extrema_reduce, signal_from_csv,
                   signal_to_csv, tv_s_bruteforce, tv_s_exact, tv_s_window,
                   variation_dp)
from .solver import (Grid, SpaceTimeSolution, TraceSeries, cfl_dt,
                     godunov_interior_flux, initial_cell_averages,
                     interface_godunov_flux, l1_error, piecewise_constant,
                     solve, write_snapshot_csv, write_traces_csv)
from .exact import (BackwardData, CounterexampleParams, CounterexampleSpec,
                    PiecewiseConstantData, backward_initial_data,
                    build_backward, build_sequences,
                    counterexample_backward_data, counterexample_params,
                    exact_solution_eval, export_solution_csv, hplus,
                    jump_magnitude, jump_series, left_trace,
                    rebased_initial_data, rho, rho_sided, right_trace,
                    sample_solution, spec_from_fields, spec_to_fields,
                    u_exact_at_T, xi_interval)
from .verify import (ExperimentReport, blowup_experiment, bvs_test_signal,
                     contrast_ladder_data, holder_lemma_suite,
                     interface_conditions_check, outside_interface_experiment,
                     random_step_data, refinement_contrast_experiment,
                     smoothing_experiment, trace_experiment, write_report)

__version__ = "0.1.0"

import types as _types

__all__ = [_name for _name, _obj in list(globals().items())
           if not _name.startswith("_")
           and not isinstance(_obj, _types.ModuleType)]

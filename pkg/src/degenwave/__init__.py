"""Simulation library for a vibrating string with amplitude-degenerate damping.

The damping coefficient vanishes with the displacement, so dissipation
weakens exactly where the solution is small.  The package discretizes the
problem with piecewise-linear finite elements, solves it by successive
linear approximations stepped through a quadrature-discretized
variation-of-parameters formula, extends trajectories with a five-step
Adams-Bashforth scheme, and validates everything against an independent
pointwise Runge-Kutta reference available for single-mode initial data.
"""

__version__ = "0.1.0"

from .mesh import (Mesh, QuarticTensor, SpatialOperators, assemble, build_mesh,
                   eigenpair, hat_load, l2_project, mesh_from_h,
                   ritz_project_h1)
from .linop import (BlockGenerator, ExponentialOverflowError, Propagator,
                    energy, energy_inner, energy_norm, expm_taylor, h1_norm,
                    l2_norm, make_generator, matrix_exponential)
from .linwave import (ForcingSamples, ModalState, Trajectory,
                      analytic_linear_damped, duhamel_step, exact_group,
                      modal_nodal_state, newton_cotes_weights,
                      solve_linear_inhomogeneous)
from .picard import (DegenerateDamping, LinearDamping, PicardConfig,
                     PicardDivergenceError, PicardResult, PrimitiveDamping,
                     ZeroForcing, cubic_forcing, estimate_contraction,
                     picard_solve)
from .multistep import (AB5_COEFFS, ABState, BlowupError, ab5_init, ab5_step,
                        extend_trajectory, semilinear_rhs, stable_substeps)
from .oracle import (AnsatzProblem, OracleSolution, OscillatorProblem,
                     StabilitySweep, ball_samples, compare_energy_decay,
                     compare_energy_norm, oracle_field, oracle_states,
                     rk4_ansatz, simulate_oscillator, uniform_stability_sweep)
from .experiments import (EnergyTrace, FrequencyRun, LowerOrderReport,
                          ModeData, PrimitiveResult, PrimitiveSetup,
                          closed_form_potential_m1, conservative_comparison,
                          continuum_energy_error, decay_rate_fit,
                          extend_with_ab5, fractional_sine_norm,
                          frequency_sweep, lower_order_decay,
                          mode_initial_state, primitive_setup, primitive_solve)

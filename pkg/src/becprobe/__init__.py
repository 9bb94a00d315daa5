"""Single-atom probe of condensate decoherence.

A qubit dispersively coupled to a lossy oscillator accumulates a decoherence
factor over one coupling period; this package simulates the full Lindblad
dynamics on truncated Fock spaces and checks the closed-form predictions.
"""

from .dissipation import (ChannelKind, LindbladChannel, LossRateCatalog,
                          gamma_eff_three_body, loss_rates, make_channel)
from .errors import (BecProbeError, ConfigError, CutoffTooSmall, ValidationError)
from .fock import (FockCutoff, Operator, OscState, State, annihilator,
                   coherent_state, creator, fidelity, fock_state, identity_op,
                   number_op, partial_trace_oscillator, partial_trace_qubit,
                   tensor, thermal_state)
from .liouville import (AnalyticCrossTerm, Liouvillian,
                        analytic_cross_coefficient, analytic_gamma_bar,
                        analytic_thermal_visibility, build_liouvillian, evolve,
                        evolve_trajectory)
from .model import (FeshbachParams, ModelParams, build_hamiltonian,
                    build_two_mode_hamiltonian, coupling_from_geometry,
                    feshbach_length, hp_reduce, hp_validity_run)
from .protocol import (ProbeConfig, ProbeResult, distance_D,
                       excited_probability, extract_visibility, mixture_probe,
                       prepare_initial, run_probe, thermal_quadrature_mixture,
                       uniform_delta_grid)

__version__ = "0.1.0"

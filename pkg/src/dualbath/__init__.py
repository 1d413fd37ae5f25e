"""Polaron-frame TCL2 dynamics of a two-level system between two baths.

A numerics library for a central two-level system coupled simultaneously
to a noninteracting spin ensemble (Ising-type) and a boson continuum with
cubic spectral densities, treated in the polaron frame with a second-order
time-convolutionless master equation.  Includes the reduced dynamics of
the spin ensemble itself (macroscopic-superposition generation) and a
small-scale exact-diagonalization benchmark.
"""

__version__ = "0.1.0"

from .bath import (BathKernels, BathParams, DiscreteBath, PolaronConstants,
                   QuadratureError, d_m, d_phase, displacement_correlators,
                   f_mqs, phi, polaron_constants, psi, psi_offset,
                   spectral_density)
from .scenario import (RunSettings, Scenario, ScenarioError, SystemParams,
                       load_scenario)
from .sectors import (PairEigens, SectorEigens, SectorSpectrum, degeneracy,
                      kernel_K, kernel_K_tilde, pair_eigens, q_coeffs,
                      sector_eigens, sector_spectrum, sector_table,
                      spin_coherent_coeffs, x_state_coeffs)
from .tls import (IntegrationError, SteadyStateError, TLSTrajectory,
                  exact_xi0_P1, gibbs_P1, integrate, steady_state)
from .spinbath import (MQSTrajectory, mqs_reference, q_correlator_D,
                       q_correlator_DD, run_mqs, tau_mqs, theta_pm)
from .oracle import (BathOracle, TruncatedModel, discretize_cubic_bath,
                     propagate)

__all__ = [
    "__version__",
    "BathKernels", "BathParams", "DiscreteBath", "PolaronConstants",
    "QuadratureError", "d_m", "d_phase", "displacement_correlators", "f_mqs",
    "phi", "polaron_constants", "psi", "psi_offset", "spectral_density",
    "RunSettings", "Scenario", "ScenarioError", "SystemParams",
    "load_scenario",
    "PairEigens", "SectorEigens", "SectorSpectrum", "degeneracy", "kernel_K",
    "kernel_K_tilde", "pair_eigens", "q_coeffs", "sector_eigens",
    "sector_spectrum", "sector_table", "spin_coherent_coeffs",
    "x_state_coeffs",
    "IntegrationError", "SteadyStateError", "TLSTrajectory", "exact_xi0_P1",
    "gibbs_P1", "integrate", "steady_state",
    "MQSTrajectory", "mqs_reference", "q_correlator_D", "q_correlator_DD",
    "run_mqs", "tau_mqs", "theta_pm",
    "BathOracle", "TruncatedModel", "discretize_cubic_bath", "propagate",
]

"""Variable-growth total variation denoising with primal-dual certificates."""

from .calculus import (ScalarImage, VectorField, boundary_flux_max,
                       default_spacing, divergence, gradient, inner, pairing,
                       pairing_weighted, truncate)
from .certificate import (CertificateReport, CertificateTolerances, certify,
                          duality_gap, young_equality_map)
from .config import ConfigError, RunConfig, build_phi_field, parse_config_file
from .flow import FlowTrajectory, flow_step, run_flow
from .gridio import ParseError, load_image, save_image
from .noise import add_noise, gaussian_field, splitmix64
from .phi import (Condition, ConditionReport, Family, PhiField, check_a0,
                  check_almost_monotone, check_double_phase_holder,
                  check_log_holder, check_strong_holder_a,
                  check_strong_holder_p, conjugate_eval, conjugate_values,
                  numeric_legendre, phi_eval, phi_total, phi_values, recession,
                  recession_values)
from .solver import (SolveResult, SolverConfig, SolverError, power_method_norm,
                     prox_dual, prox_dual_pixel, prox_primal, solve_rof)

__version__ = "0.1.0"

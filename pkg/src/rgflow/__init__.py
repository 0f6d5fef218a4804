"""Renormalization-group numerics for u_t = c(t) u_xx + lambda d(t) F(u)."""

from .errors import *  # noqa: F401,F403
from .problem import (CriticalityClass, NonlinearitySeries, PerturbedPower, ProblemSpec, PurePower,
                      classify_criticality, make_problem, r_of, rescale_coefficients, s_of)
from .spectral import (Grid, GridFunction, SpectralFunction, bq_norm, bump, dilate, dipole, fixed_point,
                       from_spectrum, gaussian, heat_propagate, sample, to_spectrum)
from .solver import (SolverConfig, Trajectory, etd_evolve, evolve_long, linear_solve, nonlinear_rhs,
                     oracle_solve, picard_solve)
from .rg import RGStep, RGTrace, decompose, fixed_point_profile, linear_rg_apply, rg_apply, rg_flow
from .certificates import CertificateBundle, basin_check
from .asymptotics import DecayFit, estimate_A, fit_decay_exponent, log_correction_fit, profile_distance

__version__ = "0.1.0"

"""Decoherence of a quantum oscillator driven by a classical Gaussian field.

The field enters only through the channel width ``sigma(t)``; every
nonclassicality witness and the input-output fidelity are functions of it.
"""

from .fidelity import (BracketError, FidelitySeries, fidelity, fidelity_cat, fidelity_fock, fidelity_series,
                       gamma_star, is_monotone, min_rate)
from .kernels import (OU, POWER_LAW, ChannelParams, KernelSpec, QuadratureError, SigmaTrajectory,
                      UnsupportedClosedForm, has_closed_form, kernel_eval, sigma_and_rate, sigma_asymptotic,
                      sigma_closed, sigma_eval, sigma_quad, sigma_rate, sigma_trajectory)
from .montecarlo import (FactorizationError, PathConfig, PathEnsemble, accumulate_phi, empirical_channel_factor,
                         empirical_sigma, sample_paths, simulate_phi, trapezoid_sigma)
from .nonclassicality import (BIRTH, DEATH, DEPTH, KLYSHKO, VOGEL, WIGNER, Crossing, CriterionReport,
                              ScanWindowWarning, depth_threshold, depth_time_resonant_closed, depth_times,
                              find_crossings, klyshko_B, klyshko_from_probs, klyshko_times, vogel_detection,
                              vogel_times, vogel_witness, wigner_times)
from .special import gamma_half_ratio, hyp2f1_terminating, laguerre, laguerre_table, lambert_w0
from .states import (CAT, FOCK, PhotonDistribution, StateSpec, TruncationError, cat_fock_element, chi_s,
                     evolved_chi, evolved_wigner, mean_photons, photon_dist, photon_probs, wigner_s)

__version__ = "0.1.0"

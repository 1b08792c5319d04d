#!/usr/bin/env python3
"""
Constants for the Wehrl stability toolkit
"""

import os

# Application Version
VERSION = "v1.0.0"

# Config file path - in current working directory (where application is run from)
SCRIPT_DIR = os.getcwd()
CONFIG_FILE = os.path.join(SCRIPT_DIR, 'wehrl-sweep-config.json')

# Numerical tolerances (double precision)
UNIT_TOL = 1e-12          # |eta| = 1, unitarity, Hermitian/trace checks
IDENTITY_TOL = 1e-10      # reproducing property, norm invariance
SUP_TOL = 1e-9            # T <= 1 + SUP_TOL for unit-norm Q
CLAMP_TOL = 1e-12         # |Q|^2 above 1 + CLAMP_TOL is logged before clamping
EIGEN_CLIP_TOL = 1e-12    # negative eigenvalues above -EIGEN_CLIP_TOL are clipped
CONVEXITY_TOL = 1e-12
CONVEXITY_GRID = 1001

# Basis size guard for enumerate_multiindices
MAX_BASIS_SIZE = 2_000_000

# Sampling
DEFAULT_SEED = 0
DEFAULT_SAMPLES = 200_000
CHUNK_SAMPLES = 1 << 16        # samples per RNG substream chunk
EVAL_BLOCK_ELEMENTS = 1 << 22  # rows * basis size per evaluation block
DEFAULT_WORKERS = 4

# Exact rule
DEFAULT_RULE_DEGREE = 16
RULE_MAX_NODES = 4_000_000    # larger smooth-entropy rules fall back to Monte Carlo
SMOOTH_RULE_PADDING = 8       # extra degree for non-polynomial Phi

# sup_modulus multistart
SUP_QUASI_STARTS = 32
SUP_MC_STARTS = 32
SUP_MC_POOL = 4096
SUP_GRAD_TOL = 1e-10
SUP_MAX_ITER = 5000
SUP_STALL_GRAD_TOL = 1e-7

# Fraenkel asymmetry
ASYMMETRY_STARTS = 16
ASYMMETRY_SAMPLES = 50_000

# Isoperimetric threshold defaults (no value is known; configurable)
OMEGA_TILDE_DEFAULT = 0.3
OMEGA_TILDE_D1 = 1.0

# Level sets
PROFILE_GRID_POINTS = 1000
CROSSING_GRID_POINTS = 2000
FD_RELATIVE_BANDWIDTH = 0.01
FD_QUANTILE_FACTOR = 5
FD_QUANTILE_WINDOW = 50
NOISE_SIGMAS = 3.0

# Stability bookkeeping
DEFICIT_SIGMAS = 4.0
KERNEL_DISTANCE = 1e-6
RESOLVED_DISTANCE = 0.05
RATIO_COLLAPSE = 1e-3

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


def default_omega_tilde(d: int) -> float:
    """Default isoperimetric threshold for dimension d"""
    return OMEGA_TILDE_D1 if d == 1 else OMEGA_TILDE_DEFAULT

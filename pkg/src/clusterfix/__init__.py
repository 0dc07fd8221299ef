"""Exact cluster-algebra tools and fixed points of finite cluster modular subgroups."""
from .convexgeom import is_balanced, kernel_basis, zero_in_hull
from .laurent import LaurentPolynomial, expand_cluster, expand_cluster_variable, separation, transport
from .modulargroup import MutationLoop, act_point, close_subgroup, compose, invert, pull_back, validate_loop
from .nielsen import build_dt_filling, build_puncture_filling, find_fixed_point, minimize, orbit
from .objective import LogLaurentFunction, LogPoint, MaxObjective, lg_eval
from .seedcore import ExchangeMatrix, TrackedSeed, find_terminal, g_matrix, mutate_matrix, validate

__version__ = "0.1.0"

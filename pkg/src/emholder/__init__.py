"""Coupled Euler-Maruyama simulation of SDEs over arbitrary time
partitions, with Monte Carlo measurement of the strong error in
temporal-spatial Holder norms and the matching closed-form bounds."""

from .bounds import (BoundParams, bound_four_point, bound_full, bound_moment,
                     bound_spatial_time, bound_strong_error, bound_time_space,
                     gronwall_check, gronwall_lp_check, lyapunov_check,
                     second_order_check)
from .brownian import BrownianLattice, coarsen, sample_lattice, value_at
from .estimators import (ErrorStat, HolderSweepConfig, RateFit, fit_rate,
                         four_point_stat, gauss_hermite_mean, holder_sweep,
                         identity_functional, lipschitz_quotient_mc, lp_moment,
                         mc_euler_functional, two_point_stat)
from .euler import DiscretePath, coupled_endpoints, euler_path, exact_path
from .expr import evaluate as eval_expr
from .expr import parse as parse_expr
from .grids import Partition, make_identity, make_uniform, mesh, round_down
from .models import (CoefficientModel, LyapunovSpec, builtin, default_lyapunov,
                     model_from_json, verify_condition)
from .multigrid import GridFunction, cost, interpolate, multigrid_sum

__version__ = "0.1.0"

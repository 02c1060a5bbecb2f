from .averaging import average_maps, interpolate_maps
from .bounds import (arcsinh_bound, c_hat, compute_c_star, delta_gap, homothety_lip_constants,
                     radial_homothety)
from .config import DELTA, PipelineConfig, Settings, SolverOptions
from .covering import assign_bins, build_net, greedy_net, volume_bound_N
from .errors import *
from .geometry import angle, d_theta, distance, exp_map, geodesic_point, log_map, mink_inner
from .models import *
from .pipeline import (chart_distortion, choose_parameters, local_patch, run_pipeline,
                       verify_two_center_patch)
from .solver import (certify_hull, eval_phi, lipschitz_constant, obtuse_pair, sequential_extension,
                     solve_one_point)

__version__ = '0.1.0'

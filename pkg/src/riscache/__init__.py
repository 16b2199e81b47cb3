"""Joint content placement and hybrid beamforming for RIS-aided edge caching."""

from .active import (KktReport, SdpSolution, extract_rank1, solve_active, solve_sdp,
                     verify_kkt)
from .caching import (backhaul_cost, fppc_placement, optimize_placement, urc_placement,
                      zipf_popularity)
from .estimators import ActiveBeamformer, ContentPlacement, JointOptimizer, PassiveBeamformer
from .exceptions import (ConfigError, InfeasibleError, RankError, RisCacheError, SolverError,
                         StepTooLargeError)
from .harness import ExperimentSpec, ResultRow, emit_csv, parse_config, run_experiment
from .manifold import CostFunction, cg_minimize, project_tangent, retract, transport
from .passive import PenaltyState, bcd_solve, solve_aux, solve_aux_user
from .pipeline import (NetworkCost, OptimizationReport, alternating_optimize, network_cost,
                       scheme_no_ris, scheme_random_phase)
from .scenario import (ChannelSet, ScenarioConfig, Vec3, array_response, compute_sinr,
                       effective_channel, gen_channels, path_loss, place_users)

__version__ = "0.1.0"

"""Free and wired minimal spanning forests on finite approximations of transitive graphs."""

__version__ = "0.1.0"

from .graphs import (Graph, contract_boundary, gen_cycle, gen_grid, gen_tree_ball,
                     gen_tree_cycle_product, parse_family)
from .labels import (Labeling, relabel_monotone, sample_labels, transform_scale_down,
                     transform_shift_up)
from .msf import (Forest, brute_force_msf, cycle_max_oracle, invasion_tree, mst_kruskal,
                  perturbation_delta, wired_msf)
from .percolation import estimate_pc, threshold_view, uniqueness_proxy
from .ends import detect_lonely, end_count_proxy, wired_subtree_count
from .coupling import CouplingScenario, build_scenario, find_scenario, replay_coupling
from .mtp import TransportRule, mtp_check

__all__ = [
    "Graph", "contract_boundary", "gen_cycle", "gen_grid", "gen_tree_ball",
    "gen_tree_cycle_product", "parse_family",
    "Labeling", "relabel_monotone", "sample_labels", "transform_scale_down", "transform_shift_up",
    "Forest", "brute_force_msf", "cycle_max_oracle", "invasion_tree", "mst_kruskal",
    "perturbation_delta", "wired_msf",
    "estimate_pc", "threshold_view", "uniqueness_proxy",
    "detect_lonely", "end_count_proxy", "wired_subtree_count",
    "CouplingScenario", "build_scenario", "find_scenario", "replay_coupling",
    "TransportRule", "mtp_check",
]

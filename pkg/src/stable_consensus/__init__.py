"""Aggregate fluctuations of consensus networks driven by alpha-stable noise."""

from .graph import (DisconnectedGraphError, Graph, GraphError, Spectrum, SpectrumError,
                    build_laplacian, complete_graph, cycle_graph, graph_spectrum,
                    is_complete_spectrum, parse_edge_list, path_graph, random_connected_graph,
                    read_edge_list, spectrum, star_graph, write_edge_list)
from .stable import StableParams, char_fn, moment_constant, sample, scale_by, shift, sum_indep
from .kernel import G_alpha, SpectralKernel, lambda_table, sigma_ij_alpha
from .fluctuation import (FluctuationReport, NoiseSpec, monotonicity_profile, p_moment,
                          sigma_alpha_complete, sigma_alpha_total, steady_state_params,
                          transient_params_complete)
from .bounds import (BoundReport, bound_claims, bound_near2, bound_theorem1,
                     tightness_report)
from .simulate import SimConfig, TrajectoryEnsemble, estimate_scale, run
from .design import (DesignResult, best_addition, best_removal, best_reweighting,
                     crossover_scan)
from .datasets import bundled_graph, resolve_graph

__version__ = "0.1.0"

"""Numerical laboratory for pure-imaginary-zero properties of moment
generating functions: exact spin-model laws on finite graphs, complex-zero
location and classification, the 1d chain scaling limit, and Monte Carlo
analysis of complex Gaussian multiplicative chaos."""

__version__ = "0.1.0"

from .errors import BudgetExceededError, NumericalError
from .graphs import (FiniteGraph, SubdividedGraph, build_graph, graph_from_json,
                     path_graph, single_edge_graph, subdivide)
from .gibbs import (DiscretizedDistribution, ModelSpec, circle_grid,
                    discretized_gaussian, distribution_from_atoms,
                    kolmogorov_distance, observable_distribution,
                    periodized_gaussian, rademacher,
                    transfer_chain_distribution, xy_edge_weight)
from .zeros import (EntireMGF, HadamardFit, Rectangle, ZeroInfo, ZeroReport,
                    count_zeros_rectangle, default_region, hadamard_fit,
                    locate_zeros, mgf_derivative, mgf_eval, mgf_eval_scaled,
                    refinement_stable_report)
from .lyclass import (ClassVerdict, TailProfile, WeakLimitReport,
                      check_symmetry, classify, tail_exponent,
                      weak_limit_harness)
from .chain import (CircleKernel, chain_vs_heat, dirichlet_ratio,
                    heat_kernel_circle, kernel_power, laplace_normalization,
                    make_xy_kernel)
from .gmc import (CoulombConfig, DiscreteGmcField, Domain, GrowthFit,
                  LatticeDomain, MomentEstimate, TailPrediction, UNIT_DISK,
                  bin_distribution, coulomb_weight, dgff_sample,
                  gmc_moment_formula, lambda_weights, lattice_green,
                  load_field_snapshot, m_statistic, mc_moment,
                  moment_growth_fit, sample_gmc_field, sample_m_statistics,
                  save_field_snapshot, tail_prediction)

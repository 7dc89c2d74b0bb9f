"""conelab: numerical experiments for directional square functions,
plank decompositions and wave-packet extremizers on periodic grids."""

from .errors import (BandwidthError, ContractError, DomainError,
                     ReplacementError, SizingError)
from .grid import (Field, GridSpec, forward_transform, inner_product,
                   inverse_transform, load_field, lp_norm, save_field)
from .geometry import (Cap, ConicalTube, Plank, Polyhedron, Tiling,
                       assign_by_angle, check_one_dimensional, cone_planks,
                       dual_box, dump_geometry, load_geometry,
                       minkowski_disjointness, omega_cover, omega_s_cover,
                       planks_intersect, pyramid_polyhedra, refine_planks,
                       sector_polyhedra, separated_caps, u_tiling)
from .bumps import (BumpProfile, Multiplier, adapted_bump, annulus_partition,
                    cap_cutoff, decaying_indicator, replace_cutoff)
from .operators import (CheckResult, MaximalConfig, ProjectionFamily,
                        apply_projection, conical_cap_family,
                        cordoba_fefferman_check, directional_maximal,
                        directional_s_maximal, littlewood_paley_split,
                        plank_family, plank_lp_check, sharp_polyhedron_family,
                        strong_maximal, weighted_l2_check)
from .squarefn import (HighLowSplit, SquareFunction, assemble_h,
                       high_low_split, kakeya_decomposition_check,
                       local_square_norms, reverse_square_check, square_field,
                       square_ratio)
from .packets import (Extremizer, ExtremizerConfig, WavePacketSpec,
                      build_extremizer, dilation_trick, overlap_ratio,
                      packet_concentration, synthesize_packet)
from .overlap import (CountingResult, SamplerConfig, TubeFamily, counting_lp,
                      focal_overlap, pairwise_disjoint)
from .kernels import BACKEND
from .sweeps import (ExperimentConfig, SweepResult, fit_exponent, report,
                     run_sweep)
from .acceptance import CriterionResult, run_acceptance

__version__ = "0.1.0"

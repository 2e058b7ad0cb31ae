"""tilelab: exact arithmetic for translational tilings of Z_M."""

from .zm_core import (ZmContext, Residue, TileSet, GridSpec, factorize,
                      prime_factorization, euler_phi, radical_quotient,
                      gcd_divisor, realize_grid, grid, line, plane, fiber)
from .cyclotomic import (IntPoly, CycloProfile, cyclotomic_poly, phi_at_one,
                         mask_poly, divides_mask, cyclo_profile, check_T1,
                         check_T2)
from .tiling import (Tiling, IsometryTable, verify_direct, div_set,
                     verify_sands, verify_cyclotomic, dilate,
                     tijdeman_orbit_check, plane_exchange,
                     is_divisor_isometry, dilation_stabilizer,
                     simultaneous_dilation, find_complements,
                     iter_complements, enumerate_tilings, iter_tilings,
                     sample_tilings, tiling_to_json, tiling_from_json)
from .structure import (DivisorCounts, divisor_counts, box_product,
                        box_product_all_ones, dilation_count_identity,
                        saturating_pair_sets, saturating_set,
                        satset_dilation_equiv)
from .splitting import (Parity, SigmaPair, SplitReport, FiberedGridProfile,
                        GridStratification, sigma_sets, fiber_parity,
                        split_report, check_translate_splitting,
                        check_disjoint_sigma, check_local_distribution,
                        check_aunif, plane_consistency, cross_direction_check,
                        fibered_grid_profile, check_fiber_basic,
                        grid_stratification, consistency3_check,
                        consistent_splitting_check)
from .reduction import (SlabVerdict, SlabStep, PrimeRemovalStep, BaseCase,
                        T2Certificate, slab_subset, project_tile,
                        slab_cond_i, slab_cond_ii, slab_cond_iii,
                        slab_equivalence_check, splittingslab_equiv_check,
                        slabcor_check, plane_bound_check, blowbound_check,
                        prime_power_dilate, prove_t2_largeprime,
                        replay_certificate, certificate_to_json)

__version__ = "0.1.0"

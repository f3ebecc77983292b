"""Polar code toolkit: construction, SC/SCL/SCAL/AED decoding, Monte-Carlo evaluation."""

from .autom import (Automorphism, InsufficientClassesError, PermutationSet,
                    apply_inv_perm, apply_perm, bit_level_transposition,
                    block_profile, identity_automorphism, is_automorphism,
                    make_automorphism, perms_from_dict, perms_to_dict,
                    sample_blta, select_permutations)
from .channel import ChannelParams, add_noise, llr, modulate
from .code import (PolarCode, build_code, code_from_dict, code_to_dict, encode,
                   is_codeword, partial_order_leq, polar_transform)
from .decode import (AedEnsemble, BatchResult, Candidate, DecodeOutcome,
                     DecoderConfig, ListEngine, aed_decode,
                     channel_mismatch_metric, f_minsum, g_minsum, h_combine,
                     quantize_llr, sc_decode, scal_decode, scl_decode)
from .sim import (DEFAULT_SEED, SimConfig, SimResult, PointResult, analyze,
                  final_list_csv, final_list_stats, ml_bounds,
                  perm_evolution_csv, permutation_evolution, results_csv,
                  run_fer, wilson_interval)

__version__ = "0.1.0"

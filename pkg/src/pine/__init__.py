"""PINE: two-verifier zero-knowledge verification of Euclidean norm bounds.

A client secret-shares an integer vector between two non-colluding
verifiers and proves, in zero knowledge, that its squared L2 norm is at
most a public bound -- exactly, over the integers.  The package provides
the statistical-ZK protocol, a differentially-private variant, a
distributed Fiat-Shamir transform for one-shot proofs, an in-process
three-party simulation harness, a communication cost model, a FastAPI
service, and a CLI that fronts the service.
"""

__version__ = "0.1.0"

from .field import (FIELD64, FIELD128, GOLDILOCKS_PRIME, PRIME_128, FieldError,
                    FieldSpec, PrimeField, bit_decompose, bit_recompose,
                    get_field)
from .sharing import (Share, ShareVector, linear_equality_check, local_linear,
                      reconstruct, reconstruct_vector, share, share_vector)
from .rangecheck import (RangeClaim, RangeProof, prove_range,
                         residual_constraints, verify_range_linear)
from .wraparound import (WraparoundAbort, WraparoundParams, WraparoundProof,
                         compute_sk_share, err_complete, err_complete_log2,
                         err_sound, err_sound_log2, prove_wraparound,
                         real_wraparound_view, sample_challenge,
                         simulate_wraparound_view, success_count_check)
from .quadratic import (InnerProductProof, QuadraticConstraint, QuadraticSystem,
                        VerifierExchange, combine_constraints,
                        local_matrix_apply, prove_inner_product,
                        run_quadratic_protocol, verify_inner_product)
from .fiat_shamir import (FsConfig, NiProof, derive_round_challenge,
                          expand_field_elements, expand_sign_matrix)
from .norm import (DEFAULT_ALPHA, DEFAULT_ETA, InfeasibleParamsError,
                   NormParams, constraint_catalog, message_sizes, ni_prove,
                   ni_verify, run_fs, run_interactive, select_params)
from .dzk import (DzkParams, DzkSessionParams, NoisyShares, c_factor,
                  dzk_params, dzk_share, sample_truncated_gaussian,
                  select_quad_reps)
from .harness import (MonteCarloResult, Outcome, SessionConfig, Transcript,
                      monte_carlo, run_session, wilson_interval,
                      window_pass_rate)
from .costs import CostReport, cost, intro_table
from .vectors import VectorFile, encode_unit_floats, read_vector_file, write_vector_file

__all__ = [name for name in dir() if not name.startswith("_")]

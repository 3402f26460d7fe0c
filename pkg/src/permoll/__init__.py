"""The (1+(lambda,lambda)) genetic algorithm on permutations.

Library layout:

* :mod:`permoll.core` -- permutations and the Hamming fitness ``Ham_p``
* :mod:`permoll.mutation` -- exchange/reverse/jump mutations and sampling
* :mod:`permoll.algorithms` -- RLS, (1+1) EA, (1+(lambda,lambda)) GA, lambda policies
* :mod:`permoll.analysis` -- good-iteration bounds and their Monte-Carlo check
* :mod:`permoll.harness` -- sweeps, landscapes and verification to CSV
"""

from .algorithms import (
    LambdaPolicy,
    OllgaIterationParams,
    RunResult,
    lambda_policy_update,
    lambda_schedule_theoretical,
    ollga_iteration,
    ollga_run,
    opl_ea_run,
    rls_run,
)
from .core import HamProblem, Permutation, ham_delta_exchange, ham_evaluate, random_permutation
from .mutation import (
    ElementaryMutation,
    MutationFamily,
    MutationList,
    apply_mutation,
    apply_mutation_list,
    decode,
    encode,
    mutation_space_size,
    sample_crossover_size,
    sample_mutation_count,
    sample_mutation_list,
    subsample_preserving_order,
)
from .rng import RandomSource, derive_seed

__version__ = "0.1.0"

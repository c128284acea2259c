"""OLE correlation generation over group algebras F_q[G].

Submodules:

* :mod:`gapcg.field`         -- prime-field arithmetic and primitive roots
* :mod:`gapcg.group_algebra` -- F_q[G] elements, products, transforms, folding
* :mod:`gapcg.prg`           -- the fixed-key length-doubling PRG
* :mod:`gapcg.dpf`           -- GGM-tree point-function sharing (and sums)
* :mod:`gapcg.noise`         -- sparse noise samplers
* :mod:`gapcg.pcg`           -- correlated seed generation and silent expansion
* :mod:`gapcg.analysis`      -- attack-cost estimator and bias machinery
* :mod:`gapcg.mpc`           -- circuits, trusted dealer, GMW online phases
* :mod:`gapcg.cli`           -- the ``gapcg`` command-line tool
"""

__version__ = "0.1.0"

from .field import FieldElement, FieldSpec, field_inv, field_pow, primitive_root
from .group_algebra import (
    AlgebraElement,
    GroupSpec,
    SparseElement,
    dft_forward,
    dft_inverse,
    fold,
    group_mul_indices,
    inner_product,
    involution_bar,
    mul,
    mul_fft,
    mul_naive,
    quotient_map,
)
from .pcg import (
    OleOutput,
    PcgParams,
    PcgSeed,
    ProgramInput,
    ScalarOleBatch,
    TripleShares,
    crt_split,
    nparty_triples,
    ole_to_triples,
    pcg_expand,
    pcg_expand_with_stats,
    pcg_gen,
    phi,
    rsample,
    verify_ole,
)
from .analysis import (
    AttackCostReport,
    bias_bound,
    doom_adjust,
    empirical_bias,
    expected_fold_weight,
    fold_weight_recurrence,
    isd_lower_bound,
    prange_cost,
    security_estimate,
    seed_size_bits,
    stat_decoding_cost,
)

__all__ = [
    "FieldElement",
    "FieldSpec",
    "field_inv",
    "field_pow",
    "primitive_root",
    "AlgebraElement",
    "GroupSpec",
    "SparseElement",
    "dft_forward",
    "dft_inverse",
    "fold",
    "group_mul_indices",
    "inner_product",
    "involution_bar",
    "mul",
    "mul_fft",
    "mul_naive",
    "quotient_map",
    "OleOutput",
    "PcgParams",
    "PcgSeed",
    "ProgramInput",
    "ScalarOleBatch",
    "TripleShares",
    "crt_split",
    "nparty_triples",
    "ole_to_triples",
    "pcg_expand",
    "pcg_expand_with_stats",
    "pcg_gen",
    "phi",
    "rsample",
    "verify_ole",
    "AttackCostReport",
    "bias_bound",
    "doom_adjust",
    "empirical_bias",
    "expected_fold_weight",
    "fold_weight_recurrence",
    "isd_lower_bound",
    "prange_cost",
    "security_estimate",
    "seed_size_bits",
    "stat_decoding_cost",
]

"""Periodic fields on the unit torus and spectral operator calculus."""
from .fields import (
    FieldFormatError,
    GridSpec,
    PeriodicField,
    SpectralField,
    atomic_write,
    constant_field,
    decode_afld,
    dft,
    encode_afld,
    idft,
    read_afld,
    sample_function,
    write_afld,
)
from .spectral import (
    FreeSample,
    NotAFree,
    RankDrop,
    afree_residual,
    apply_operator,
    band_box,
    derivative,
    derivative_multiplier,
    gen_afree,
    gen_afree_sample,
    lp_norm,
    multi_indices,
    multiplier,
    potential_residuals,
    random_potential,
    sobolev_bound_experiment,
    sobolev_norm,
    solve_potential,
    solve_potential_spectral,
)

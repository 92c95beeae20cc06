"""Convex constraints, integrands and the variational experiments."""
from .convex import (
    ConvexSet,
    NotInSet,
    ProjectCheck,
    identity_vector,
    project_check,
    shrink_to_interior,
    sym_decode,
    sym_dim,
    sym_encode,
)
from .cutoff import CutoffResult, CutoffSpec, cutoff_construct, eval_series
from .experiments import (
    JensenResult,
    NotPSD,
    ProbeReport,
    SemicontinuityReport,
    dilate,
    dpt_generate,
    dpt_triple,
    jensen_batch,
    jensen_check,
    kaq_probe,
    semicontinuity_experiment,
)
from .functionals import EmpiricalMeasure, Functional, young_moment

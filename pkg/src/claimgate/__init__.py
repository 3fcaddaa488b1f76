"""Posterior probability that a reported model outperformance claim is false."""

__version__ = "0.1.0"

from .classification import (
    ClassificationComparison,
    clamp_congruence,
    congruence_bounds,
    pfc_classification,
    pfc_classification_exact,
    pfc_classification_oracle,
)
from .congruence import (
    PairedClassificationOutcomes,
    PairedDscVectors,
    congruence_classification,
    congruence_quantiles,
    congruence_segmentation,
)
from .corpus import (
    CorpusRecord,
    analyze_corpus,
    corpus_pfc,
    filter_eligible,
    ingest_corpus,
    summarize,
    threshold_curve,
)
from .kernels import DirichletParams, RngStream, ln_gamma, reg_inc_beta, sample_dirichlet, student_t_cdf
from .planner import PlanningGrid, band, build_grid, required_n
from .segmentation import (
    SdImputationModel,
    SegmentationComparison,
    impute_sd,
    pfc_segmentation,
    pfc_segmentation_mc_check,
)
from .types import CONGRUENCE_PRESETS, CongruenceAssumption, PfcEstimate, preset

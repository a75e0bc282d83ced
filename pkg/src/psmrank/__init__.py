"""Transferability scoring and ranking for pre-trained speech model candidates.

Scores candidate models or layers without fine-tuning: maximum-evidence
(LogME) scores over temporally aligned frame/label pairs, sliced Wasserstein
distances between latent distributions, and a t-SNE median-distance baseline,
validated against ground truth with Spearman's rank correlation.
"""

from .align import (
    FrameAlignment,
    brute_force_align,
    ctc_total_log_prob,
    enumerate_alignments,
    extend_labels,
    frames_to_samples,
    viterbi_align,
)
from .common import TransferScore
from .ingest import (
    Dataset,
    FeatureMatrix,
    LabelData,
    Manifest,
    PosteriorGrid,
    assemble_dataset,
    load_manifest,
    read_array,
    uniform_grid,
    write_array,
)
from .logme import (
    EvidenceState,
    LogMEScore,
    evidence,
    logme_classification,
    logme_ctc,
    maximize_evidence,
)
from .rankeval import (
    CorrelationResult,
    RankingReport,
    RankVector,
    build_report,
    exact_permutation_p,
    incomplete_beta,
    spearman,
    to_ranks,
)
from .swd import SwdConfig, sliced_w1, swd_score, w1_1d
from .tsne import TsneConfig, perplexity_calibration, tsne_embed, tsne_score

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "CorrelationResult",
    "EvidenceState",
    "FeatureMatrix",
    "FrameAlignment",
    "LabelData",
    "LogMEScore",
    "Manifest",
    "PosteriorGrid",
    "RankVector",
    "RankingReport",
    "SwdConfig",
    "TransferScore",
    "TsneConfig",
    "assemble_dataset",
    "brute_force_align",
    "build_report",
    "ctc_total_log_prob",
    "enumerate_alignments",
    "evidence",
    "exact_permutation_p",
    "extend_labels",
    "frames_to_samples",
    "incomplete_beta",
    "load_manifest",
    "logme_classification",
    "logme_ctc",
    "maximize_evidence",
    "perplexity_calibration",
    "read_array",
    "sliced_w1",
    "spearman",
    "swd_score",
    "to_ranks",
    "tsne_embed",
    "tsne_score",
    "uniform_grid",
    "viterbi_align",
    "w1_1d",
    "write_array",
]

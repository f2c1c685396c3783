"""Masked-marginal log-odds scoring of protein variants.

A variant is scored by masking its mutated positions, asking a likelihood
backend for the residue distribution at each masked position, and summing
log P(wildtype residue) - log P(mutant residue). Higher scores mean the
variant is less likely under the model, read as more likely pathogenic.
The package also ships the clinical evaluation harness: aggregate ROC/AUC,
per-gene AUC and label-weighted mean AUC.
"""

__version__ = "0.1.0"

from .alphabet import CANONICAL, MASK, UNKNOWN
from .backend import (
    Backend,
    BackendDescriptor,
    MarginalDistribution,
    MaskedQuery,
    ProfileBackend,
    RemoteBackend,
    train_profile,
)
from .errors import VelmError
from .evaluate import (
    AnnotatedRecord,
    GeneAuc,
    Histogram,
    MaucRow,
    RocCurve,
    ScoredLabel,
    compare_methods,
    histogram,
    mean_auc,
    per_gene_auc,
    roc_auc,
)
from .ingest import (
    ClinicalLabel,
    EvalFilterConfig,
    LabeledVariant,
    apply_filters,
    load_labeled_tsv,
)
from .parser import format_variant, load_fasta, parse_fasta, parse_variant
from .scorer import (
    DEFAULT_FLOOR,
    MarginalCache,
    VariantScore,
    score_batch,
    score_variant,
)
from .sequence import (
    MaskedSequence,
    ProteinSequence,
    Substitution,
    Variant,
    apply_variant,
    bind_variant,
    derive_variant,
    invert_variant,
    mask_at,
    mutation_set,
)

__all__ = [
    "__version__",
    "CANONICAL",
    "MASK",
    "UNKNOWN",
    "Backend",
    "BackendDescriptor",
    "MarginalDistribution",
    "MaskedQuery",
    "ProfileBackend",
    "RemoteBackend",
    "train_profile",
    "VelmError",
    "AnnotatedRecord",
    "GeneAuc",
    "Histogram",
    "MaucRow",
    "RocCurve",
    "ScoredLabel",
    "compare_methods",
    "histogram",
    "mean_auc",
    "per_gene_auc",
    "roc_auc",
    "ClinicalLabel",
    "EvalFilterConfig",
    "LabeledVariant",
    "apply_filters",
    "load_labeled_tsv",
    "format_variant",
    "load_fasta",
    "parse_fasta",
    "parse_variant",
    "DEFAULT_FLOOR",
    "MarginalCache",
    "VariantScore",
    "score_batch",
    "score_variant",
    "MaskedSequence",
    "ProteinSequence",
    "Substitution",
    "Variant",
    "apply_variant",
    "bind_variant",
    "derive_variant",
    "invert_variant",
    "mask_at",
    "mutation_set",
]

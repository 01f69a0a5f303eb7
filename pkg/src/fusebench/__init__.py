"""fusebench: multibiometric score-level fusion and verification metrics.

Turns per-trait feature vectors (face, periocular, iris, nose, eyebrow)
into cosine match scores over a subject-disjoint genuine/impostor
protocol, fuses them with simplex-constrained weighted sums, and computes
EER and FRR@FAR with exact, documented semantics.
"""

from .errors import (ConfigError, DataIntegrityError, FusebenchError,
                     GeometryError, IngestError, ProtocolError)
from .fusion import (FusionWeights, SweepResult, concat_fuse, enumerate_simplex,
                     evaluate_fused, fuse_pair, fuse_tables, sweep)
from .matching import ScoreTable, cosine, iris_score, score_table
from .metrics import (MetricsReport, OperatingPoint, RocCurve, eer,
                      evaluate_scores, frr_at_far, roc)
from .model import (CANONICAL_TRAITS, EvalProtocol, FeatureRecord, IrisRecord,
                    SampleKey, SubjectRange, Trait, build_protocol,
                    enumerate_pairs, split_by_subject)
from .synthdata import EmbeddingModel, ScoreModel, gen_embeddings, gen_scores

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

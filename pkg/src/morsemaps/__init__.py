"""Statistical summary maps for ensembles of 2D gradient-flow decompositions."""

from .grid import (
    CriticalKind,
    CriticalPoint,
    GridTopology,
    ScalarGrid,
    classify,
    classify_all,
    critical_points,
)
from .segmentation import Segmentation, cell_boundary, segment, steepest_neighbor
from .persistence import (
    PersistenceHierarchy,
    PersistencePair,
    cancellation_sequence,
    min_feature_persistence,
    simplify_to,
    sublevel_pairs,
    superlevel_pairs,
)
from .ensemble import (
    Ensemble,
    NoiseSpec,
    ackley,
    bound_fields,
    contaminated_ensemble,
    four_gaussians,
    gaussian_mixture,
    himmelblau,
    load_ensemble,
    mean_field,
    perturb,
    save_ensemble,
)
from .mandatory import (
    MandatoryMaximum,
    cluster_maxima_fallback,
    label_member_maxima,
    mandatory_maxima,
    nearest_label_map,
)
from .summary import (
    ProbabilisticMap,
    SurvivalMap,
    agreement_cells,
    certainty_partition,
    expected_boundaries,
    expected_boundary,
    member_label_field,
    probabilistic_map,
    quantize,
    query,
    survival_map,
    survival_member,
)

__version__ = "0.1.0"

__all__ = [
    "CriticalKind",
    "CriticalPoint",
    "GridTopology",
    "ScalarGrid",
    "classify",
    "classify_all",
    "critical_points",
    "Segmentation",
    "cell_boundary",
    "segment",
    "steepest_neighbor",
    "PersistenceHierarchy",
    "PersistencePair",
    "cancellation_sequence",
    "min_feature_persistence",
    "simplify_to",
    "sublevel_pairs",
    "superlevel_pairs",
    "Ensemble",
    "NoiseSpec",
    "ackley",
    "bound_fields",
    "contaminated_ensemble",
    "four_gaussians",
    "gaussian_mixture",
    "himmelblau",
    "load_ensemble",
    "mean_field",
    "perturb",
    "save_ensemble",
    "MandatoryMaximum",
    "cluster_maxima_fallback",
    "label_member_maxima",
    "mandatory_maxima",
    "nearest_label_map",
    "ProbabilisticMap",
    "SurvivalMap",
    "agreement_cells",
    "certainty_partition",
    "expected_boundaries",
    "expected_boundary",
    "member_label_field",
    "probabilistic_map",
    "quantize",
    "query",
    "survival_map",
    "survival_member",
]

from advdrop.services.evaluation.metrics import (
    accuracy,
    confusion_matrix,
    normalize_rows,
    rmse,
    top_k_accuracy,
)
from advdrop.services.evaluation.statistics import (
    effectiveness_ratios,
    mean_std,
    normalize_ratios,
    t_statistic,
    t_test,
)
from advdrop.services.evaluation.uncertainty import (
    UncertaintyReport,
    UncertaintySummary,
    auroc,
    mc_infer,
    uncertainty_eval,
)

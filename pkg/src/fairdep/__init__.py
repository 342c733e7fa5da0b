"""fairdep: group-fairness evaluation and bias mitigation for binary
depression-style classifiers.

The toolkit computes per-group confusion metrics, the four fairness ratio
metrics with extended-ratio semantics, and five bias mitigation strategies
(mixup balancing, massaging, reweighing, fairness-regularised fine-tuning
and reject option classification) plus the sharpened two-stage variant, on
synthetic or CSV-supplied data.
"""

from .data import Dataset, Example, MAJORITY, MINORITY, SplitSpec, split, validate
from .features import (
    ALPHA_BAND,
    Band,
    MultiChannelSignal,
    PsdEstimate,
    asymmetry_matrix,
    band_power_features,
    band_relative_power,
    minmax_normalize,
    segment,
    welch_psd,
    zscore,
)
from .harness import (
    ExperimentConfig,
    HarnessError,
    ResultsTable,
    load_csv,
    load_experiment_config,
    render_table,
    run_experiment,
    write_csv,
)
from .inprocess import (
    RegPenaltyConfig,
    ReweighTable,
    apply_reweighing,
    reg_penalty,
    reg_plus_pipeline,
    regularised_loss,
    reweigh_table,
    soft_rates,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .metrics import (
    ConfusionCounts,
    ExtendedRatio,
    FairnessReport,
    GroupedConfusion,
    PerformanceReport,
    band_check,
    extended_ratio,
    fairness,
    grouped_confusion,
    hard_predictions,
    performance,
    report_record,
)
from .model import (
    Architecture,
    LossSpec,
    ModelParams,
    TrainConfig,
    batch_loss,
    cross_entropy,
    fine_tune,
    forward,
    load_params,
    predict_proba,
    save_params,
    sharpen_probabilities,
    train,
)
from .postprocess import RocConfig, roc_adjust
from .preprocess import (
    MassagingPlan,
    MixupConfig,
    apply_massaging,
    discrimination,
    massaging_plan,
    mixup_balance,
)
from .synth import SynthConfig, biased_preset, generate, preset_config

__version__ = "0.1.0"

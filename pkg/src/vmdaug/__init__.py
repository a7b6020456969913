"""VMD-based data augmentation and damping-based stability classification
for power-system angle ringdowns."""

from .core import (
    DEFAULT_FS,
    AngleMatrix,
    Label,
    LabeledDataset,
    LabeledSample,
    Signal,
    load_dataset,
    load_signals,
    save_dataset,
    save_signals,
    split_dataset,
    stratified_subset,
)
from .errors import (
    ArgumentError,
    DataError,
    FitError,
    FormatError,
    InvariantError,
    LabelError,
    TrainingError,
    VmdaugError,
)
from .evaluation import (
    ConfusionCounts,
    TstrTrtsTable,
    accuracy,
    confusion,
    data_size_sweep,
    evaluate_model,
    precision,
    recall,
    tstr_trts,
)
from .kmmd import (
    KernelConfig,
    MmdReport,
    asymptotic_bound,
    mmd_biased,
    mmd_unbiased_sq,
    rademacher_bound,
    rbf_kernel,
    two_sample_test,
)
from .preprocess import (
    CoaWeights,
    deviation,
    detrend_dataset,
    detrend_linear,
    preprocess_pipeline,
    subtract_center_of_angle,
    unwrap,
)
from .prony import DampedMode, LabelConfig, damping_ratio, label_sample, largest_energy_imf, prony_fit
from .synth import ModeSpec, RingdownSpec, gen_dataset, gen_ringdown
from .vmd import ModeSet, VmdConfig, augment, augment_dataset, decompose, reconstruct

__version__ = "0.1.0"

"""Production-state-aware industrial network traffic modeling.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from ._core import (  # noqa: F401
    DataError,
    EvaluateConfig,
    FitSmpConfig,
    GenerateConfig,
    IngestConfig,
    NumericalError,
    ProductionState,
    SynthDataConfig,
    TrainConfig,
    build_histogram,
    evaluate,
    fit_smp,
    generate,
    ingest,
    kl_divergence,
    quantize_payload,
    sample_model,
    synth_data,
    train,
)

__version__ = "0.1.0"

"""spectrain: spectral analysis of neural-network training dynamics.

Treats training as a discrete dynamical system on weight space: trains small
networks with snapshot logging, extracts Koopman eigenvalues/modes via DMD to
diagnose convergence, prunes weights from the KMD reconstruction, derives
multiscale model depth from signal spectra, fits hierarchical SVR cascades,
and trains with negative-Sobolev losses for noise rejection.
"""

from .errors import (
    DegenerateData,
    FormatError,
    InvalidInput,
    NumericalFailure,
    SpectrainError,
)

__version__ = "0.1.0"

__all__ = [
    "SpectrainError",
    "InvalidInput",
    "NumericalFailure",
    "DegenerateData",
    "FormatError",
    "__version__",
]

"""Simulation and analysis of spin-orbit hybrid entanglement experiments with photons."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    InsufficientData,
    MissingSetting,
    OamOverflow,
    SettingMismatch,
    ZeroCounts,
    ZeroNorm,
)
from .hilbert import (
    ModeLabel,
    SinglePhotonState,
    Spin,
    TwoPhotonState,
    fidelity,
    inner_product,
    normalize,
    project_arm,
    tensor,
)

"""End-to-end pipelines: heralded single photon, hybrid-entangled pair, coherent beam.

Each pipeline yields the ideal detection probability for analyzer settings
(theta, chi); ``simulate_counts`` turns those into Poisson coincidence counts
(or noiseless power readings for the coherent beam).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .elements import (
    ElementOp,
    apply,
    apply_arm,
    build_element,
    mirror,
    pol_analyzer,
    sector_hologram_analyzer,
    smf_coupler,
)
from .errors import ConfigError
from .hilbert import (
    DEFAULT_M_MAX,
    INV_SQRT2,
    ModeLabel,
    SinglePhotonState,
    Spin,
    TwoPhotonState,
    h_ket,
    normalize,
    polarization_amplitudes,
)
from .source import SchmidtSpectrum, postselect_pm2_pair

PEAK_PROBABILITY = 0.5
MEAN_PROBABILITY = 0.25

DEFAULT_STAGES: tuple[Mapping, ...] = ({"type": "qplate", "q": 1},)


class Mode(str, Enum):
    SINGLE_PHOTON = "SinglePhoton"
    TWO_PHOTON = "TwoPhoton"
    CLASSICAL = "Classical"


@dataclass(frozen=True)
class CountRecord:
    theta: float
    chi: float
    counts: float
    exposure: float = 1.0

    def __post_init__(self):
        if self.counts < 0:
            raise ValueError(f"negative counts {self.counts} at theta={self.theta}, chi={self.chi}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated run. ``pair_rate`` is the mean count rate at the fringe peak for V = 1."""

    mode: Mode = Mode.SINGLE_PHOTON
    theta_list: tuple[float, ...] = tuple(k * math.pi / 4 for k in range(4))
    chi_list: tuple[float, ...] = tuple(k * math.pi / 32 for k in range(16))
    pair_rate: float = 1000.0
    exposure: float = 1.0
    visibility: float = 1.0
    accidental_rate: float = 0.0
    seed: int = 0
    schmidt: SchmidtSpectrum = field(default_factory=SchmidtSpectrum.default)
    power_noise: float = 0.0
    stages: tuple[Mapping, ...] = DEFAULT_STAGES

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "theta_list", tuple(float(t) for t in self.theta_list))
        object.__setattr__(self, "chi_list", tuple(float(c) for c in self.chi_list))
        object.__setattr__(self, "stages", tuple(dict(s) for s in self.stages))
        self.validate()

    def validate(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ConfigError(f"must lie in [0, 1], got {self.visibility}", key="visibility")
        for key in ("pair_rate", "accidental_rate", "power_noise"):
            value = getattr(self, key)
            if not (value >= 0.0 and math.isfinite(value)):
                raise ConfigError(f"must be finite and >= 0, got {value}", key=key)
        if not (self.exposure > 0.0 and math.isfinite(self.exposure)):
            raise ConfigError(f"must be > 0, got {self.exposure}", key="exposure_s")
        if not self.theta_list:
            raise ConfigError("empty angle list", key="theta")
        if not self.chi_list:
            raise ConfigError("empty angle list", key="chi")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ConfigError(f"must be an integer in [0, 2^64), got {self.seed!r}", key="seed")
        for st in self.stages:
            build_element(st)

    def elements(self) -> tuple[ElementOp, ...]:
        return tuple(build_element(st) for st in self.stages)


def _stage_key(stages) -> tuple:
    return tuple(tuple(sorted(st.items())) for st in stages)


# ----------------------------------------------------------- single photon

@lru_cache(maxsize=64)
def _prepared_single(stage_key: tuple) -> SinglePhotonState:
    state = h_ket(0, DEFAULT_M_MAX)
    for st in stage_key:
        state = apply(build_element(dict(st)), state)
    return state


def prepared_single_state(stages: Sequence[Mapping] = DEFAULT_STAGES) -> SinglePhotonState:
    """Heralded |H,0> after the preparation stages (a q-plate by default)."""
    return _prepared_single(_stage_key(stages))


def measure_single(state: SinglePhotonState, theta: float, chi: float) -> float:
    """Transmission through polarization analyzer, sector hologram and fiber."""
    out = apply(pol_analyzer(theta), state)
    out = apply(sector_hologram_analyzer(chi), out)
    out = apply(smf_coupler(), out)
    return out.norm_sq()


def probability_single(theta: float, chi: float, stages: Sequence[Mapping] = DEFAULT_STAGES) -> float:
    """Heralded detection probability; 0.5*cos^2(theta - 2 chi) for the default q-plate."""
    return measure_single(prepared_single_state(stages), theta, chi)


def classical_power_fraction(theta: float, chi: float, stages: Sequence[Mapping] = DEFAULT_STAGES) -> float:
    # a coherent beam in the same mode passes the same modal filters
    return probability_single(theta, chi, stages)


# -------------------------------------------------------------- photon pair

@lru_cache(maxsize=64)
def _nonlocal_state(stage_key: tuple) -> TwoPhotonState:
    pair, _ = postselect_pm2_pair(SchmidtSpectrum.from_list([0.0, 0.0, 1.0], warn=False))
    for st in stage_key:
        pair = apply_arm(build_element(dict(st)), pair, "A")
    pair = apply_arm(smf_coupler(), pair, "A")
    return normalize(pair)


def nonlocal_pair_state(stages: Sequence[Mapping] = DEFAULT_STAGES) -> TwoPhotonState:
    """Post-selected m = +-2 pair after the arm-A q-plate and arm-A fiber, renormalized.

    Arm B's OAM is labelled as it reaches the arm-B hologram. Mirroring arm B
    (``to_reflected_b_frame``) gives the conjugate labelling in which the state reads
    (|L>_A|+2>_B + |R>_A|-2>_B)/sqrt 2 (x) |0>_A|H>_B.
    """
    return _nonlocal_state(_stage_key(stages))


def to_reflected_b_frame(pair: TwoPhotonState) -> TwoPhotonState:
    return apply_arm(mirror(), pair, "B")


def hybrid_target_state(m_max: int = DEFAULT_M_MAX) -> TwoPhotonState:
    """(|L,0>_A|H,+2>_B + |R,0>_A|H,-2>_B)/sqrt 2."""
    h = polarization_amplitudes(0.0)
    amps = {}
    for spin_a, m_b in ((Spin.L, 2), (Spin.R, -2)):
        for sb, hb in h.items():
            amps[(ModeLabel(spin_a, 0), ModeLabel(sb, m_b))] = INV_SQRT2 * hb
    return TwoPhotonState(amps, m_max)


def measure_pair(pair: TwoPhotonState, theta: float, chi: float) -> float:
    out = apply_arm(pol_analyzer(theta), pair, "A")
    out = apply_arm(sector_hologram_analyzer(chi), out, "B")
    out = apply_arm(smf_coupler(), out, "B")
    return out.norm_sq()


def probability_pair(theta: float, chi: float, stages: Sequence[Mapping] = DEFAULT_STAGES) -> float:
    """Coincidence probability given post-selection: SAM of A analyzed at theta, OAM of B at chi."""
    return measure_pair(nonlocal_pair_state(stages), theta, chi)


# ------------------------------------------------------------------- noise

def noisy_probability(p_ideal: float, visibility: float) -> float:
    """White-noise admixture: V*p + (1-V)/4, giving fringes of visibility exactly V."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    return visibility * p_ideal + (1.0 - visibility) * MEAN_PROBABILITY


def ideal_probability_fn(mode: Mode, stages: Sequence[Mapping] = DEFAULT_STAGES) -> Callable[[float, float], float]:
    mode = Mode(mode)
    if mode is Mode.TWO_PHOTON:
        pair = nonlocal_pair_state(stages)
        return lambda t, c: measure_pair(pair, t, c)
    state = prepared_single_state(stages)
    return lambda t, c: measure_single(state, t, c)


def mean_counts(config: ExperimentConfig, theta: float, chi: float, p_fn=None) -> float:
    """Poisson mean for one setting."""
    p_fn = p_fn or ideal_probability_fn(config.mode, config.stages)
    p = noisy_probability(p_fn(theta, chi), config.visibility)
    signal = config.pair_rate * config.exposure * p / PEAK_PROBABILITY
    return signal + config.accidental_rate * config.exposure


def pair_rate_for_peak(peak_counts: float, visibility: float, exposure: float = 1.0) -> float:
    """pair_rate whose fringe maximum has mean ``peak_counts`` (no accidentals)."""
    return peak_counts * PEAK_PROBABILITY / (noisy_probability(PEAK_PROBABILITY, visibility) * exposure)


def setting_rng(seed: int, i: int, j: int) -> np.random.Generator:
    """Independent stream for grid point (i, j); never shared across settings."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), i, j]))


def expected_counts(config: ExperimentConfig) -> list[CountRecord]:
    """Noiseless records: every count equals its Poisson mean."""
    p_fn = ideal_probability_fn(config.mode, config.stages)
    return [
        CountRecord(t, c, mean_counts(config, t, c, p_fn), config.exposure)
        for t in config.theta_list
        for c in config.chi_list
    ]


def simulate_counts(config: ExperimentConfig) -> list[CountRecord]:
    """Sampled records, row-major over (theta, chi).

    Photon modes draw Poisson counts. Classical mode reports the expected flux,
    with optional Gaussian relative noise of size ``power_noise``.
    """
    p_fn = ideal_probability_fn(config.mode, config.stages)
    records = []
    for i, theta in enumerate(config.theta_list):
        for j, chi in enumerate(config.chi_list):
            lam = mean_counts(config, theta, chi, p_fn)
            if config.mode is Mode.CLASSICAL:
                value = lam
                if config.power_noise > 0.0:
                    value = max(0.0, lam * (1.0 + config.power_noise * setting_rng(config.seed, i, j).normal()))
            else:
                value = int(setting_rng(config.seed, i, j).poisson(lam))
            records.append(CountRecord(theta, chi, value, config.exposure))
    return records

"""Down-conversion source: OAM-correlated H-polarized pairs and their post-selected sectors."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ZeroNorm
from .hilbert import (
    DEFAULT_M_MAX,
    TwoPhotonState,
    h_ket,
    normalize,
    polarization_amplitudes,
    project_arm,
    ModeLabel,
)

log = logging.getLogger(__name__)

RENORM_WARN_TOL = 1e-6


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Real, non-negative ``c_|m|`` for |m| = 0..m_max.

    Normalized over the full signed range: ``c_0^2 + 2 * sum_{k>0} c_k^2 = 1``,
    so every term of ``sum_m c_|m| |m>_A |-m>_B`` carries amplitude ``c_|m|``.
    """

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("spectrum needs at least c_0")
        if any(c < 0 or not math.isfinite(c) for c in coeffs):
            raise ValueError(f"Schmidt coefficients must be finite and >= 0: {coeffs}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_list(cls, values: Sequence[float], warn: bool = True) -> "SchmidtSpectrum":
        """Build and normalize; logs a warning when the input was off by more than 1e-6."""
        raw = cls(tuple(values))
        total = raw.total_weight()
        if total <= 0:
            raise ZeroNorm("Schmidt spectrum is identically zero")
        if warn and abs(total - 1.0) > RENORM_WARN_TOL:
            log.warning("Schmidt spectrum weight %.6g != 1; renormalizing", total)
        if abs(total - 1.0) <= 1e-14:
            # already normalized up to rounding; rescaling would perturb the last bits
            return raw
        scale = 1.0 / math.sqrt(total)
        return cls(tuple(c * scale for c in raw.coefficients))

    @classmethod
    def default(cls, m_max: int = DEFAULT_M_MAX) -> "SchmidtSpectrum":
        """Decaying demo spectrum, c_|m|^2 proportional to 1/(1+|m|)^2."""
        return cls.from_list([1.0 / (1 + k) for k in range(m_max + 1)], warn=False)

    @property
    def m_max(self) -> int:
        return len(self.coefficients) - 1

    def c(self, m: int) -> float:
        k = abs(m)
        return self.coefficients[k] if k < len(self.coefficients) else 0.0

    def total_weight(self) -> float:
        c = self.coefficients
        return c[0] ** 2 + 2.0 * math.fsum(x * x for x in c[1:])

    def sector_probability(self, k: int) -> float:
        """Weight of the |m| = k sector (both signs)."""
        k = abs(k)
        return self.c(0) ** 2 if k == 0 else 2.0 * self.c(k) ** 2


def spdc_state(spectrum: SchmidtSpectrum, m_max: int | None = None) -> TwoPhotonState:
    m_max = max(DEFAULT_M_MAX, spectrum.m_max) if m_max is None else m_max
    h = polarization_amplitudes(0.0)
    amps = {}
    for m in range(-m_max, m_max + 1):
        c = spectrum.c(m)
        if c == 0.0:
            continue
        for sa, ha in h.items():
            for sb, hb in h.items():
                amps[(ModeLabel(sa, m), ModeLabel(sb, -m))] = c * ha * hb
    return normalize(TwoPhotonState(amps, m_max))


def heralded_single(spectrum: SchmidtSpectrum, m_max: int | None = None):
    """Herald arm A by coupling arm B into a single-mode fiber (|H,0>).

    Returns ``(state_A, herald_probability)`` with ``state_A`` normalized.
    """
    if spectrum.c(0) <= 0.0:
        raise ZeroNorm("no m = 0 term in the Schmidt spectrum; nothing to herald")
    pair = spdc_state(spectrum, m_max)
    cond, prob = project_arm(pair, "B", h_ket(0, pair.m_max))
    return normalize(cond), prob


def postselect_pm2_pair(spectrum: SchmidtSpectrum, m_max: int | None = None, ell: int = 2):
    """Keep only the m = +-ell sector of both arms; returns ``(normalized_pair, probability)``."""
    if spectrum.c(ell) <= 0.0:
        raise ZeroNorm(f"no |m| = {ell} term in the Schmidt spectrum")
    pair = spdc_state(spectrum, m_max)
    kept = TwoPhotonState(
        {k: a for k, a in pair.amplitudes.items() if abs(k[0].oam) == ell and abs(k[1].oam) == ell},
        pair.m_max,
    )
    prob = kept.norm_sq()
    return normalize(kept), prob


def pm2_target_state(m_max: int = DEFAULT_M_MAX, ell: int = 2) -> TwoPhotonState:
    """(|ell>_A|-ell>_B + |-ell>_A|ell>_B)/sqrt 2, both photons H."""
    h = polarization_amplitudes(0.0)
    amps = {}
    for m in (ell, -ell):
        for sa, ha in h.items():
            for sb, hb in h.items():
                amps[(ModeLabel(sa, m), ModeLabel(sb, -m))] = ha * hb / math.sqrt(2.0)
    return TwoPhotonState(amps, m_max)


__all__ = [
    "SchmidtSpectrum",
    "spdc_state",
    "heralded_single",
    "postselect_pm2_pair",
    "pm2_target_state",
]

"""Correlation, CHSH and fringe statistics on coincidence-count records.

Settings are matched modulo the analyzer periods: pi in theta (a polarizer) and
pi/2 in chi (the sector-hologram projector), within ``ANGLE_TOL`` radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientData, MissingSetting, SettingMismatch, ZeroCounts
from .experiments import CountRecord

ANGLE_TOL = 1e-9
THETA_PERIOD = math.pi
CHI_PERIOD = math.pi / 2
FRINGE_FREQUENCY = 4.0
CLASSICAL_BOUND = 2.0


def _circ_dist(a, b, period):
    d = np.mod(np.asarray(a) - b, period)
    return np.minimum(d, period - d)


def same_setting(t1: float, c1: float, t2: float, c2: float, tol: float = ANGLE_TOL) -> bool:
    return bool(_circ_dist(t1, t2, THETA_PERIOD) <= tol and _circ_dist(c1, c2, CHI_PERIOD) <= tol)


class CountTable:
    """Setting lookup over a list of records."""

    def __init__(self, records: Iterable[CountRecord]):
        self.records = list(records)
        self._theta = np.array([r.theta for r in self.records], dtype=float)
        self._chi = np.array([r.chi for r in self.records], dtype=float)

    def __len__(self):
        return len(self.records)

    def find(self, theta: float, chi: float) -> CountRecord | None:
        if not self.records:
            return None
        ok = (_circ_dist(self._theta, theta, THETA_PERIOD) <= ANGLE_TOL) & (
            _circ_dist(self._chi, chi, CHI_PERIOD) <= ANGLE_TOL
        )
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            return None
        # prefer the literal angle when equivalent settings both exist
        raw = np.abs(self._theta[idx] - theta) + np.abs(self._chi[idx] - chi)
        return self.records[int(idx[np.argmin(raw)])]

    def require(self, settings: Sequence[tuple[float, float]]) -> list[CountRecord]:
        found, missing = [], []
        for t, c in settings:
            rec = self.find(t, c)
            if rec is None:
                missing.append((t, c))
            found.append(rec)
        if missing:
            raise MissingSetting(missing)
        return found


# -------------------------------------------------------------- correlation

@dataclass(frozen=True)
class CorrelationEstimate:
    E: float
    sigma_E: float
    counts: tuple[float, float, float, float]
    degenerate: bool = False


def correlation_settings(theta: float, chi: float) -> list[tuple[float, float]]:
    """The four analyzer settings entering E(theta, chi), in estimator order."""
    return [
        (theta, chi),
        (theta + math.pi / 2, chi + math.pi / 4),
        (theta + math.pi / 2, chi),
        (theta, chi + math.pi / 4),
    ]


def correlation_from_counts(c1: float, c2: float, c3: float, c4: float) -> CorrelationEstimate:
    """E = (c1 + c2 - c3 - c4) / (c1 + c2 + c3 + c4) with delta-method Poisson error."""
    plus, minus = c1 + c2, c3 + c4
    total = plus + minus
    if total <= 0:
        raise ZeroCounts("all four counts are zero; correlation undefined")
    E = (plus - minus) / total
    d_plus = 2.0 * minus / total**2
    d_minus = -2.0 * plus / total**2
    var = d_plus**2 * (c1 + c2) + d_minus**2 * (c3 + c4)
    degenerate = min(c1, c2, c3, c4) == 0
    return CorrelationEstimate(E, math.sqrt(var), (c1, c2, c3, c4), degenerate)


def correlation_E(c1: CountRecord, c2: CountRecord, c3: CountRecord, c4: CountRecord) -> CorrelationEstimate:
    expected = correlation_settings(c1.theta, c1.chi)
    for k, (rec, (t, c)) in enumerate(zip((c1, c2, c3, c4), expected), start=1):
        if not same_setting(rec.theta, rec.chi, t, c):
            raise SettingMismatch(
                f"record {k} is at (theta={rec.theta:.9g}, chi={rec.chi:.9g}); expected (theta={t:.9g}, chi={c:.9g})"
            )
    return correlation_from_counts(c1.counts, c2.counts, c3.counts, c4.counts)


# --------------------------------------------------------------------- CHSH

@dataclass(frozen=True)
class CHSHResult:
    S: float
    sigma_S: float
    settings: tuple[float, float, float, float]
    violation_sigmas: float
    correlations: tuple[CorrelationEstimate, ...] = field(default=(), repr=False)

    @property
    def violates(self) -> bool:
        return self.S > CLASSICAL_BOUND


def combine_chsh(e_tc: float, e_tcp: float, e_tpc: float, e_tpcp: float) -> float:
    """|E(t,c) - E(t,c') + E(t',c) + E(t',c')|."""
    return abs(e_tc - e_tcp + e_tpc + e_tpcp)


def chsh_from_estimates(estimates: Sequence[CorrelationEstimate], settings) -> CHSHResult:
    S = combine_chsh(*(e.E for e in estimates))
    sigma = math.sqrt(math.fsum(e.sigma_E**2 for e in estimates))
    if S > CLASSICAL_BOUND:
        excess = S - CLASSICAL_BOUND
        sig = excess / sigma if sigma > 0 else math.inf
    else:
        sig = 0.0
    return CHSHResult(S, sigma, tuple(settings), sig, tuple(estimates))


def chsh_S(records, theta: float, theta_p: float, chi: float, chi_p: float) -> CHSHResult:
    table = records if isinstance(records, CountTable) else CountTable(records)
    pairs = [(theta, chi), (theta, chi_p), (theta_p, chi), (theta_p, chi_p)]
    needed = [s for t, c in pairs for s in correlation_settings(t, c)]
    recs = table.require(needed)
    estimates = [correlation_E(*recs[4 * k : 4 * k + 4]) for k in range(4)]
    return chsh_from_estimates(estimates, (theta, theta_p, chi, chi_p))


def scan_S(
    records,
    chis: Sequence[float] | None = None,
    theta: float = 0.0,
    theta_p: float = math.pi / 4,
    offset: float = math.pi / 8,
) -> list[tuple[float, CHSHResult]]:
    """S(chi) with chi' = chi + offset; defaults to every distinct chi in the data."""
    table = records if isinstance(records, CountTable) else CountTable(records)
    if chis is None:
        chis = sorted({r.chi for r in table.records})
    return [(chi, chsh_S(table, theta, theta_p, chi, chi + offset)) for chi in chis]


def ideal_scan_curve(chi, visibility: float = 1.0):
    """2*sqrt(2)*V*|sin(4 chi + pi/4)| for white-noise data at theta=0, theta'=pi/4, chi'=chi+pi/8."""
    return 2.0 * math.sqrt(2.0) * visibility * np.abs(np.sin(4.0 * np.asarray(chi) + math.pi / 4))


# ------------------------------------------------------------------ fringes

@dataclass(frozen=True)
class FringeFit:
    """C(chi) = offset + amplitude * cos(frequency*chi - phase)."""

    theta: float
    amplitude: float
    offset: float
    phase: float
    visibility: float
    residual_rms: float
    frequency: float = FRINGE_FREQUENCY
    n_points: int = 0

    @property
    def nonphysical(self) -> bool:
        return self.amplitude > self.offset


def _fringe_arrays(records: Sequence[CountRecord]):
    if not records:
        raise InsufficientData("no records to fit")
    thetas = {round(r.theta, 9) for r in records}
    if len(thetas) > 1:
        raise SettingMismatch(f"fringe fit expects one theta, got {sorted(thetas)}")
    chi = np.array([r.chi for r in records], dtype=float)
    y = np.array([r.counts for r in records], dtype=float)
    distinct = np.unique(np.round(chi, 12))
    if distinct.size < 4:
        raise InsufficientData(f"need >= 4 distinct chi values, got {distinct.size}")
    span = float(chi.max() - chi.min())
    if span < CHI_PERIOD / 2 - ANGLE_TOL:
        raise InsufficientData(f"chi values span {span:.4g} rad; need at least half a fringe period (pi/4)")
    return records[0].theta, chi, y


def fit_fringes(records: Sequence[CountRecord]) -> FringeFit:
    """Linear least squares on {1, cos 4chi, sin 4chi}; visibility = amplitude / offset."""
    theta, chi, y = _fringe_arrays(records)
    X = np.column_stack([np.ones_like(chi), np.cos(FRINGE_FREQUENCY * chi), np.sin(FRINGE_FREQUENCY * chi)])
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < 3:
        raise InsufficientData("chi sampling does not resolve the fringe (rank-deficient design)")
    B, a, b = (float(v) for v in coef)
    A = math.hypot(a, b)
    resid = y - X @ coef
    vis = A / B if B > 0 else math.inf
    return FringeFit(theta, A, B, math.atan2(b, a), vis, float(np.sqrt(np.mean(resid**2))), n_points=len(y))


def fit_fringes_free(records: Sequence[CountRecord], frequency_guess: float = FRINGE_FREQUENCY) -> FringeFit:
    """Diagnostic refit with the fringe frequency as a free parameter."""
    from scipy.optimize import curve_fit

    start = fit_fringes(records)
    theta, chi, y = _fringe_arrays(records)

    def model(x, B, A, f, phi):
        return B + A * np.cos(f * x - phi)

    p0 = [start.offset, max(start.amplitude, 1e-12), frequency_guess, start.phase]
    popt, _ = curve_fit(model, chi, y, p0=p0, maxfev=10000)
    B, A, f, phi = (float(v) for v in popt)
    if A < 0:
        A, phi = -A, phi + math.pi
    phi = math.atan2(math.sin(phi), math.cos(phi))
    resid = y - model(chi, *popt)
    return FringeFit(theta, A, B, phi, A / B if B > 0 else math.inf, float(np.sqrt(np.mean(resid**2))), f, len(y))


def group_by_theta(records: Iterable[CountRecord]) -> dict[float, list[CountRecord]]:
    groups: dict[float, list[CountRecord]] = {}
    for rec in records:
        groups.setdefault(rec.theta, []).append(rec)
    return dict(sorted(groups.items()))


def fit_all_fringes(records: Iterable[CountRecord]) -> list[FringeFit]:
    return [fit_fringes(recs) for recs in group_by_theta(records).values()]


def raw_visibility(counts: Sequence[float]) -> float:
    """(max - min) / (max + min) straight from the samples."""
    hi, lo = max(counts), min(counts)
    return (hi - lo) / (hi + lo) if hi + lo > 0 else 0.0


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])

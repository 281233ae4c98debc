"""Optical elements of the setup as sparse linear maps on one photon's spin x OAM space."""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

from .errors import OamOverflow
from .hilbert import (
    Arm,
    ModeLabel,
    SinglePhotonState,
    Spin,
    TwoPhotonState,
    orientation_amplitudes,
    polarization_amplitudes,
)

Action = Callable[[ModeLabel], Sequence[tuple[ModeLabel, complex]]]


class Kind(Enum):
    UNITARY = "Unitary"
    PROJECTOR = "Projector"


@dataclass(frozen=True)
class ElementOp:
    """A linear map given column by column: ``action(label)`` is the image of ``|label>``."""

    kind: Kind
    action: Action
    name: str

    def __call__(self, state: SinglePhotonState) -> SinglePhotonState:
        return apply(self, state)

    def __repr__(self):
        return f"ElementOp({self.name!r}, {self.kind.value})"


def _flip(spin: Spin) -> Spin:
    return Spin.R if spin is Spin.L else Spin.L


def qplate(q: int = 1, efficiency: float = 1.0) -> ElementOp:
    """Tuned q-plate: |L,m> -> |R,m+2q>, |R,m> -> |L,m-2q>.

    ``efficiency`` scales every output amplitude (1.0 is the ideal plate).
    """
    if q < 1 or int(q) != q:
        raise ValueError(f"q must be a positive integer, got {q}")
    shift = 2 * int(q)
    amp = complex(efficiency)

    def action(lab):
        if lab.spin is Spin.L:
            return ((ModeLabel(Spin.R, lab.oam + shift), amp),)
        return ((ModeLabel(Spin.L, lab.oam - shift), amp),)

    return ElementOp(Kind.UNITARY, action, f"qplate(q={q})")


def half_wave_plate(axis_angle: float) -> ElementOp:
    """Half-wave plate with fast axis at ``axis_angle``; swaps handedness, leaves OAM alone.

    Linear polarization at t leaves at 2*axis_angle - t, so a plate at t/2 maps
    |t> onto |H>.
    """
    to_r = cmath.exp(-2j * axis_angle)
    to_l = cmath.exp(2j * axis_angle)

    def action(lab):
        if lab.spin is Spin.L:
            return ((ModeLabel(Spin.R, lab.oam), to_r),)
        return ((ModeLabel(Spin.L, lab.oam), to_l),)

    return ElementOp(Kind.UNITARY, action, f"hwp({axis_angle:.6g})")


def _spin_projector(vec: dict[Spin, complex], name: str) -> ElementOp:
    def action(lab):
        c = vec[lab.spin].conjugate()
        return tuple((ModeLabel(s, lab.oam), v * c) for s, v in vec.items())

    return ElementOp(Kind.PROJECTOR, action, name)


def polarizer(axis_angle: float) -> ElementOp:
    return _spin_projector(polarization_amplitudes(axis_angle), f"polarizer({axis_angle:.6g})")


def pol_analyzer(theta: float) -> ElementOp:
    """Projector onto |theta>_pi (x) 1_oam; same statistics as hwp(theta/2) then polarizer(0)."""
    return _spin_projector(polarization_amplitudes(theta), f"pol_analyzer({theta:.6g})")


def sector_hologram_analyzer(chi: float, ell: int = 2) -> ElementOp:
    """Sector hologram at orientation ``chi`` plus fiber: <chi|_o on the +-ell pair, output in m = 0.

    Everything outside m = +-ell is discarded. Because the output is relabelled
    to m = 0 this map is a filter, not an idempotent projector.
    """
    weights = {m: a.conjugate() for m, a in orientation_amplitudes(chi, ell).items()}

    def action(lab):
        w = weights.get(lab.oam)
        if w is None:
            return ()
        return ((ModeLabel(lab.spin, 0), w),)

    return ElementOp(Kind.PROJECTOR, action, f"sector_hologram({chi:.6g})")


def oam_filter(values: Sequence[int], name: str | None = None) -> ElementOp:
    allowed = frozenset(int(v) for v in values)

    def action(lab):
        return ((lab, 1.0 + 0j),) if lab.oam in allowed else ()

    return ElementOp(Kind.PROJECTOR, action, name or f"oam_filter({sorted(allowed)})")


def smf_coupler() -> ElementOp:
    """Single-mode fiber: keeps m = 0, spin untouched."""
    return oam_filter((0,), "smf_coupler")


def _identity(lab):
    return ((lab, 1.0 + 0j),)


def uniform_grating() -> ElementOp:
    return ElementOp(Kind.UNITARY, _identity, "uniform_grating")


def identity() -> ElementOp:
    return ElementOp(Kind.UNITARY, _identity, "identity")


def mirror() -> ElementOp:
    """Normal-incidence reflection: reverses both helicity and OAM sign (H -> H, V -> -V)."""

    def action(lab):
        return ((ModeLabel(_flip(lab.spin), -lab.oam), 1.0 + 0j),)

    return ElementOp(Kind.UNITARY, action, "mirror")


def compose(*ops: ElementOp) -> ElementOp:
    """Sequential composition; ``ops[0]`` acts first."""
    if not ops:
        return identity()

    def action(lab):
        current = {lab: 1.0 + 0j}
        for op in ops:
            nxt: dict[ModeLabel, complex] = {}
            for l0, a0 in current.items():
                for l1, a1 in op.action(l0):
                    nxt[l1] = nxt.get(l1, 0j) + a0 * a1
            current = nxt
        return tuple(current.items())

    kind = Kind.UNITARY if all(op.kind is Kind.UNITARY for op in ops) else Kind.PROJECTOR
    return ElementOp(kind, action, " -> ".join(op.name for op in ops))


def apply(op: ElementOp, state: SinglePhotonState) -> SinglePhotonState:
    """Apply ``op``; the result is left unnormalized (its squared norm is the transmission)."""
    out: dict[ModeLabel, complex] = {}
    m_max = state.m_max
    for lab, amp in state.amplitudes.items():
        for new, c in op.action(lab):
            if abs(new.oam) > m_max:
                raise OamOverflow(f"{op.name} maps {lab} to {new}, beyond m_max={m_max}")
            out[new] = out.get(new, 0j) + c * amp
    return SinglePhotonState(out, m_max)


def apply_arm(op: ElementOp, pair: TwoPhotonState, arm: Arm) -> TwoPhotonState:
    if arm not in ("A", "B"):
        raise ValueError(f"arm must be 'A' or 'B', got {arm!r}")
    out: dict[tuple[ModeLabel, ModeLabel], complex] = {}
    m_max = pair.m_max
    for (la, lb), amp in pair.amplitudes.items():
        target = la if arm == "A" else lb
        for new, c in op.action(target):
            if abs(new.oam) > m_max:
                raise OamOverflow(f"{op.name} maps {target} to {new} on arm {arm}, beyond m_max={m_max}")
            key = (new, lb) if arm == "A" else (la, new)
            out[key] = out.get(key, 0j) + c * amp
    return TwoPhotonState(out, m_max)


# ------------------------------------------------------------ config stages

STAGE_TYPES = ("qplate", "hwp", "polarizer", "pol_analyzer", "sector_hologram", "smf", "grating", "mirror")


def build_element(entry) -> ElementOp:
    """Element from a tagged config entry such as ``{"type": "hwp", "angle_deg": 22.5}``."""
    from .errors import ConfigError
    from .units import angle_keys, read_angle

    entry = dict(entry)
    kind = entry.pop("type", None)
    where = f"stage[{kind}]"

    def check_keys(*allowed):
        for key in entry:
            if key not in allowed:
                raise ConfigError(f"unknown key for stage type {kind!r}", key=f"{where}.{key}")

    if kind == "qplate":
        check_keys("q", "efficiency")
        q = entry.get("q", 1)
        if not isinstance(q, int) or q < 1:
            raise ConfigError(f"q must be a positive integer, got {q!r}", key=f"{where}.q")
        return qplate(q, float(entry.get("efficiency", 1.0)))
    if kind in ("hwp", "polarizer"):
        check_keys(*angle_keys("angle"))
        angle = read_angle(entry, "angle", where=where)
        return half_wave_plate(angle) if kind == "hwp" else polarizer(angle)
    if kind == "pol_analyzer":
        check_keys(*angle_keys("theta"))
        return pol_analyzer(read_angle(entry, "theta", where=where))
    if kind == "sector_hologram":
        check_keys(*angle_keys("chi"))
        return sector_hologram_analyzer(read_angle(entry, "chi", where=where))
    if kind in ("smf", "grating", "mirror"):
        check_keys()
        return {"smf": smf_coupler, "grating": uniform_grating, "mirror": mirror}[kind]()
    raise ConfigError(f"unknown stage type {kind!r}; expected one of {', '.join(STAGE_TYPES)}", key="stage.type")

"""Sparse state algebra on spin (L/R) x truncated OAM space, for one or two photons.

States are immutable mappings from basis labels to complex amplitudes. The
circular basis is the storage basis; linear polarizations are built on top of
it with the convention ``|H> = (|L> + |R>)/sqrt(2)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import IntEnum
from types import MappingProxyType
from typing import Iterable, Literal, Mapping, NamedTuple, Union

from .errors import OamOverflow, ZeroNorm

DEFAULT_M_MAX = 6
DROP_TOL = 1e-15
NORM_TOL = 1e-12
ZERO_NORM_TOL = 1e-30

INV_SQRT2 = 1.0 / math.sqrt(2.0)


class Spin(IntEnum):
    L = 0
    R = 1


class ModeLabel(NamedTuple):
    """Basis label; tuple ordering (spin, then oam) is the canonical order."""

    spin: Spin
    oam: int

    def __str__(self):
        return f"{self.spin.name},{self.oam:+d}"


def _label(spin, oam) -> ModeLabel:
    if isinstance(spin, str):
        spin = Spin[spin]
    return ModeLabel(Spin(spin), int(oam))


def _freeze(items: Iterable, m_max: int, labels_of) -> Mapping:
    kept = {}
    for key, amp in items:
        amp = complex(amp)
        if abs(amp) < DROP_TOL:
            continue
        for lab in labels_of(key):
            if abs(lab.oam) > m_max:
                raise OamOverflow(f"label {lab} exceeds m_max={m_max}")
        kept[key] = kept.get(key, 0j) + amp
    return MappingProxyType(dict(sorted(kept.items())))


@dataclass(frozen=True)
class SinglePhotonState:
    amplitudes: Mapping[ModeLabel, complex] = field(default_factory=dict)
    m_max: int = DEFAULT_M_MAX

    def __post_init__(self):
        if self.m_max < 2:
            raise ValueError(f"m_max must be >= 2, got {self.m_max}")
        items = ((_label(*k), v) for k, v in dict(self.amplitudes).items())
        object.__setattr__(self, "amplitudes", _freeze(items, self.m_max, lambda k: (k,)))

    def __getitem__(self, label) -> complex:
        return self.amplitudes.get(_label(*label), 0j)

    def __len__(self):
        return len(self.amplitudes)

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_sq() - 1.0) <= NORM_TOL

    def scaled(self, factor: complex) -> "SinglePhotonState":
        return SinglePhotonState({k: factor * v for k, v in self.amplitudes.items()}, self.m_max)

    def __add__(self, other: "SinglePhotonState") -> "SinglePhotonState":
        amps = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            amps[k] = amps.get(k, 0j) + v
        return SinglePhotonState(amps, max(self.m_max, other.m_max))

    def with_m_max(self, m_max: int) -> "SinglePhotonState":
        return SinglePhotonState(self.amplitudes, m_max)

    def to_text(self) -> str:
        return "".join(
            f"{lab.spin.name} {lab.oam} {a.real!r} {a.imag!r}\n" for lab, a in self.amplitudes.items()
        )

    @classmethod
    def from_text(cls, text: str, m_max: int = DEFAULT_M_MAX) -> "SinglePhotonState":
        amps = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            spin, oam, re, im = line.split()
            amps[_label(spin, oam)] = complex(float(re), float(im))
        return cls(amps, m_max)


@dataclass(frozen=True)
class TwoPhotonState:
    """Amplitudes keyed by ``(label_A, label_B)``; arm order is positional."""

    amplitudes: Mapping[tuple[ModeLabel, ModeLabel], complex] = field(default_factory=dict)
    m_max: int = DEFAULT_M_MAX

    def __post_init__(self):
        if self.m_max < 2:
            raise ValueError(f"m_max must be >= 2, got {self.m_max}")
        items = (((_label(*a), _label(*b)), v) for (a, b), v in dict(self.amplitudes).items())
        object.__setattr__(self, "amplitudes", _freeze(items, self.m_max, lambda k: k))

    def __getitem__(self, labels) -> complex:
        a, b = labels
        return self.amplitudes.get((_label(*a), _label(*b)), 0j)

    def __len__(self):
        return len(self.amplitudes)

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_sq() - 1.0) <= NORM_TOL

    def scaled(self, factor: complex) -> "TwoPhotonState":
        return TwoPhotonState({k: factor * v for k, v in self.amplitudes.items()}, self.m_max)

    def __add__(self, other: "TwoPhotonState") -> "TwoPhotonState":
        amps = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            amps[k] = amps.get(k, 0j) + v
        return TwoPhotonState(amps, max(self.m_max, other.m_max))

    def to_text(self) -> str:
        return "".join(
            f"{la.spin.name} {la.oam} {lb.spin.name} {lb.oam} {a.real!r} {a.imag!r}\n"
            for (la, lb), a in self.amplitudes.items()
        )

    @classmethod
    def from_text(cls, text: str, m_max: int = DEFAULT_M_MAX) -> "TwoPhotonState":
        amps = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            sa, oa, sb, ob, re, im = line.split()
            amps[(_label(sa, oa), _label(sb, ob))] = complex(float(re), float(im))
        return cls(amps, m_max)


State = Union[SinglePhotonState, TwoPhotonState]
Arm = Literal["A", "B"]


# ---------------------------------------------------------------- constructors

def fix_global_phase(state: State) -> State:
    """Rotate the global phase so the first amplitude in canonical order is real positive."""
    if not state.amplitudes:
        return state
    key, first = next(iter(state.amplitudes.items()))
    out = dict(state.amplitudes)
    phase = first.conjugate() / abs(first)
    out = {k: a * phase for k, a in out.items()}
    out[key] = complex(abs(first))
    return type(state)(out, state.m_max)


def ket(spin, oam: int = 0, m_max: int = DEFAULT_M_MAX) -> SinglePhotonState:
    return SinglePhotonState({_label(spin, oam): 1.0}, m_max)


def from_amplitudes(amplitudes: Mapping, m_max: int = DEFAULT_M_MAX, fix_phase: bool = True) -> SinglePhotonState:
    state = SinglePhotonState(amplitudes, m_max)
    return fix_global_phase(state) if fix_phase else state


def polarization_amplitudes(theta: float) -> dict[Spin, complex]:
    """Linear polarization at ``theta`` from horizontal: (e^{i theta}|L> + e^{-i theta}|R>)/sqrt 2.

    Returned with the symmetric phase form, not the canonical one; analyzer
    overlaps keep their real-valued form this way.
    """
    return {Spin.L: INV_SQRT2 * cmath.exp(1j * theta), Spin.R: INV_SQRT2 * cmath.exp(-1j * theta)}


def orientation_amplitudes(chi: float, ell: int = 2) -> dict[int, complex]:
    """OAM superposition (e^{i ell chi}|+ell> + e^{-i ell chi}|-ell>)/sqrt 2 of orientation ``chi``."""
    return {ell: INV_SQRT2 * cmath.exp(1j * ell * chi), -ell: INV_SQRT2 * cmath.exp(-1j * ell * chi)}


def product_state(spin_amps: Mapping, oam_amps: Mapping, m_max: int = DEFAULT_M_MAX) -> SinglePhotonState:
    """Separable state from a spin vector and an OAM vector."""
    return SinglePhotonState(
        {_label(s, m): a * b for s, a in spin_amps.items() for m, b in oam_amps.items()}, m_max
    )


def h_ket(oam: int = 0, m_max: int = DEFAULT_M_MAX) -> SinglePhotonState:
    return product_state(polarization_amplitudes(0.0), {oam: 1.0}, m_max)


def v_ket(oam: int = 0, m_max: int = DEFAULT_M_MAX) -> SinglePhotonState:
    return fix_global_phase(product_state(polarization_amplitudes(math.pi / 2), {oam: 1.0}, m_max))


def linear_ket(theta: float, oam: int = 0, m_max: int = DEFAULT_M_MAX) -> SinglePhotonState:
    return product_state(polarization_amplitudes(theta), {oam: 1.0}, m_max)


def analyzer_ket(theta: float, chi: float, m_max: int = DEFAULT_M_MAX) -> SinglePhotonState:
    """|theta>_pi (x) |chi>_o, the joint state accepted by the polarization and sector analyzers."""
    return product_state(polarization_amplitudes(theta), orientation_amplitudes(chi), m_max)


# ------------------------------------------------------------------ operations

def normalize(state: State) -> State:
    n2 = state.norm_sq()
    if n2 <= ZERO_NORM_TOL:
        raise ZeroNorm(f"cannot normalize a state with squared norm {n2:.3g}")
    return state.scaled(1.0 / math.sqrt(n2))


def inner_product(a: State, b: State) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if type(a) is not type(b):
        raise TypeError(f"cannot take inner product of {type(a).__name__} and {type(b).__name__}")
    small, big, flip = (a, b, False) if len(a) <= len(b) else (b, a, True)
    total = 0j
    for key, amp in small.amplitudes.items():
        other = big.amplitudes.get(key)
        if other is not None:
            total += amp * other.conjugate() if flip else amp.conjugate() * other
    return total


def tensor(a: SinglePhotonState, b: SinglePhotonState) -> TwoPhotonState:
    return TwoPhotonState(
        {(la, lb): x * y for la, x in a.amplitudes.items() for lb, y in b.amplitudes.items()},
        max(a.m_max, b.m_max),
    )


def project_arm(pair: TwoPhotonState, arm: Arm, bra: SinglePhotonState) -> tuple[SinglePhotonState, float]:
    """Project one arm onto ``bra``; return the (unnormalized) state of the other arm and its weight."""
    if arm not in ("A", "B"):
        raise ValueError(f"arm must be 'A' or 'B', got {arm!r}")
    out: dict[ModeLabel, complex] = {}
    for (la, lb), amp in pair.amplitudes.items():
        mine, other = (la, lb) if arm == "A" else (lb, la)
        c = bra.amplitudes.get(mine)
        if c is not None:
            out[other] = out.get(other, 0j) + c.conjugate() * amp
    cond = SinglePhotonState(out, pair.m_max)
    prob = cond.norm_sq()
    if prob < ZERO_NORM_TOL:
        raise ZeroNorm(f"projection of arm {arm} has vanishing probability ({prob:.3g})")
    return cond, prob


def fidelity(a: State, b: State) -> float:
    return min(1.0, abs(inner_product(a, b)) ** 2)


def reduced_oam_populations(pair: TwoPhotonState, arm: Arm) -> dict[int, float]:
    """Marginal OAM distribution of one arm (diagonal of its reduced density matrix)."""
    idx = 0 if arm == "A" else 1
    pops: dict[int, float] = {}
    for labels, amp in pair.amplitudes.items():
        m = labels[idx].oam
        pops[m] = pops.get(m, 0.0) + abs(amp) ** 2
    return dict(sorted(pops.items()))

"""TOML run configuration.

Example::

    mode = "SinglePhoton"
    theta_deg = [0, 45, 90, 135]
    chi_deg = [0, 5.625, 11.25, 16.875, 22.5, 28.125, 33.75, 39.375, 45, 50.625, 56.25, 61.875, 67.5, 73.125, 78.75, 84.375]
    pair_rate = 2000.0
    exposure_s = 1.0
    visibility = 0.9
    accidental_rate = 0.0
    seed = 7
    schmidt = [0.6, 0.4, 0.4]

    [[stage]]
    type = "qplate"
    q = 1

    [render]
    input = "H"
    size = 256
    half_extent_w0 = 3.0

Angles take a ``_deg`` or ``_rad`` suffix; serialization always writes radians.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .elements import apply, build_element
from .errors import ConfigError
from .experiments import DEFAULT_STAGES, ExperimentConfig, Mode
from .fieldmap import DEFAULT_HALF_EXTENT, DEFAULT_PIXELS, MIN_PIXELS
from .hilbert import DEFAULT_M_MAX, SinglePhotonState, ket, linear_ket
from .source import SchmidtSpectrum
from .units import angle_keys, read_angle

EXPERIMENT_KEYS = {
    "mode",
    *angle_keys("theta"),
    *angle_keys("chi"),
    "pair_rate",
    "exposure_s",
    "visibility",
    "accidental_rate",
    "seed",
    "schmidt",
    "power_noise",
    "stage",
    "render",
}
RENDER_KEYS = {"input", *angle_keys("input_angle"), "input_oam", "size", "half_extent_w0", "w0"}
INPUT_POLARIZATIONS = ("H", "V", "D", "A", "L", "R")


@dataclass(frozen=True)
class RenderConfig:
    """Input beam and grid for field maps; the beam passes the run's stages first."""

    input: str = "H"
    input_angle: float | None = None
    input_oam: int = 0
    size: int = DEFAULT_PIXELS
    half_extent: float = DEFAULT_HALF_EXTENT
    w0: float = 1.0

    def input_state(self, m_max: int = DEFAULT_M_MAX) -> SinglePhotonState:
        if self.input_angle is not None:
            return linear_ket(self.input_angle, self.input_oam, m_max)
        if self.input in ("L", "R"):
            return ket(self.input, self.input_oam, m_max)
        angle = {"H": 0.0, "V": math.pi / 2, "D": math.pi / 4, "A": -math.pi / 4}[self.input]
        return linear_ket(angle, self.input_oam, m_max)


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    render: RenderConfig = field(default_factory=RenderConfig)

    def with_seed(self, seed: int | None) -> "RunConfig":
        if seed is None:
            return self
        return replace(self, experiment=replace(self.experiment, seed=seed))

    def render_state(self) -> SinglePhotonState:
        state = self.render.input_state()
        for st in self.experiment.stages:
            state = apply(build_element(st), state)
        return state


def _number(raw: Mapping, key: str, default, kind=float):
    if key not in raw:
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key=key)
    if kind is int:
        if not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key=key)
        return value
    return float(value)


def _parse_render(raw: Any) -> RenderConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError("expected a table", key="render")
    for key in raw:
        if key not in RENDER_KEYS:
            raise ConfigError("unknown key", key=f"render.{key}")
    inp = raw.get("input", "H")
    if inp not in INPUT_POLARIZATIONS:
        raise ConfigError(f"expected one of {', '.join(INPUT_POLARIZATIONS)}", key="render.input")
    size = raw.get("size", DEFAULT_PIXELS)
    if not isinstance(size, int) or size < MIN_PIXELS:
        raise ConfigError(f"must be an integer >= {MIN_PIXELS}", key="render.size")
    oam = raw.get("input_oam", 0)
    if not isinstance(oam, int):
        raise ConfigError("must be an integer", key="render.input_oam")
    half = raw.get("half_extent_w0", DEFAULT_HALF_EXTENT)
    w0 = raw.get("w0", 1.0)
    for key, value in (("half_extent_w0", half), ("w0", w0)):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            raise ConfigError("must be a positive number", key=f"render.{key}")
    return RenderConfig(inp, read_angle(raw, "input_angle", None, "render"), oam, size, float(half), float(w0))


def parse_config(raw: Mapping[str, Any]) -> RunConfig:
    for key in raw:
        if key not in EXPERIMENT_KEYS:
            raise ConfigError("unknown key", key=key)
    defaults = ExperimentConfig.__dataclass_fields__
    mode = raw.get("mode", Mode.SINGLE_PHOTON.value)
    try:
        mode = Mode(mode)
    except ValueError:
        raise ConfigError(f"expected one of {', '.join(m.value for m in Mode)}, got {mode!r}", key="mode") from None

    theta = read_angle(raw, "theta", ExperimentConfig().theta_list)
    chi = read_angle(raw, "chi", ExperimentConfig().chi_list)
    for stem, value in (("theta", theta), ("chi", chi)):
        if not isinstance(value, tuple):
            raise ConfigError("expected a list of angles", key=stem)

    if "schmidt" in raw:
        coeffs = raw["schmidt"]
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError("expected a non-empty list [c0, c1, ...]", key="schmidt")
        try:
            schmidt = SchmidtSpectrum.from_list(coeffs)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), key="schmidt") from exc
    else:
        schmidt = SchmidtSpectrum.default()

    stages = raw.get("stage", list(DEFAULT_STAGES))
    if not isinstance(stages, list) or not all(isinstance(s, Mapping) for s in stages):
        raise ConfigError("expected an array of tables ([[stage]])", key="stage")

    seed = raw.get("seed", defaults["seed"].default)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"expected an integer, got {seed!r}", key="seed")

    experiment = ExperimentConfig(
        mode=mode,
        theta_list=theta,
        chi_list=chi,
        pair_rate=_number(raw, "pair_rate", defaults["pair_rate"].default),
        exposure=_number(raw, "exposure_s", defaults["exposure"].default),
        visibility=_number(raw, "visibility", defaults["visibility"].default),
        accidental_rate=_number(raw, "accidental_rate", defaults["accidental_rate"].default),
        seed=seed,
        schmidt=schmidt,
        power_noise=_number(raw, "power_noise", defaults["power_noise"].default),
        stages=tuple(stages),
    )
    render = _parse_render(raw["render"]) if "render" in raw else RenderConfig()
    return RunConfig(experiment, render)


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    e, r = cfg.experiment, cfg.render
    render: dict[str, Any] = {"input": r.input, "input_oam": r.input_oam, "size": r.size,
                              "half_extent_w0": r.half_extent, "w0": r.w0}
    if r.input_angle is not None:
        render["input_angle_rad"] = r.input_angle
    return {
        "mode": e.mode.value,
        "theta_rad": list(e.theta_list),
        "chi_rad": list(e.chi_list),
        "pair_rate": e.pair_rate,
        "exposure_s": e.exposure,
        "visibility": e.visibility,
        "accidental_rate": e.accidental_rate,
        "seed": int(e.seed),
        "schmidt": list(e.schmidt.coefficients),
        "power_noise": e.power_noise,
        "stage": [dict(s) for s in e.stages],
        "render": render,
    }


def dumps_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(config_to_dict(cfg))


def loads_config(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from exc
    return parse_config(raw)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text)

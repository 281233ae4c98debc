"""Angle keys with explicit unit suffixes (``*_deg`` / ``*_rad``); radians internally."""
from __future__ import annotations

import math
from typing import Any, Mapping

from .errors import ConfigError

_MISSING = object()


def angle_keys(stem: str) -> tuple[str, str]:
    return f"{stem}_deg", f"{stem}_rad"


def read_angle(entry: Mapping[str, Any], stem: str, default: Any = _MISSING, where: str = "") -> Any:
    """Return the value of ``stem_deg`` or ``stem_rad`` in radians (scalars or lists)."""
    deg_key, rad_key = angle_keys(stem)
    has_deg, has_rad = deg_key in entry, rad_key in entry
    prefix = f"{where}." if where else ""
    if has_deg and has_rad:
        raise ConfigError("give the angle in degrees or radians, not both", key=f"{prefix}{stem}")
    if not (has_deg or has_rad):
        if default is _MISSING:
            raise ConfigError(f"missing angle (expected {deg_key} or {rad_key})", key=f"{prefix}{stem}")
        return default
    key = deg_key if has_deg else rad_key
    raw = entry[key]
    conv = math.radians if has_deg else float
    try:
        if isinstance(raw, (list, tuple)):
            return tuple(conv(float(v)) for v in raw)
        return conv(float(raw))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not a number: {raw!r}", key=f"{prefix}{key}") from exc

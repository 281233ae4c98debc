"""Transverse field and Stokes maps of spin-orbit modes (p = 0 Laguerre-Gauss radial profiles)."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hilbert import SinglePhotonState, Spin

MIN_PIXELS = 64
DEFAULT_PIXELS = 256
DEFAULT_HALF_EXTENT = 3.0

MAP_NAMES = ("intensity", "s1_norm", "s2_norm", "s3_norm", "orientation")


def lg_mode(m: int, r, phi, w0: float = 1.0):
    """Unit-L2 LG_{p=0,m}: sqrt(2/(pi |m|!))/w0 * (r sqrt2/w0)^|m| exp(-r^2/w0^2) exp(i m phi)."""
    k = abs(m)
    norm = math.sqrt(2.0 / (math.pi * math.factorial(k))) / w0
    rho = np.sqrt(2.0) * np.asarray(r) / w0
    return norm * rho**k * np.exp(-(np.asarray(r) / w0) ** 2) * np.exp(1j * m * np.asarray(phi))


def evaluate_field(state: SinglePhotonState, x, y, w0: float = 1.0):
    """Circular components (E_L, E_R) of ``state`` at points (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    phi = np.arctan2(y, x)
    e_l = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    e_r = np.zeros_like(e_l)
    cache: dict[int, np.ndarray] = {}
    for lab, amp in state.amplitudes.items():
        if lab.oam not in cache:
            cache[lab.oam] = lg_mode(lab.oam, r, phi, w0)
        target = e_l if lab.spin is Spin.L else e_r
        target += amp * cache[lab.oam]
    return e_l, e_r


@dataclass(frozen=True)
class FieldGrid:
    """Square grid centered on the beam axis; ``half_extent`` in beam-waist units."""

    e_l: np.ndarray
    e_r: np.ndarray
    half_extent: float = DEFAULT_HALF_EXTENT
    w0: float = 1.0

    @property
    def width(self) -> int:
        return self.e_l.shape[1]

    @property
    def height(self) -> int:
        return self.e_l.shape[0]

    def axis(self) -> np.ndarray:
        return pixel_axis(self.width, self.half_extent, self.w0)

    @property
    def pixel_size(self) -> float:
        return 2.0 * self.half_extent * self.w0 / (self.width - 1)

    def intensity(self) -> np.ndarray:
        return np.abs(self.e_l) ** 2 + np.abs(self.e_r) ** 2

    def total_power(self) -> float:
        return float(self.intensity().sum() * self.pixel_size**2)


def pixel_axis(n: int, half_extent: float, w0: float = 1.0) -> np.ndarray:
    return np.linspace(-half_extent * w0, half_extent * w0, n)


def render_mode(
    state: SinglePhotonState,
    size: int = DEFAULT_PIXELS,
    half_extent: float = DEFAULT_HALF_EXTENT,
    w0: float = 1.0,
) -> FieldGrid:
    if size < MIN_PIXELS:
        raise ValueError(f"grid of {size} px is too coarse; need at least {MIN_PIXELS}")
    ax = pixel_axis(size, half_extent, w0)
    xx, yy = np.meshgrid(ax, ax)  # row index is y
    e_l, e_r = evaluate_field(state, xx, yy, w0)
    return FieldGrid(e_l, e_r, half_extent, w0)


@dataclass(frozen=True)
class StokesMap:
    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    half_extent: float = DEFAULT_HALF_EXTENT

    def normalized(self, which: int) -> np.ndarray:
        """S_i / S0, zero where S0 vanishes."""
        s = (self.s0, self.s1, self.s2, self.s3)[which]
        return np.divide(s, self.s0, out=np.zeros_like(s), where=self.s0 > 0)

    @property
    def orientation(self) -> np.ndarray:
        """Polarization-ellipse azimuth psi in (-pi/2, pi/2]."""
        return 0.5 * np.arctan2(self.s2, self.s1)

    @property
    def ellipticity(self) -> np.ndarray:
        return 0.5 * np.arcsin(np.clip(self.normalized(3), -1.0, 1.0))


def stokes_from_components(e_l, e_r):
    """S3 = |E_L|^2 - |E_R|^2 (+1 is pure L); S1 + i S2 = 2 E_L conj(E_R) (pure H gives S1 = +1)."""
    il, ir = np.abs(e_l) ** 2, np.abs(e_r) ** 2
    cross = 2.0 * e_l * np.conj(e_r)
    return il + ir, cross.real, cross.imag, il - ir


def stokes(field: FieldGrid) -> StokesMap:
    s0, s1, s2, s3 = stokes_from_components(field.e_l, field.e_r)
    return StokesMap(s0, s1, s2, s3, field.half_extent)


def sample_on_circle(grid: np.ndarray, radius: float, half_extent: float, n: int = 720, order: int = 3):
    """Interpolate a map along a circle of ``radius`` (same units as ``half_extent``)."""
    from scipy.ndimage import map_coordinates

    size = grid.shape[0]
    phi = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    scale = (size - 1) / (2.0 * half_extent)
    cols = (radius * np.cos(phi) + half_extent) * scale
    rows = (radius * np.sin(phi) + half_extent) * scale
    return phi, map_coordinates(grid, [rows, cols], order=order, mode="nearest")


def orientation_winding(smap: StokesMap, radius: float = 1.0, n: int = 720) -> float:
    """Net turns of the polarization azimuth along a counter-clockwise loop around the axis."""
    _, s1 = sample_on_circle(smap.s1, radius, smap.half_extent, n)
    _, s2 = sample_on_circle(smap.s2, radius, smap.half_extent, n)
    two_psi = np.arctan2(s2, s1)
    steps = np.diff(np.append(two_psi, two_psi[0]))
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    return float(steps.sum() / 2.0 / (2.0 * np.pi))


# ------------------------------------------------------------------ export

def _maps(smap: StokesMap) -> dict[str, np.ndarray]:
    return {
        "intensity": smap.s0,
        "s1_norm": smap.normalized(1),
        "s2_norm": smap.normalized(2),
        "s3_norm": smap.normalized(3),
        "orientation": smap.orientation,
    }


def write_csv_grid(path: Path, values: np.ndarray, half_extent: float) -> None:
    """Header ``# width height half_extent_w0`` (values), then row-major comma-separated rows."""
    h, w = values.shape
    lines = [f"# {w} {h} {half_extent!r}"]
    lines.extend(",".join(repr(float(v)) for v in row) for row in values)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv_grid(path) -> tuple[np.ndarray, float]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing '# width height half_extent_w0' header")
        w, h, half = header[1:].split()
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (int(h), int(w)):
        raise ValueError(f"{path}: header says {w}x{h}, found {data.shape[1]}x{data.shape[0]}")
    return data, float(half)


def _diverging(v: np.ndarray) -> np.ndarray:
    """Blue (-1) -> white (0) -> red (+1), clamped."""
    v = np.clip(np.nan_to_num(v), -1.0, 1.0)
    pos, neg = np.clip(v, 0, 1), np.clip(-v, 0, 1)
    rgb = np.stack([1.0 - neg, 1.0 - pos - neg, 1.0 - pos], axis=-1)
    return (rgb * 255).round().astype(np.uint8)


def _gray(v: np.ndarray) -> np.ndarray:
    peak = float(v.max())
    g = v / peak if peak > 0 else np.zeros_like(v)
    return (np.clip(g, 0, 1) * 255).round().astype(np.uint8)


def _orientation_overlay(smap: StokesMap, spacing: int = 16):
    from PIL import Image, ImageDraw

    gray = _gray(smap.s0)
    img = Image.fromarray(np.stack([gray] * 3, axis=-1), mode="RGB")
    draw = ImageDraw.Draw(img)
    psi = smap.orientation
    peak = float(smap.s0.max())
    h, w = psi.shape
    half = spacing * 0.4
    for row in range(spacing // 2, h, spacing):
        for col in range(spacing // 2, w, spacing):
            if peak <= 0 or smap.s0[row, col] < 0.05 * peak:
                continue
            # drawn in array coordinates (row = +y); the image is flipped afterwards
            dx, dy = half * math.cos(psi[row, col]), half * math.sin(psi[row, col])
            draw.line([(col - dx, row - dy), (col + dx, row + dy)], fill=(255, 200, 0), width=1)
    return img


def export_maps(smap: StokesMap, path, fmt: str = "csv-grid", prefix: str = "") -> list[Path]:
    """Write intensity, S1..S3/S0 and orientation rasters; returns the paths written.

    PNG colormaps: intensity grayscale (peak = white); S_i/S0 blue-white-red on
    [-1, 1]; the orientation raster is the intensity image with azimuth line segments.
    CSV: one grid per map, orientation in radians.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        maps = _maps(smap)
        if fmt == "csv-grid":
            for name, values in maps.items():
                p = out / f"{prefix}{name}.csv"
                write_csv_grid(p, values, smap.half_extent)
                written.append(p)
        elif fmt == "png":
            from PIL import Image

            for name, values in maps.items():
                p = out / f"{prefix}{name}.png"
                if name == "intensity":
                    img = Image.fromarray(_gray(values), mode="L")
                elif name == "orientation":
                    img = _orientation_overlay(smap)
                else:
                    img = Image.fromarray(_diverging(values), mode="RGB")
                # flip so +y is up
                img.transpose(Image.FLIP_TOP_BOTTOM).save(p, format="PNG")
                written.append(p)
        else:
            raise ValueError(f"unknown map format {fmt!r}; expected 'csv-grid' or 'png'")
    except OSError as exc:
        raise OSError(f"failed writing maps under {os.fspath(out)}: {exc}") from exc
    return written

"""Counts CSV and analysis report formats."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .analysis import CHSHResult, FringeFit
from .experiments import CountRecord

COUNTS_HEADER = ("theta_rad", "chi_rad", "counts", "exposure_s")
SCAN_HEADER = ("chi_rad", "S", "sigma_S", "violation_sigmas")
FRINGE_HEADER = ("theta_rad", "visibility", "amplitude", "offset", "phase_rad", "residual_rms", "nonphysical")


class DataFormatError(ValueError):
    """Malformed input data file."""


def _num(v) -> str:
    # repr is locale-independent and round-trips exactly
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def counts_to_csv(records: Iterable[CountRecord]) -> str:
    """Integer counts for photon data; classical fluxes are written as floats."""
    return _csv_text(COUNTS_HEADER, ((r.theta, r.chi, r.counts, r.exposure) for r in records))


def write_counts_csv(path, records: Iterable[CountRecord]) -> Path:
    atomic_write_text(path, counts_to_csv(records))
    return Path(path)


def _parse_count(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_counts_csv(text: str, source: str = "<counts>") -> list[CountRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if not rows:
        raise DataFormatError(f"{source}: empty file (expected header {','.join(COUNTS_HEADER)})")
    header = tuple(h.strip() for h in rows[0])
    if header != COUNTS_HEADER:
        raise DataFormatError(f"{source}: bad header {','.join(header)!r}; expected {','.join(COUNTS_HEADER)}")
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(COUNTS_HEADER):
            raise DataFormatError(f"{source}:{lineno}: expected 4 fields, got {len(row)}")
        try:
            theta, chi, exposure = float(row[0]), float(row[1]), float(row[3])
            counts = _parse_count(row[2].strip())
        except ValueError as exc:
            raise DataFormatError(f"{source}:{lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in (theta, chi, counts, exposure)) or counts < 0:
            raise DataFormatError(f"{source}:{lineno}: non-finite or negative value")
        records.append(CountRecord(theta, chi, counts, exposure))
    if not records:
        raise DataFormatError(f"{source}: header only, no data rows")
    return records


def read_counts_csv(path) -> list[CountRecord]:
    path = Path(path)
    return parse_counts_csv(path.read_text(encoding="utf-8"), str(path))


# ----------------------------------------------------------------- reports

def scan_rows(scan: Sequence[tuple[float, CHSHResult]]) -> list[dict]:
    return [
        {"chi_rad": chi, "S": res.S, "sigma_S": res.sigma_S, "violation_sigmas": res.violation_sigmas}
        for chi, res in scan
    ]


def fringe_rows(fits: Sequence[FringeFit]) -> list[dict]:
    return [
        {
            "theta_rad": f.theta,
            "visibility": f.visibility,
            "amplitude": f.amplitude,
            "offset": f.offset,
            "phase_rad": f.phase,
            "residual_rms": f.residual_rms,
            "nonphysical": f.nonphysical,
        }
        for f in fits
    ]


def rows_to_csv(rows: Sequence[dict], header: Sequence[str]) -> str:
    return _csv_text(header, ([row[h] for h in header] for row in rows))


def rows_to_json(rows: Sequence[dict], **meta) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        return v

    payload = dict(meta)
    payload["rows"] = [{k: clean(v) for k, v in row.items()} for row in rows]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def format_table(rows: Sequence[dict], header: Sequence[str], digits: int = 5) -> str:
    def fmt(v):
        if isinstance(v, bool):
            return "yes" if v else "no"
        if isinstance(v, float):
            return f"{v:.{digits}g}"
        return str(v)

    cells = [[fmt(r[h]) for h in header] for r in rows]
    widths = [max([len(h)] + [len(c[i]) for c in cells]) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)

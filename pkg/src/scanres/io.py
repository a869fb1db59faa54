"""File formats: CSV tables, map/image grids with JSON sidecars, TOML config.

CSV schemas (header row required, lowercase):
    trace       freq_hz,re,im
    power sweep p_dbm,qi
    temp sweep  t_k,qi
    approach    z_m,delta_f0_hz       (delta_f0_hz = downward shift, >= 0)
    timeseries  t_s,phase_rad         (uniform sampling)
    device table device,w_um,l_um,s_um,ec_ghz,ej_ghz,t2r_us

Material maps and scan images are plain CSV grids next to a JSON sidecar
{pitch_m, origin_m, channel}; material grids encode metal as 0 and
dielectrics as their relative permittivity.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .response import ComplexTrace
from .sensitivity import PhaseTimeSeries
from .tipsample import MaterialMap, ScanImage


class DataFormatError(ValueError):
    """Malformed or inconsistent input data (CLI exit code 2)."""


def _read_rows(path, columns):
    """Read a CSV with the given header; returns an (n, len(columns)) array.

    Errors carry the 1-based line number of the offending row.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot read: {exc}") from exc
    reader = csv.reader(text.splitlines())
    rows = []
    header = None
    header_line = 0
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if row[0].lstrip().startswith("#"):
            continue
        if header is None:
            header = [c.strip().lower() for c in row]
            header_line = lineno
            continue
        rows.append((lineno, row))
    if header is None:
        raise DataFormatError(f"{path}: empty file")
    missing = [c for c in columns if c not in header]
    if missing:
        raise DataFormatError(
            f"{path}:{header_line}: missing column(s) {', '.join(missing)} "
            f"(found: {', '.join(header)})"
        )
    idx = [header.index(c) for c in columns]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    out = np.empty((len(rows), len(columns)))
    for i, (lineno, row) in enumerate(rows):
        if len(row) < len(header):
            raise DataFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for j, col in enumerate(idx):
            try:
                out[i, j] = float(row[col])
            except ValueError as exc:
                raise DataFormatError(
                    f"{path}:{lineno}: bad value {row[col]!r} in column {columns[j]!r}"
                ) from exc
    return out


def read_trace(path) -> ComplexTrace:
    arr = _read_rows(path, ["freq_hz", "re", "im"])
    try:
        return ComplexTrace(arr[:, 0], arr[:, 1] + 1j * arr[:, 2])
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def write_trace(path, trace: ComplexTrace) -> None:
    _write_csv(path, ["freq_hz", "re", "im"],
               zip(trace.freqs, trace.samples.real, trace.samples.imag))


def read_sweep(path, mode: str) -> np.ndarray:
    """Power sweeps as (P_watts, Qi); temperature sweeps as (T_K, Qi)."""
    if mode == "power":
        arr = _read_rows(path, ["p_dbm", "qi"])
        arr[:, 0] = 1e-3 * 10.0 ** (arr[:, 0] / 10.0)
        return arr
    if mode == "temperature":
        return _read_rows(path, ["t_k", "qi"])
    raise ValueError(f"unknown sweep mode {mode!r}")


def read_approach(path) -> np.ndarray:
    return _read_rows(path, ["z_m", "delta_f0_hz"])


def read_timeseries(path) -> PhaseTimeSeries:
    """CSV t_s,phase_rad or JSON {sample_rate, samples}."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            obj = json.loads(path.read_text())
            return PhaseTimeSeries(float(obj["sample_rate"]),
                                   np.asarray(obj["samples"], dtype=float))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{path}: bad timeseries JSON: {exc}") from exc
    arr = _read_rows(path, ["t_s", "phase_rad"])
    t = arr[:, 0]
    dt = np.diff(t)
    if t.size < 2 or np.any(dt <= 0):
        raise DataFormatError(f"{path}: time column must be strictly increasing")
    if np.max(np.abs(dt - dt[0])) > 1e-6 * dt[0]:
        raise DataFormatError(f"{path}: sampling must be uniform")
    try:
        return PhaseTimeSeries(1.0 / dt[0], arr[:, 1])
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def read_device_table(path) -> list:
    """Device table rows as dicts; energies converted to Hz, geometry kept
    as metadata in um."""
    path = Path(path)
    arr = _read_rows(path, ["w_um", "l_um", "s_um", "ec_ghz", "ej_ghz", "t2r_us"])
    names = []
    reader = csv.reader(path.read_text().splitlines())
    header = None
    for row in reader:
        if not row or row[0].lstrip().startswith("#"):
            continue
        if header is None:
            header = [c.strip().lower() for c in row]
            if "device" not in header:
                raise DataFormatError(f"{path}: missing 'device' column")
            dev_idx = header.index("device")
            continue
        names.append(row[dev_idx].strip())
    return [
        {
            "device": name,
            "w_um": row[0], "l_um": row[1], "s_um": row[2],
            "ec_hz": row[3] * 1e9, "ej_hz": row[4] * 1e9,
            "t2r_s": row[5] * 1e-6,
        }
        for name, row in zip(names, arr)
    ]


def read_material_map(path) -> MaterialMap:
    path = Path(path)
    sidecar = path.with_suffix(".json")
    try:
        meta = json.loads(sidecar.read_text())
        grid = np.loadtxt(path, delimiter=",", ndmin=2)
        return MaterialMap(grid, float(meta["pitch_m"]),
                           tuple(meta.get("origin_m", (0.0, 0.0))))
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot read map or sidecar: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: bad material map: {exc}") from exc


def write_material_map(path, material: MaterialMap) -> None:
    path = Path(path)
    np.savetxt(path, material.grid, delimiter=",", fmt="%.12g")
    path.with_suffix(".json").write_text(json.dumps(
        {"pitch_m": material.pitch, "origin_m": list(material.origin),
         "channel": "material"}, indent=2, sort_keys=True) + "\n")


def write_scan_image(path, image: ScanImage) -> None:
    path = Path(path)
    np.savetxt(path, image.grid, delimiter=",", fmt="%.12g")
    path.with_suffix(".json").write_text(json.dumps(
        {"pitch_m": image.pitch, "origin_m": list(image.origin),
         "channel": image.channel}, indent=2, sort_keys=True) + "\n")


def read_scan_image(path) -> ScanImage:
    path = Path(path)
    try:
        meta = json.loads(path.with_suffix(".json").read_text())
        grid = np.loadtxt(path, delimiter=",", ndmin=2)
        return ScanImage(grid, float(meta["pitch_m"]), meta.get("channel", "phase_rad"),
                         tuple(meta.get("origin_m", (0.0, 0.0))))
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot read image or sidecar: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: bad scan image: {exc}") from exc


def write_spectrum(path, spectrum) -> None:
    _write_csv(path, ["freq_hz", "asd"], zip(spectrum.freqs, spectrum.asd))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else f"{float(v):.12g}" for v in row])


def load_config(path, allowed: dict) -> dict:
    """Load a TOML config; every section and key must appear in `allowed`
    (section -> set of keys).  Unknown keys are rejected."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise DataFormatError(f"{path}: invalid TOML: {exc}") from exc
    for section, content in cfg.items():
        if section not in allowed:
            raise DataFormatError(f"{path}: unknown config section [{section}]")
        if not isinstance(content, dict):
            raise DataFormatError(f"{path}: [{section}] must be a table")
        unknown = set(content) - set(allowed[section])
        if unknown:
            raise DataFormatError(
                f"{path}: unknown key(s) in [{section}]: {', '.join(sorted(unknown))}"
            )
    return cfg

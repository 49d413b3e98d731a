"""CSV + JSON-sidecar storage for series, filter taps and recovery results.

A series ``name.csv`` holds columns k,t,re,im; ``name.json`` holds the header
{sample_period, start_index, length} and, for folded data, the modulo
configuration. Floats are written with ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import IngestError
from .filters import FilterTaps
from .modulo import FoldedSeries, ModuloConfig
from .signals import ComplexSeries

CSV_COLUMNS = ("k", "t", "re", "im")


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def series_header(series: ComplexSeries) -> dict:
    header = {
        "sample_period": series.sample_period,
        "start_index": series.start_index,
        "length": len(series),
    }
    if isinstance(series, FoldedSeries):
        header.update(series.config.header())
    return header


def write_series(series: ComplexSeries, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for k, z in zip(series.indices, series.samples):
            w.writerow((int(k), repr(float(k * series.sample_period)),
                        repr(float(z.real)), repr(float(z.imag))))
    with open(sidecar_path(path), "w") as fh:
        json.dump(series_header(series), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _read_header(path) -> dict:
    hp = sidecar_path(path)
    try:
        header = json.loads(hp.read_text())
    except FileNotFoundError:
        raise IngestError(f"missing header file {hp}") from None
    except json.JSONDecodeError as exc:
        raise IngestError(f"malformed header {hp}: {exc.msg}", exc.lineno) from None
    if not isinstance(header, dict):
        raise IngestError(f"header {hp} is not an object")
    for key, kind in (("sample_period", (int, float)), ("start_index", int), ("length", int)):
        if key not in header:
            raise IngestError(f"header {hp} lacks {key!r}")
        if isinstance(header[key], bool) or not isinstance(header[key], kind):
            raise IngestError(f"header {hp}: {key!r} has the wrong type")
    if not header["sample_period"] > 0 or header["length"] < 1:
        raise IngestError(f"header {hp}: invalid sample_period or length")
    return header


def _modulo_config(header) -> ModuloConfig:
    try:
        return ModuloConfig(
            threshold=float(header["lambda"]),
            bit_depth=header.get("bit_depth"),
            noise_snr_db=header.get("noise_snr_db"),
            noise_seed=header.get("noise_seed"),
            noise_placement=header.get("noise_placement") or "pre-fold",
            complex_noise=bool(header.get("complex_noise", False)),
        )
    except (TypeError, ValueError) as exc:
        raise IngestError(f"invalid modulo header: {exc}") from None


def ingest_series(path):
    """Load a series written by :func:`write_series`; returns FoldedSeries when the
    header carries a threshold. Nothing is returned unless the whole file validates."""
    path = Path(path)
    header = _read_header(path)
    cfg = _modulo_config(header) if "lambda" in header else None
    n = header["length"]
    k0 = header["start_index"]
    values = np.empty(n, dtype=np.complex128)
    try:
        fh = open(path, newline="")
    except FileNotFoundError:
        raise IngestError(f"missing data file {path}") from None
    with fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if head is None or tuple(head) != CSV_COLUMNS:
            raise IngestError(f"expected columns {','.join(CSV_COLUMNS)}", 1)
        count = 0
        for row in reader:
            line = reader.line_num
            if count >= n:
                raise IngestError(f"more rows than the header length {n}", line)
            if len(row) != 4:
                raise IngestError(f"expected 4 fields, got {len(row)}", line)
            try:
                k = int(row[0])
                re_, im_ = float(row[2]), float(row[3])
            except ValueError:
                raise IngestError("unparseable number", line) from None
            if k != k0 + count:
                raise IngestError(f"index {k} out of sequence (expected {k0 + count})", line)
            if not (math.isfinite(re_) and math.isfinite(im_)):
                raise IngestError("non-finite sample", line)
            if cfg is not None and not cfg.may_exceed_range:
                lam = cfg.threshold
                if abs(re_) > lam or abs(im_) > lam:
                    raise IngestError(f"folded sample outside [-{lam}, {lam}]", line)
            values[count] = complex(re_, im_)
            count += 1
    if count != n:
        raise IngestError(f"truncated file: {count} rows, header says {n}")
    if cfg is not None:
        return FoldedSeries(values, header["sample_period"], k0, config=cfg)
    return ComplexSeries(values, header["sample_period"], k0)


def taps_to_dict(filt: FilterTaps) -> dict:
    return {
        "carriers_rad_s": list(filt.carriers),
        "sample_period": filt.sample_period,
        "order": filt.order,
        "normalized": filt.normalized,
        "normalizer": {"re": filt.normalizer.real, "im": filt.normalizer.imag},
        "taps": [{"re": float(z.real), "im": float(z.imag)} for z in filt.taps],
    }


def taps_from_dict(d: dict) -> FilterTaps:
    norm = d.get("normalizer", {"re": 1.0, "im": 0.0})
    return FilterTaps(
        taps=[complex(t["re"], t["im"]) for t in d["taps"]],
        order=int(d["order"]),
        carriers=tuple(d["carriers_rad_s"]),
        sample_period=float(d["sample_period"]),
        normalized=bool(d["normalized"]),
        normalizer=complex(norm["re"], norm["im"]),
    )


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return path


def write_taps(filt: FilterTaps, path) -> Path:
    return write_json(taps_to_dict(filt), path)


def read_taps(path) -> FilterTaps:
    return taps_from_dict(json.loads(Path(path).read_text()))


def write_recovery(result, path) -> Path:
    """Recovered series at ``path`` (CSV + header) and the result record beside it."""
    path = Path(path)
    write_series(result.recovered, path)
    return write_json(result.to_dict(), path.with_name(path.stem + ".result.json"))

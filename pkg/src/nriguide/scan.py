"""Parameter sweeps: one rate breakdown per sweep point, written as CSV.

Each run writes ``<out>.csv`` and a ``<out>.meta.json`` sidecar carrying the
config, its hash, tolerances and the integration route of every class.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScanConfig, validate_config
from .green import integrate_class, total_breakdown
from .modes import find_guided_roots
from .rates import CLASSES, COMPONENTS, POLS

log = logging.getLogger(__name__)

POSITION_COLUMNS = ("d3_prime", "z0_prime", "omega", "gamma")
SUMMARY_COLUMNS = ("Gr", "Gsub", "Gg", "Gs", "Gx", "Gz", "Gtot", "kappa")
TAIL_COLUMNS = ("refined", "error_estimate", "method_guided", "method_surface", "status")
GOLDEN = (math.sqrt(5) - 1) / 2


def entry_columns() -> list[str]:
    return [f"{c}_{p}{q}" for c in CLASSES for p in POLS for q in COMPONENTS if not (p == "s" and q == "z")]


def columns(config: ScanConfig) -> list[str]:
    rates = list(SUMMARY_COLUMNS) + entry_columns()
    if config.outputs:
        unknown = [o for o in config.outputs if o not in rates]
        if unknown:
            raise ValueError(f"unknown output columns: {', '.join(unknown)}")
        rates = [c for c in rates if c in config.outputs]
    return list(POSITION_COLUMNS) + rates + list(TAIL_COLUMNS)


@dataclass
class ScanResult:
    rows: list[dict]
    columns: list[str]
    metadata: dict
    csv_path: Path | None = None
    meta_path: Path | None = None
    peaks: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r["status"] == "ok" for r in self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)


def evaluate_point(raw: dict, value: float | None, refined: bool = False,
                   force_quadrature: bool = False) -> dict:
    """One CSV row. Failures become a row with NaN rates and the error message."""
    config = validate_config(raw)
    stack, omega = config.point(value) if value is not None else (config.stack(), config.omega)
    row = {"d3_prime": stack.d3_prime, "z0_prime": stack.z0_prime, "omega": omega,
           "gamma": stack.absorption, "refined": int(refined)}
    threshold = 0.0 if force_quadrature else config.residue_threshold
    try:
        b = total_breakdown(stack, omega, rtol=config.rtol, threshold=threshold)
    except (ArithmeticError, ValueError) as exc:
        row.update({c: math.nan for c in SUMMARY_COLUMNS})
        row.update({c: math.nan for c in entry_columns()})
        row.update(error_estimate=math.inf, method_guided="", method_surface="",
                   status=f"{type(exc).__name__}: {exc}")
        return row
    row.update(b.flat())
    row.update(error_estimate=b.error_estimate, method_guided=b.methods["guided"],
               method_surface=b.methods["surface"], status="ok" if b.converged else "unconverged")
    return row


def guided_count(config: ScanConfig, value: float, pol: str) -> int:
    stack, omega = config.point(value)
    return len(find_guided_roots(stack.lossless(), omega, pol))


def locate_transition(count, lo: float, hi: float, rtol: float = 1e-13) -> float:
    """Bisect the point where the integer-valued ``count`` changes between lo and hi."""
    c_lo = count(lo)
    while hi - lo > rtol * max(abs(hi), 1.0):
        mid = 0.5 * (lo + hi)
        if count(mid) == c_lo:
            lo = mid
        else:
            hi = mid
    return hi


def find_folds(config: ScanConfig, values) -> list[tuple[str, float]]:
    """Sweep positions where a guided mode pair appears or merges (root count changes by two or more)."""
    folds = []
    for pol in POLS:
        counts = [guided_count(config, v, pol) for v in values]
        for i in range(len(values) - 1):
            if abs(counts[i + 1] - counts[i]) >= 2:
                x = locate_transition(lambda v: guided_count(config, v, pol), values[i], values[i + 1])
                folds.append((pol, x))
    merged: list[tuple[str, float]] = []
    for pol, x in sorted(folds, key=lambda t: t[1]):
        if merged and abs(x - merged[-1][1]) <= 1e-9 * max(abs(x), 1.0):
            merged[-1] = (merged[-1][0] + pol, merged[-1][1])
        else:
            merged.append((pol, x))
    return merged


def refine_peak(f, x0: float, span: float, points: int = 25, iterations: int = 60) -> tuple[float, float]:
    """Maximise ``f`` near ``x0``: a log-spaced ladder on both sides, then golden section.

    Suited to resonances whose width is unknown over many decades.
    """
    offsets = span * np.logspace(-10, 0, points)
    xs = np.concatenate([x0 - offsets[::-1], [x0], x0 + offsets])
    vals = np.array([f(x) for x in xs])
    i = int(np.argmax(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if b - a <= 1e-15 * max(abs(x0), 1.0):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = c if fc > fd else d
    best = max(fc, fd)
    if vals[i] > best:
        return float(xs[i]), float(vals[i])
    return float(x), float(best)


def guided_peak(config: ScanConfig, x_fold: float, span: float) -> tuple[float, float]:
    """Location and height of the lossy guided-class rate maximum next to a fold."""

    def gg(v):
        stack, omega = config.point(v)
        res = integrate_class(stack, omega, "guided", rtol=config.rtol, method="quadrature")
        return sum(res.values.values())

    return refine_peak(gg, x_fold, span)


def _run_rows(raw: dict, values, jobs: int) -> list[dict]:
    if jobs <= 1 or len(values) < 2:
        return [evaluate_point(raw, float(v)) for v in values]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(evaluate_point, [raw] * len(values), [float(v) for v in values],
                             chunksize=max(1, len(values) // (4 * jobs))))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, rows: list[dict], cols: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in cols])


def read_csv(path) -> list[dict]:
    """Rows of a scan CSV with numeric fields converted back to numbers."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            conv = {}
            for k, v in row.items():
                try:
                    conv[k] = float(v)
                except ValueError:
                    conv[k] = v
            out.append(conv)
    return out


def run_scan(config: ScanConfig, out: str | Path | None = None, jobs: int | None = None) -> ScanResult:
    """Evaluate every sweep point; with ``refine_folds`` also the rate maxima next to each fold."""
    if config.sweep is None:
        raise ValueError("config has no sweep")
    jobs = jobs or config.jobs
    cols = columns(config)
    values = config.sweep.values()
    rows = _run_rows(config.raw, values, jobs)

    peaks = []
    if config.refine_folds and config.sweep.axis in ("d3_prime", "omega"):
        if config.layer3.absorption == 0:
            log.warning("fold refinement needs an absorbing middle layer; skipped")
        else:
            step = float(values[1] - values[0])
            for pol, x_fold in find_folds(config, values):
                x, height = guided_peak(config, x_fold, step)
                row = evaluate_point(config.raw, x, refined=True, force_quadrature=True)
                rows.append(row)
                peaks.append({"pol": pol, "fold": float(x_fold), "position": x, "Gg": height,
                              "Gtot": row["Gtot"], "kappa": row["kappa"]})
    axis = config.sweep.axis
    key = {"d3_prime": "d3_prime", "z0_prime": "z0_prime", "omega": "omega", "gamma_absorption": "gamma"}[axis]
    rows.sort(key=lambda r: (r[key], r["refined"]))

    finite_err = [r["error_estimate"] for r in rows if math.isfinite(r["error_estimate"])]
    metadata = {
        "name": config.name,
        "package_version": __version__,
        "config": config.raw,
        "config_hash": config.config_hash(),
        "columns": cols,
        "points": len(rows),
        "rtol": config.rtol,
        "residue_threshold": config.residue_threshold,
        "methods": {cls: sorted({r[f"method_{cls}"] for r in rows if r[f"method_{cls}"]})
                    for cls in ("guided", "surface")},
        "max_error_estimate": max(finite_err) if finite_err else None,
        "failed": [r["status"] for r in rows if r["status"] not in ("ok", "unconverged")],
        "unconverged": sum(r["status"] == "unconverged" for r in rows),
        "peaks": peaks,
    }
    result = ScanResult(rows=rows, columns=cols, metadata=metadata, peaks=peaks)
    if out is not None:
        out = Path(out)
        csv_path = out if out.suffix == ".csv" else out.with_suffix(".csv")
        meta_path = csv_path.with_suffix(".meta.json")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        write_csv(csv_path, rows, cols)
        meta_path.write_text(json.dumps(metadata, indent=2, sort_keys=True, default=str) + "\n")
        result.csv_path, result.meta_path = csv_path, meta_path
    return result


def figure_preset(name: str, out_dir: str | Path, jobs: int = 1) -> list[ScanResult]:
    """Materialise a figure preset config and run its sweep(s) into ``out_dir``."""
    from .config import preset_raw

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw = preset_raw(name)
    (out_dir / f"{name}.config.json").write_text(json.dumps(raw, indent=2, sort_keys=True) + "\n")
    config = validate_config(raw)
    if not config.gammas:
        return [run_scan(config, out_dir / f"{name}.csv", jobs=jobs)]
    results = []
    for gamma in config.gammas:
        sub = config.with_gamma(gamma)
        # the fold of the lossless kernel sits at the reference frequency by construction
        sub = validate_config({**sub.raw, "refine_folds": True})
        results.append(run_scan(sub, out_dir / f"{name}_gamma{gamma:g}.csv", jobs=jobs))
    summary = [{"gamma": g, "peaks": r.peaks} for g, r in zip(config.gammas, results)]
    (out_dir / f"{name}.peaks.json").write_text(json.dumps(summary, indent=2) + "\n")
    return results

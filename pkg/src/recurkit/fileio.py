"""File formats: spectrum and mode-set JSON documents, crossing-report JSON
and CSV, and sweep CSV.

Floats are serialized at 17 significant digits, which round-trips doubles
losslessly: parse -> re-emit is byte-stable.  CSV uses a header row and '.'
decimals regardless of locale.
"""

from __future__ import annotations

import json
import math
import warnings

import numpy as np

from .crossings import CrossingReport
from .errors import ValidationError
from .models import SweepRow
from .quasifree import ModeSet
from .spectrum import DiscreteSpectrum, validate_spectrum

SWEEP_CSV_HEADER = "h1,h2,kappa,L,u,mean_fidelity_or_meanlogF,deltaE_or_sigmaZ,sigmaZprime,TR"
REPORT_CSV_HEADER = "index,t_root"


class UnknownKeyWarning(UserWarning):
    """A document carried an unrecognized top-level key (ignored)."""


def fmt_float(x: float) -> str:
    """Render a float at 17 significant digits (lossless round-trip)."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _emit(value, indent: int, pieces: list[str]) -> None:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for i, (key, val) in enumerate(value.items()):
            pieces.append(f'{pad}  "{key}": ')
            _emit(val, indent + 1, pieces)
            pieces.append(",\n" if i < len(value) - 1 else "\n")
        pieces.append(pad + "}")
    elif isinstance(value, (list, tuple, np.ndarray)):
        items = list(value)
        if not items:
            pieces.append("[]")
            return
        pieces.append("[\n")
        for i, val in enumerate(items):
            pieces.append(pad + "  ")
            _emit(val, indent + 1, pieces)
            pieces.append(",\n" if i < len(items) - 1 else "\n")
        pieces.append(pad + "]")
    elif isinstance(value, str):
        pieces.append(json.dumps(value))
    elif isinstance(value, bool):
        pieces.append("true" if value else "false")
    elif isinstance(value, (int, np.integer)):
        pieces.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        pieces.append(fmt_float(float(value)))
    elif value is None:
        pieces.append("null")
    else:
        raise ValidationError(f"cannot serialize value of type {type(value)!r}")


def to_json_text(doc: dict) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    pieces: list[str] = []
    _emit(doc, 0, pieces)
    pieces.append("\n")
    return "".join(pieces)


def _load_doc(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("expected a JSON object at the top level")
    return doc


def _check_keys(doc: dict, known: set[str], kind: str) -> None:
    unknown = sorted(set(doc) - known)
    if unknown:
        warnings.warn(
            f"ignoring unknown {kind} keys: {', '.join(unknown)}",
            UnknownKeyWarning,
            stacklevel=3,
        )


def spectrum_doc(s: DiscreteSpectrum) -> dict:
    doc = {"energies": list(s.energies), "weights": list(s.weights)}
    if s.label is not None:
        doc["label"] = s.label
    return doc


def parse_spectrum(text: str) -> DiscreteSpectrum:
    """Parse a spectrum document; unknown top-level keys warn and are ignored."""
    doc = _load_doc(text)
    _check_keys(doc, {"energies", "weights", "label"}, "spectrum")
    if "energies" not in doc or "weights" not in doc:
        raise ValidationError('spectrum document needs "energies" and "weights"')
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise ValidationError('"label" must be a string')
    return validate_spectrum(doc["energies"], doc["weights"], label)


def modeset_doc(m: ModeSet) -> dict:
    return {
        "alpha": list(m.alpha),
        "epsilon": list(m.epsilon),
        "L": int(m.sites if m.sites is not None else m.count),
    }


def parse_modeset(text: str) -> ModeSet:
    doc = _load_doc(text)
    _check_keys(doc, {"alpha", "epsilon", "L"}, "mode-set")
    if "alpha" not in doc or "epsilon" not in doc:
        raise ValidationError('mode-set document needs "alpha" and "epsilon"')
    sites = doc.get("L")
    if sites is not None and not isinstance(sites, int):
        raise ValidationError('"L" must be an integer')
    return ModeSet(
        alpha=np.asarray(doc["alpha"], dtype=float),
        epsilon=np.asarray(doc["epsilon"], dtype=float),
        sites=sites,
    )


def report_doc(r: CrossingReport) -> dict:
    return {
        "level_u": r.level_u,
        "count": r.count,
        "density_estimate": r.density_estimate,
        "density_stderr": r.density_stderr,
        "suspected_tangencies": r.suspected_tangencies,
        "supremum_F": r.supremum_F,
        "supremum_time": r.supremum_time,
        "samples_evaluated": r.samples_evaluated,
        "burn_in": r.burn_in,
        "horizon_T": r.horizon_T,
        "root_times": list(r.root_times),
    }


def report_csv_text(r: CrossingReport) -> str:
    lines = [REPORT_CSV_HEADER]
    for i, t in enumerate(r.root_times):
        lines.append(f"{i},{fmt_float(t)}")
    return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return fmt_float(float(value))


def sweep_csv_text(rows: list[SweepRow]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        mean = r.mean_fidelity if r.mean_fidelity is not None else r.mean_logF
        spread = r.delta_E if r.delta_E is not None else r.sigma_Z
        lines.append(
            ",".join(
                [
                    fmt_float(r.h1),
                    fmt_float(r.h2),
                    fmt_float(r.kappa),
                    str(r.L),
                    fmt_float(r.u),
                    _cell(mean),
                    _cell(spread),
                    _cell(r.sigma_Zprime),
                    _cell(r.recurrence_time),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def universal_csv_text(xs, us) -> str:
    lines = ["x,U"]
    for x, u in zip(xs, us):
        lines.append(f"{fmt_float(x)},{fmt_float(u)}")
    return "\n".join(lines) + "\n"

"""Ensemble files, trajectory dumps and run manifests."""

import json
import platform
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from nlsgibbs.models import ModeSet, SpectralField
from nlsgibbs.spectral import field_from_dict, field_to_dict

MANIFEST_FILENAME = "manifest.json"
ENSEMBLE_FORMAT = "nlsgibbs-ensemble"


def _dumps(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def write_ensemble(
    path: Union[str, Path],
    mode_set: ModeSet,
    kappa: float,
    coeffs: np.ndarray,
    weights: Optional[np.ndarray] = None,
    header: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write samples as JSON Lines: one header line, then one field per line.

    Floats are written with their shortest round-trip representation, so the
    same samples always give byte-identical files.

    Args:
        path: Target file
        mode_set: Modes of the samples
        kappa: Mass parameter recorded in the header
        coeffs: Sample coefficients, shape (n, d)
        weights: Optional per-sample weights (Gibbs ensembles)
        header: Extra header entries (seed, potential, config hash, ...)

    Returns:
        The written path
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    head = {
        "format": ENSEMBLE_FORMAT,
        "k_max": int(mode_set.k_max),
        "kappa": float(kappa),
        "n_samples": int(coeffs.shape[0]),
        "weighted": weights is not None,
    }
    head.update(header or {})
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write(_dumps(head) + "\n")
        for i, row in enumerate(coeffs):
            record = field_to_dict(SpectralField(mode_set, row))
            record.pop("kappa")
            if weights is not None:
                record["weight"] = float(weights[i])
            f.write(_dumps(record) + "\n")
    return target


def read_ensemble(
    path: Union[str, Path]
) -> Tuple[Dict[str, Any], np.ndarray, Optional[np.ndarray]]:
    """
    Read an ensemble file.

    Returns:
        Header, coefficient array (n, d) and weights (None if unweighted)

    Raises:
        ValueError: If the header or a record is malformed
    """
    with open(path, encoding="utf-8") as f:
        lines = [line for line in f if line.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = json.loads(lines[0])
    if header.get("format") != ENSEMBLE_FORMAT:
        raise ValueError(f"{path} is not an ensemble file")
    d = ModeSet(int(header["k_max"])).d
    rows: List[np.ndarray] = []
    weights: List[float] = []
    for line in lines[1:]:
        record = json.loads(line)
        field, _ = field_from_dict(record)
        rows.append(field.coeffs)
        if header.get("weighted"):
            weights.append(float(record["weight"]))
    coeffs = np.array(rows) if rows else np.zeros((0, d), dtype=complex)
    if coeffs.shape[0] != header["n_samples"]:
        raise ValueError(
            f"{path}: header announces {header['n_samples']} samples, "
            f"found {coeffs.shape[0]}"
        )
    return header, coeffs, (np.array(weights) if header.get("weighted") else None)


def write_trajectory(
    path: Union[str, Path],
    times: Iterable[float],
    fields: Iterable[SpectralField],
    kappa: float,
) -> Path:
    """Snapshots as JSON Lines of {t, field} records."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        for t, field in zip(times, fields):
            record = {"t": float(t), "field": field_to_dict(field, kappa)}
            f.write(_dumps(record) + "\n")
    return target


def package_versions() -> Dict[str, str]:
    """Versions of Python and the runtime dependencies."""
    versions = {"python": platform.python_version()}
    for name in ("nlsgibbs", "numpy", "scipy", "click"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(
    directory: Path,
    command: str,
    config_hash: str,
    started_at: str,
    durations: Dict[str, float],
    outputs: Iterable[Path] = (),
    status: str = "ok",
) -> Path:
    """
    Record what ran, on which scenario, how long it took and what it wrote.

    Returns:
        Path of the manifest
    """
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config_hash": config_hash,
        "started_at": started_at,
        "durations": durations,
        "versions": package_versions(),
        "outputs": sorted(str(Path(p).name) for p in outputs),
        "status": status,
    }
    target = directory / MANIFEST_FILENAME
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
    return target

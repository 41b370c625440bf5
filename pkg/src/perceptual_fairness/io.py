"""File ingestion: feature matrices, labels, paired metrics and group manifests.

Feature files are CSV (one row per sample, optional single header line) or the
binary ``PFF1`` layout::

    b"PFF1" | uint32 LE rows | uint32 LE dim | rows*dim float32 LE, row-major

Paired images are ``.npy`` arrays (lossless) in two directories, matched by
file name.  Paired scalar files hold one number per line.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .fairness import DIVERGENCES, FairnessReport, GroupEvaluationInput, evaluate_groups

__all__ = [
    "MAGIC",
    "IngestError",
    "load_features",
    "save_features",
    "load_labels",
    "load_scalars",
    "load_image_pairs",
    "GroupEntry",
    "Manifest",
    "load_manifest",
    "evaluate",
]

MAGIC = b"PFF1"
_HEADER = struct.Struct("<4sII")


class IngestError(ValueError):
    """A referenced file is missing or malformed; the message names the path."""


def _check_finite(m: NDArray[np.float64], path: Path) -> None:
    bad = np.argwhere(~np.isfinite(m))
    if bad.size:
        r, c = (int(v) for v in bad[0])
        raise IngestError(f"{path}: non-finite value {m[r, c]!r} at row {r}, column {c}")


def _load_binary(path: Path, raw: bytes) -> NDArray[np.float64]:
    if len(raw) < _HEADER.size:
        raise IngestError(f"{path}: truncated header ({len(raw)} bytes)")
    _, rows, dim = _HEADER.unpack_from(raw)
    if dim == 0:
        raise IngestError(f"{path}: feature dimension is 0")
    expected = rows * dim * 4
    payload = len(raw) - _HEADER.size
    if payload < expected:
        raise IngestError(f"{path}: truncated payload, expected {expected} bytes, found {payload}")
    if payload > expected:
        raise IngestError(f"{path}: payload has {payload - expected} trailing bytes beyond {expected}")
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size, count=rows * dim)
    return data.reshape(rows, dim).astype(np.float64)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _load_csv(path: Path, text: str) -> NDArray[np.float64]:
    rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise IngestError(f"{path}: no data rows")
    dim = len(rows[0])
    out = np.empty((len(rows), dim))
    for i, row in enumerate(rows):
        if len(row) != dim:
            raise IngestError(f"{path}: row {i} has {len(row)} columns, expected {dim}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise IngestError(f"{path}: unparseable value {cell!r} at row {i}, column {j}") from None
    return out


def load_features(path: str | Path) -> NDArray[np.float64]:
    """Load an ``(n, d)`` float64 feature matrix, detecting binary by magic bytes."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IngestError(f"{path}: {exc.strerror or exc}") from None
    if raw[:4] == MAGIC:
        m = _load_binary(path, raw)
    else:
        m = _load_csv(path, raw.decode("utf-8"))
    if m.shape[1] == 0:
        raise IngestError(f"{path}: feature dimension is 0")
    _check_finite(m, path)
    return m


def save_features(path: str | Path, matrix: ArrayLike, fmt: str = "csv") -> Path:
    """Write a matrix as CSV (round-trip float repr) or binary ``PFF1`` (float32)."""
    path = Path(path)
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for row in m:
                writer.writerow([repr(float(v)) for v in row])
    elif fmt == "binary":
        payload = np.ascontiguousarray(m, dtype="<f4")
        path.write_bytes(_HEADER.pack(MAGIC, m.shape[0], m.shape[1]) + payload.tobytes())
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def load_labels(path: str | Path) -> list[str]:
    """One label per line; trailing blank lines are fine, interior ones are not."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise IngestError(f"{path}: {exc.strerror or exc}") from None
    while lines and not lines[-1].strip():
        lines.pop()
    labels = []
    for i, line in enumerate(lines, start=1):
        label = line.strip()
        if not label:
            raise IngestError(f"{path}: blank label on line {i}")
        labels.append(label)
    return labels


def load_scalars(path: str | Path) -> list[float]:
    """One finite float per line."""
    values = []
    for i, label in enumerate(load_labels(path), start=1):
        try:
            v = float(label)
        except ValueError:
            raise IngestError(f"{path}: line {i} is not a number: {label!r}") from None
        if not np.isfinite(v):
            raise IngestError(f"{path}: non-finite value on line {i}")
        values.append(v)
    return values


def load_image_pairs(real_dir: str | Path, recon_dir: str | Path) -> list[tuple[NDArray, NDArray]]:
    """Pair ``.npy`` images by file name across two directories."""
    real_dir, recon_dir = Path(real_dir), Path(recon_dir)
    for d in (real_dir, recon_dir):
        if not d.is_dir():
            raise IngestError(f"{d}: not a directory")
    real = {p.name: p for p in real_dir.glob("*.npy")}
    recon = {p.name: p for p in recon_dir.glob("*.npy")}
    if set(real) != set(recon):
        missing = sorted(set(real) ^ set(recon))
        raise IngestError(f"{real_dir} / {recon_dir}: unmatched images {missing[:5]}")
    return [(np.load(real[n]), np.load(recon[n])) for n in sorted(real)]


@dataclass
class GroupEntry:
    group: str
    real_features: Path
    recon_features: Path
    labels: Path | None = None
    paired_scalars: dict[str, Path] = field(default_factory=dict)
    paired_images: tuple[Path, Path] | None = None
    peak: float = 1.0


@dataclass
class Manifest:
    """Evaluation plan: group files, requested divergences and output path.

    JSON layout (paths relative to the manifest's directory)::

        {"groups": [{"id": "...", "real_features": "...", "recon_features": "...",
                     "labels": "...", "paired_scalars": {"lpips": "..."},
                     "paired_images": {"real_dir": "...", "recon_dir": "...", "peak": 255}}],
         "metrics": ["kid", "fid"], "knn_k": 3, "output": "report.json",
         "kid_blocks": {"subset_size": 100, "n_subsets": 10, "seed": 0}, "bw_adjust": 2.0}
    """

    groups: list[GroupEntry]
    metrics: list[str] = field(default_factory=lambda: ["kid", "fid"])
    knn_k: int | None = 3
    output: Path | None = None
    kid_blocks: dict[str, int] | None = None
    bw_adjust: float = 2.0

    def __post_init__(self) -> None:
        if len(self.groups) < 2:
            raise IngestError("manifest needs at least 2 groups")
        ids = [g.group for g in self.groups]
        if len(set(ids)) != len(ids):
            raise IngestError(f"duplicate group ids in manifest: {ids}")
        for m in self.metrics:
            if m not in DIVERGENCES:
                raise IngestError(f"unknown metric {m!r}; expected one of {DIVERGENCES}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: str | Path = ".") -> Manifest:
        base = Path(base)

        def resolve(p):
            return None if p is None else base / p

        groups = []
        for g in data.get("groups", []):
            images = g.get("paired_images")
            groups.append(
                GroupEntry(
                    group=str(g["id"]),
                    real_features=resolve(g["real_features"]),
                    recon_features=resolve(g["recon_features"]),
                    labels=resolve(g.get("labels")),
                    paired_scalars={k: resolve(v) for k, v in g.get("paired_scalars", {}).items()},
                    paired_images=None if images is None else (resolve(images["real_dir"]), resolve(images["recon_dir"])),
                    peak=float(images.get("peak", 1.0)) if images else 1.0,
                )
            )
        return cls(
            groups=groups,
            metrics=list(data.get("metrics", ["kid", "fid"])),
            knn_k=data.get("knn_k", 3),
            output=resolve(data.get("output")),
            kid_blocks=data.get("kid_blocks"),
            bw_adjust=float(data.get("bw_adjust", 2.0)),
        )


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise IngestError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: invalid JSON ({exc})") from None
    try:
        return Manifest.from_dict(data, path.parent)
    except KeyError as exc:
        raise IngestError(f"{path}: group entry missing {exc}") from None


def _load_group(entry: GroupEntry) -> GroupEvaluationInput:
    real = load_features(entry.real_features)
    recon = load_features(entry.recon_features)
    if real.shape[1] != recon.shape[1]:
        raise IngestError(
            f"{entry.recon_features}: dimension {recon.shape[1]} differs from "
            f"{entry.real_features} ({real.shape[1]})"
        )
    labels = None if entry.labels is None else load_labels(entry.labels)
    scalars = {name: load_scalars(p) for name, p in entry.paired_scalars.items()}
    images = None if entry.paired_images is None else load_image_pairs(*entry.paired_images)
    try:
        return GroupEvaluationInput(entry.group, real, recon, labels, scalars, images, entry.peak)
    except ValueError as exc:
        raise IngestError(f"{entry.recon_features}: {exc}") from None


def evaluate(manifest: Manifest | str | Path) -> FairnessReport:
    """Load every group in the manifest and build the fairness report."""
    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    inputs: Sequence[GroupEvaluationInput] = [_load_group(g) for g in manifest.groups]
    return evaluate_groups(
        inputs,
        metrics=manifest.metrics,
        knn_k=manifest.knn_k,
        kid_blocks=manifest.kid_blocks,
        bw_adjust=manifest.bw_adjust,
    )

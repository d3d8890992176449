"""Dataset discovery, pairing, manifest bookkeeping, and splits.

A manifest is the pipeline's source of truth: one record per image pairing
(RGB + thermal JPG + radiometric TIFF, plus pipeline outputs as they appear)
and the human review decision.  On disk it is JSON Lines: a header line with
the config snapshot, then one record per line.  Decision updates may be
appended as fresh record lines; the loader folds them (last line per id
wins), which keeps writes durable and cheap while `save` rewrites the
compact form.
"""

from __future__ import annotations

import dataclasses
import json
import os
import random
import re
import tempfile
from pathlib import Path

from .radiometric import TiffLoadError, load_tiff
from .pngio import load_mask_png

__all__ = [
    "PENDING",
    "ACCEPTED",
    "EXCLUDED",
    "DECISIONS",
    "ImageRecord",
    "Manifest",
    "LocationCounts",
    "ValidationIssue",
    "can_transition",
    "discover",
    "counts",
    "export_excluded",
    "split",
    "validate",
]

PENDING = "pending"
ACCEPTED = "accepted"
EXCLUDED = "excluded"
DECISIONS = (PENDING, ACCEPTED, EXCLUDED)

_MODALITIES = ("rgb", "thermal", "tiff")


def can_transition(old: str, new: str) -> bool:
    """pending -> accepted|excluded, and accepted <-> excluded (re-review)."""
    if new not in (ACCEPTED, EXCLUDED):
        return False
    return old in DECISIONS and old != new


@dataclasses.dataclass
class ImageRecord:
    id: str
    burn_location: str
    rgb_path: str
    thermal_path: str
    tiff_path: str
    mask_path: str | None = None
    points_path: str | None = None
    selection_report_path: str | None = None
    decision: str = PENDING
    reason: str | None = None

    def __post_init__(self) -> None:
        if self.decision not in DECISIONS:
            raise ValueError(f"unknown decision state: {self.decision!r}")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "ImageRecord":
        fields = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in obj.items() if k in fields})


@dataclasses.dataclass
class Manifest:
    records: list[ImageRecord] = dataclasses.field(default_factory=list)
    config_snapshot: dict = dataclasses.field(default_factory=dict)
    unpaired: list[str] = dataclasses.field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [r.id for r in self.records]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate record ids in manifest: {dupes}")

    def get(self, record_id: str) -> ImageRecord:
        for r in self.records:
            if r.id == record_id:
                return r
        raise KeyError(record_id)

    def save(self, path: str | os.PathLike) -> None:
        """Atomic rewrite (write-temp-rename) of the compact form."""
        path = Path(path)
        header = {"config_snapshot": self.config_snapshot, "unpaired": self.unpaired}
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".manifest-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(header, sort_keys=True) + "\n")
                for r in self.records:
                    fh.write(json.dumps(r.to_json(), sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Manifest":
        records: dict[str, ImageRecord] = {}
        order: list[str] = []
        with open(path, "r", encoding="utf-8") as fh:
            header_line = fh.readline()
            if not header_line.strip():
                raise ValueError(f"manifest {path} is empty")
            header = json.loads(header_line)
            for line in fh:
                if not line.strip():
                    continue
                rec = ImageRecord.from_json(json.loads(line))
                if rec.id not in records:
                    order.append(rec.id)
                records[rec.id] = rec
        return cls(
            records=[records[i] for i in order],
            config_snapshot=header.get("config_snapshot", {}),
            unpaired=list(header.get("unpaired", [])),
        )

    @staticmethod
    def append_record(path: str | os.PathLike, record: ImageRecord) -> None:
        """Durably append an updated record line (folded on the next load)."""
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())


def _stems(directory: Path, pattern: re.Pattern | None) -> dict[str, Path]:
    out: dict[str, Path] = {}
    for f in sorted(directory.iterdir()):
        if not f.is_file():
            continue
        stem = f.stem
        if pattern is not None:
            m = pattern.match(stem)
            if not m:
                continue
            stem = m.group(1)
        if stem in out:
            raise ValueError(f"duplicate stem {stem!r} in {directory}")
        out[stem] = f
    return out


def _has_modalities(root: Path) -> bool:
    return all((root / sub).is_dir() for sub in _MODALITIES)


def discover(
    root: str | os.PathLike,
    pairing_rule: str | None = None,
    location: str | None = None,
    config_snapshot: dict | None = None,
) -> Manifest:
    """Build a manifest from files sharing a stem across rgb/, thermal/ and
    tiff/ subdirectories.

    `root` either holds the three subdirectories directly (one burn location)
    or one child directory per location, each with the three subdirectories.
    `pairing_rule` is an optional regex whose first capture group extracts the
    pairing key from a file's stem.  Files without a complete triplet are
    reported in the manifest's `unpaired` list, never silently dropped.
    """
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"dataset root is not a readable directory: {root}")
    pattern = re.compile(pairing_rule) if pairing_rule else None

    if _has_modalities(root):
        locations = [(location or root.name, root)]
    else:
        locations = [
            (child.name, child) for child in sorted(root.iterdir()) if child.is_dir() and _has_modalities(child)
        ]
        if not locations:
            raise ValueError(
                f"{root} contains no rgb/thermal/tiff layout (directly or per-location)"
            )

    records: list[ImageRecord] = []
    unpaired: list[str] = []
    multi = len(locations) > 1
    for loc_name, loc_root in locations:
        per_mod = {mod: _stems(loc_root / mod, pattern) for mod in _MODALITIES}
        complete = set.intersection(*(set(v) for v in per_mod.values()))
        for mod in _MODALITIES:
            for stem, f in per_mod[mod].items():
                if stem not in complete:
                    unpaired.append(str(f))
        for stem in sorted(complete):
            rec_id = f"{loc_name}__{stem}" if multi else stem
            records.append(
                ImageRecord(
                    id=rec_id,
                    burn_location=loc_name,
                    rgb_path=str(per_mod["rgb"][stem]),
                    thermal_path=str(per_mod["thermal"][stem]),
                    tiff_path=str(per_mod["tiff"][stem]),
                )
            )
    return Manifest(
        records=records,
        config_snapshot=config_snapshot or {},
        unpaired=sorted(unpaired),
    )


@dataclasses.dataclass(frozen=True)
class LocationCounts:
    excluded: int
    final: int
    pending: int

    @property
    def discovered(self) -> int:
        return self.excluded + self.final + self.pending


def counts(manifest: Manifest) -> dict[str, LocationCounts]:
    """Per-location (excluded, final=accepted, pending) tallies plus a total
    row under the key "All Burn Locations"."""
    tally: dict[str, dict[str, int]] = {}
    for r in manifest.records:
        loc = tally.setdefault(r.burn_location, {d: 0 for d in DECISIONS})
        loc[r.decision] += 1
    out = {
        name: LocationCounts(excluded=t[EXCLUDED], final=t[ACCEPTED], pending=t[PENDING])
        for name, t in sorted(tally.items())
    }
    out["All Burn Locations"] = LocationCounts(
        excluded=sum(c.excluded for c in out.values()),
        final=sum(c.final for c in out.values()),
        pending=sum(c.pending for c in out.values()),
    )
    return out


def format_counts(table: dict[str, LocationCounts]) -> str:
    """Aligned text table: location, excluded count, final count, pending."""
    rows = [("Burn Location", "Excluded Count", "Final Count", "Pending")]
    for name, c in table.items():
        if name == "All Burn Locations":
            continue
        rows.append((name, str(c.excluded), str(c.final), str(c.pending)))
    total = table["All Burn Locations"]
    rows.append(("All Burn Locations", str(total.excluded), str(total.final), str(total.pending)))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0 or i == len(rows) - 2:
            lines.append("-" * (sum(widths) + 6))
    return "\n".join(lines)


def export_excluded(manifest: Manifest, path: str | os.PathLike) -> int:
    """Write excluded record ids, one per line; returns the count."""
    ids = [r.id for r in manifest.records if r.decision == EXCLUDED]
    with open(path, "w", encoding="utf-8") as fh:
        for rec_id in ids:
            fh.write(rec_id + "\n")
    return len(ids)


def split(
    manifest: Manifest, train_fraction: float = 0.8, seed: int = 0
) -> tuple[list[str], list[str]]:
    """Deterministic shuffle-then-prefix split over accepted records only."""
    if not (0.0 < train_fraction < 1.0):
        raise ValueError("train_fraction must be in (0, 1)")
    ids = [r.id for r in manifest.records if r.decision == ACCEPTED]
    if not ids:
        raise ValueError("no accepted records to split")
    rng = random.Random(seed)
    rng.shuffle(ids)
    n_train = round(train_fraction * len(ids))
    return ids[:n_train], ids[n_train:]


@dataclasses.dataclass(frozen=True)
class ValidationIssue:
    record_id: str
    message: str


def validate(manifest: Manifest) -> list[ValidationIssue]:
    """File existence, TIFF loadability, mask/TIFF dimension agreement, and
    decision-state legality.  Returns issues instead of raising; an intact
    manifest yields an empty list.  (RGB and thermal resolutions may differ
    legitimately, so they are never compared.)"""
    issues: list[ValidationIssue] = []
    tiff_scale = manifest.config_snapshot.get("tiff_scale")
    tiff_offset = manifest.config_snapshot.get("tiff_offset", 0.0)
    for r in manifest.records:
        if r.decision not in DECISIONS:
            issues.append(ValidationIssue(r.id, f"illegal decision state {r.decision!r}"))
        paths = [("rgb", r.rgb_path), ("thermal", r.thermal_path), ("tiff", r.tiff_path)]
        if r.mask_path:
            paths.append(("mask", r.mask_path))
        if r.points_path:
            paths.append(("points", r.points_path))
        missing = False
        for kind, p in paths:
            if not os.path.exists(p):
                issues.append(ValidationIssue(r.id, f"{kind} file missing: {p}"))
                missing = True
        if missing:
            continue
        try:
            grid = load_tiff(r.tiff_path, int_scale=tiff_scale, int_offset=tiff_offset)
        except (TiffLoadError, OSError) as exc:
            issues.append(ValidationIssue(r.id, f"tiff unreadable: {exc}"))
            continue
        if r.mask_path:
            mask = load_mask_png(r.mask_path)
            if mask.shape != (grid.height, grid.width):
                issues.append(
                    ValidationIssue(
                        r.id,
                        f"mask dimensions {mask.shape} do not match TIFF "
                        f"{(grid.height, grid.width)}",
                    )
                )
    return issues

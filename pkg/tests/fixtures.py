"""Shared fixture builders for manifest-level tests."""

from __future__ import annotations

from firelabel.dataset import ACCEPTED, EXCLUDED, ImageRecord, Manifest

# Burn-location bookkeeping the curation step must reproduce:
# (location, excluded count, final/accepted count).
BURN_LOCATION_COUNTS = [
    ("Shoetank", 554, 731),
    ("Sycan2A", 40, 324),
    ("Sycan2D", 33, 225),
    ("Willamette Valley", 0, 232),
]
TOTAL_EXCLUDED = 627
TOTAL_FINAL = 1512


def record(rec_id: str, location: str, decision: str) -> ImageRecord:
    return ImageRecord(
        id=rec_id,
        burn_location=location,
        rgb_path=f"rgb/{rec_id}.png",
        thermal_path=f"thermal/{rec_id}.png",
        tiff_path=f"tiff/{rec_id}.tif",
        decision=decision,
    )


def burn_counts_manifest() -> Manifest:
    """A manifest whose per-location decision tallies match the published
    curation counts exactly."""
    records = []
    for loc, excluded, final in BURN_LOCATION_COUNTS:
        slug = loc.lower().replace(" ", "_")
        for i in range(excluded):
            records.append(record(f"{slug}_x{i:04d}", loc, EXCLUDED))
        for i in range(final):
            records.append(record(f"{slug}_a{i:04d}", loc, ACCEPTED))
    return Manifest(records=records)

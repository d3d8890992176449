import json
import threading
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from firelabel.cv_kernels import dilate
from firelabel.dataset import Manifest
from firelabel.pipeline import PipelineConfig, run_pipeline
from firelabel.pngio import load_mask_png
from firelabel.review_service import boundary_overlay, create_app, jet_render, load_jet_lut
from firelabel.synth import BlobSpec, SceneSpec, gen_corpus, write_scene
from fixtures import burn_counts_manifest

import io
from PIL import Image


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("review_run")
    root = tmp / "data"
    base = SceneSpec(
        width=32,
        height=32,
        background_temp=20.0,
        blobs=(BlobSpec(center=(16, 16), size=6, peak_temp=400.0),),
        noise_sigma=2.0,
        seed=77,
    )
    for stem, scene in gen_corpus(base, 4):
        write_scene(scene, root, stem)
    out = tmp / "run"
    run_pipeline(str(root), out, PipelineConfig(jobs=1))
    return out


@pytest.fixture
def manifest_path(run_dir, tmp_path):
    """A fresh copy of the processed manifest for each test (decisions mutate it)."""
    src = run_dir / "manifest.jsonl"
    dst = tmp_path / "manifest.jsonl"
    dst.write_bytes(src.read_bytes())
    return dst


@pytest.fixture
def client(manifest_path):
    return TestClient(create_app(manifest_path))


def png_shape(data: bytes):
    im = Image.open(io.BytesIO(data))
    return im.height, im.width


class TestItems:
    def test_lists_all_in_manifest_order(self, client, manifest_path):
        manifest = Manifest.load(manifest_path)
        resp = client.get("/items")
        assert resp.status_code == 200
        body = resp.json()
        assert body["total"] == 4
        assert [i["id"] for i in body["items"]] == [r.id for r in manifest.records]

    def test_status_filter_and_paging_on_large_fixture(self, tmp_path):
        path = tmp_path / "m.jsonl"
        burn_counts_manifest().save(path)
        client = TestClient(create_app(path))
        resp = client.get("/items", params={"status": "excluded", "page_size": 100})
        body = resp.json()
        assert body["total"] == 627
        assert body["pages"] == 7
        assert len(body["items"]) == 100
        # conjunctive filters
        resp = client.get("/items", params={"status": "excluded", "location": "Sycan2A"})
        assert resp.json()["total"] == 40

    def test_unknown_status_is_400(self, client):
        assert client.get("/items", params={"status": "bogus"}).status_code == 400

    def test_detail_roundtrips_report_and_points(self, client, manifest_path):
        manifest = Manifest.load(manifest_path)
        rec = manifest.records[0]
        body = client.get(f"/items/{rec.id}").json()
        assert body["id"] == rec.id
        assert body["report"] == json.loads(Path(rec.selection_report_path).read_text())
        assert body["points"] == json.loads(Path(rec.points_path).read_text())
        assert len(body["images"]["overlays"]) == 3

    def test_unknown_id_404(self, client):
        assert client.get("/items/nope").status_code == 404

    def test_unprocessed_item_409(self, manifest_path):
        manifest = Manifest.load(manifest_path)
        manifest.records[0].mask_path = None
        manifest.save(manifest_path)
        client = TestClient(create_app(manifest_path))
        resp = client.get(f"/items/{manifest.records[0].id}")
        assert resp.status_code == 409
        assert "not yet processed" in resp.json()["error"]


class TestImages:
    def test_dimensions_consistent(self, client, manifest_path):
        manifest = Manifest.load(manifest_path)
        rec = manifest.records[0]
        for kind in ("rgb", "thermal", "tiff", "overlay_chosen", "overlay_p0"):
            resp = client.get(f"/items/{rec.id}/image/{kind}")
            assert resp.status_code == 200, kind
            assert png_shape(resp.content) == (32, 32)

    def test_overlay_boundary_is_dilation_ring(self, client, manifest_path):
        manifest = Manifest.load(manifest_path)
        rec = manifest.records[0]
        mask = load_mask_png(rec.mask_path)
        base = np.asarray(Image.open(rec.rgb_path).convert("RGB"))
        resp = client.get(f"/items/{rec.id}/image/overlay_chosen")
        overlay = np.asarray(Image.open(io.BytesIO(resp.content)).convert("RGB"))
        expected_ring = (dilate(mask) - mask).astype(bool)
        differs = (overlay != base).any(axis=2)
        assert np.array_equal(differs, expected_ring)

    def test_pure_overlay_function_oracle(self):
        mask = np.zeros((7, 7), dtype=np.uint8)
        mask[2:5, 2:5] = 1
        base = np.full((7, 7, 3), 30, dtype=np.uint8)
        out = boundary_overlay(base, mask)
        ring = (dilate(mask) - mask).astype(bool)
        assert np.all(out[ring] == (255, 0, 64))
        assert np.all(out[~ring] == 30)

    def test_byte_stable_responses(self, client, manifest_path):
        manifest = Manifest.load(manifest_path)
        rec = manifest.records[1]
        a = client.get(f"/items/{rec.id}/image/overlay_chosen").content
        b = client.get(f"/items/{rec.id}/image/overlay_chosen").content
        assert a == b

    def test_tiff_base_overlay(self, client, manifest_path):
        manifest = Manifest.load(manifest_path)
        rec = manifest.records[0]
        resp = client.get(f"/items/{rec.id}/image/overlay_p1", params={"base": "tiff"})
        assert resp.status_code == 200

    def test_unknown_kind_404(self, client, manifest_path):
        manifest = Manifest.load(manifest_path)
        assert client.get(f"/items/{manifest.records[0].id}/image/xray").status_code == 404


class TestDecisions:
    def test_exclude_moves_counts(self, client, manifest_path):
        manifest = Manifest.load(manifest_path)
        rec_id = manifest.records[0].id
        before = client.get("/counts").json()["total"]
        resp = client.post(f"/items/{rec_id}/decision", json={"decision": "excluded"})
        assert resp.status_code == 200
        after = client.get("/counts").json()["total"]
        assert after["excluded"] == before["excluded"] + 1
        assert after["pending"] == before["pending"] - 1

    def test_re_review_flips_between_states(self, client, manifest_path):
        rec_id = Manifest.load(manifest_path).records[1].id
        assert client.post(f"/items/{rec_id}/decision", json={"decision": "accepted"}).status_code == 200
        assert client.post(f"/items/{rec_id}/decision", json={"decision": "excluded"}).status_code == 200
        counts = client.get("/counts").json()["total"]
        assert counts["excluded"] == 1

    def test_illegal_transition_409(self, client, manifest_path):
        rec_id = Manifest.load(manifest_path).records[0].id
        client.post(f"/items/{rec_id}/decision", json={"decision": "accepted"})
        resp = client.post(f"/items/{rec_id}/decision", json={"decision": "accepted"})
        assert resp.status_code == 409

    def test_bad_body_422(self, client, manifest_path):
        rec_id = Manifest.load(manifest_path).records[0].id
        assert client.post(f"/items/{rec_id}/decision", json={"decision": "maybe"}).status_code == 422
        assert client.post(f"/items/{rec_id}/decision", json={}).status_code == 422
        assert client.post(
            f"/items/{rec_id}/decision", json={"decision": "accepted", "chosen_override": 7}
        ).status_code == 422

    def test_unknown_id_404(self, client):
        assert client.post("/items/ghost/decision", json={"decision": "accepted"}).status_code == 404

    def test_chosen_override_repoints_mask(self, client, manifest_path):
        rec_id = Manifest.load(manifest_path).records[2].id
        resp = client.post(
            f"/items/{rec_id}/decision",
            json={"decision": "accepted", "chosen_override": 2},
        )
        assert resp.status_code == 200
        assert resp.json()["mask_path"].endswith(f"{rec_id}_p2.png")
        reloaded = Manifest.load(manifest_path)
        assert reloaded.get(rec_id).mask_path.endswith(f"{rec_id}_p2.png")

    def test_decision_durable_across_restart(self, manifest_path):
        client = TestClient(create_app(manifest_path))
        rec_id = Manifest.load(manifest_path).records[3].id
        resp = client.post(
            f"/items/{rec_id}/decision",
            json={"decision": "excluded", "reason": "smoke only"},
        )
        assert resp.status_code == 200
        # simulate kill + restart: a brand-new app over the same manifest file
        client2 = TestClient(create_app(manifest_path))
        item = client2.get(f"/items/{rec_id}").json()
        assert item["decision"] == "excluded"
        assert item["reason"] == "smoke only"

    def test_concurrent_decisions_on_distinct_ids(self, manifest_path):
        app = create_app(manifest_path)
        ids = [r.id for r in Manifest.load(manifest_path).records]
        errors = []

        def worker(rec_id):
            try:
                with TestClient(app) as c:
                    r = c.post(f"/items/{rec_id}/decision", json={"decision": "excluded"})
                    assert r.status_code == 200
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(i,)) for i in ids]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        replayed = Manifest.load(manifest_path)
        assert all(r.decision == "excluded" for r in replayed.records)

    def test_server_never_mutates_artifacts(self, client, manifest_path, run_dir):
        before = {
            p: p.read_bytes() for p in sorted((run_dir / "masks").glob("*.png"))
        }
        rec_id = Manifest.load(manifest_path).records[0].id
        client.post(f"/items/{rec_id}/decision", json={"decision": "excluded"})
        after = {p: p.read_bytes() for p in sorted((run_dir / "masks").glob("*.png"))}
        assert before == after


class TestCounts:
    def test_burn_location_fixture_counts(self, tmp_path):
        path = tmp_path / "m.jsonl"
        burn_counts_manifest().save(path)
        client = TestClient(create_app(path))
        body = client.get("/counts").json()
        assert body["locations"]["Shoetank"] == {"excluded": 554, "final": 731, "pending": 0}
        assert body["locations"]["Sycan2A"] == {"excluded": 40, "final": 324, "pending": 0}
        assert body["locations"]["Sycan2D"] == {"excluded": 33, "final": 225, "pending": 0}
        assert body["locations"]["Willamette Valley"] == {"excluded": 0, "final": 232, "pending": 0}
        assert body["total"] == {"excluded": 627, "final": 1512, "pending": 0}


class TestJetLut:
    def test_golden_matches_formula(self):
        lut = load_jet_lut()
        assert lut.shape == (256, 3)

        def clamp(x):
            return max(0.0, min(1.0, x))

        for i in (0, 31, 64, 128, 191, 255):
            v = i / 255.0
            r = clamp(min(4.0 * v - 1.5, -4.0 * v + 4.5))
            g = clamp(min(4.0 * v - 0.5, -4.0 * v + 3.5))
            b = clamp(min(4.0 * v + 0.5, -4.0 * v + 2.5))
            assert tuple(lut[i]) == (round(255 * r), round(255 * g), round(255 * b))

    def test_jet_render_clips_range(self):
        lut = load_jet_lut()
        vals = np.array([[-10.0, 0.0], [250.0, 600.0]])
        img = jet_render(vals, 0.0, 500.0, lut)
        assert img.shape == (2, 2, 3)
        assert tuple(img[0, 0]) == tuple(lut[0])
        assert tuple(img[1, 1]) == tuple(lut[255])

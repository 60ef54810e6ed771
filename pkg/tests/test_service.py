import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from cmaprec.colormapping import encode_png, render
from cmaprec.service import create_app
from cmaprec.spline import colormap_from_dict
from cmaprec.synth import FieldSpec, bundled_colormaps, generate_field


@pytest.fixture
def workdir(tmp_path):
    return tmp_path / "jobs"


@pytest.fixture
def client(workdir):
    with TestClient(create_app(workdir)) as client:
        yield client


def _viz_png(size=32, name="viridis", seed=4):
    cmaps = {c.name: c for c in bundled_colormaps()}
    field = generate_field(FieldSpec("radial", size, size, seed))
    return encode_png(render(field, cmaps[name]))


def _submit(client, png, iterations=25):
    response = client.post(
        "/api/recover",
        files={"image": ("viz.png", png, "image/png")},
        data={"config": json.dumps({"iterations": iterations})},
    )
    assert response.status_code == 202
    return response.json()["jobId"]


def _wait(client, job_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        job = client.get(f"/api/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.05)
    raise TimeoutError(f"job {job_id} did not finish")


class TestRecoverEndpoint:
    def test_valid_png_gets_job_id(self, client):
        job_id = _submit(client, _viz_png())
        assert isinstance(job_id, str) and job_id

    def test_text_file_rejected(self, client):
        response = client.post(
            "/api/recover", files={"image": ("a.txt", b"plain text", "text/plain")}
        )
        assert response.status_code == 400

    def test_oversized_upload_rejected(self, client):
        blob = b"\x00" * (16 * 1024 * 1024 + 1)
        response = client.post(
            "/api/recover", files={"image": ("big.png", blob, "image/png")}
        )
        assert response.status_code == 413

    def test_concurrent_posts_get_distinct_ids(self, client):
        png = _viz_png()
        a = _submit(client, png)
        b = _submit(client, png)
        assert a != b

    def test_bad_config_rejected(self, client):
        response = client.post(
            "/api/recover",
            files={"image": ("viz.png", _viz_png(), "image/png")},
            data={"config": json.dumps({"learning_rate": -1})},
        )
        assert response.status_code == 400


class TestJobsEndpoint:
    def test_fresh_job_is_queued_or_running(self, client):
        job_id = _submit(client, _viz_png(), iterations=200)
        job = client.get(f"/api/jobs/{job_id}").json()
        assert job["status"] in ("queued", "running", "done")

    def test_done_payload_round_trips(self, client):
        job_id = _submit(client, _viz_png())
        job = _wait(client, job_id)
        assert job["status"] == "done"
        cmap = colormap_from_dict(job["colormap"])
        assert cmap.n_points == 10
        assert len(job["histogram"]) == 64
        assert job["preview"].startswith("data:image/png;base64,")
        assert job["progress"]["done"] == job["progress"]["total"] == job["iterations"]

    def test_unknown_job_404(self, client):
        assert client.get("/api/jobs/does-not-exist").status_code == 404


class TestRecolorEndpoint:
    def test_recovered_colormap_reproduces_stored_png(self, client, workdir):
        job_id = _submit(client, _viz_png())
        job = _wait(client, job_id)
        response = client.post(
            "/api/recolor", json={"jobId": job_id, "colormap": job["colormap"]}
        )
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"
        stored = (workdir / job_id / "recon.png").read_bytes()
        assert response.content == stored

    def test_edited_point_changes_only_its_span(self, client):
        job_id = _submit(client, _viz_png(name="gray"))
        job = _wait(client, job_id)
        base = client.post(
            "/api/recolor", json={"jobId": job_id, "colormap": job["colormap"]}
        ).content
        edited = json.loads(json.dumps(job["colormap"]))
        edited["control_points"][0] = [1.0, 0.0, 0.0]
        recolored = client.post(
            "/api/recolor", json={"jobId": job_id, "colormap": edited}
        ).content
        assert recolored != base
        # the first control point only influences field values below the
        # fourth knot; pixels above that stay bit-identical
        from cmaprec.colormapping import decode_image, read_field

        field = read_field((client.app.state.workdir / job_id / "field.csv"))
        knots = colormap_from_dict(job["colormap"]).knots
        mask = field.values >= knots[4]
        a = decode_image(base).pixels
        b = decode_image(recolored).pixels
        assert np.array_equal(a[mask], b[mask])
        assert not np.array_equal(a[~mask], b[~mask])

    def test_malformed_colormap_400(self, client):
        job_id = _submit(client, _viz_png())
        _wait(client, job_id)
        response = client.post(
            "/api/recolor", json={"jobId": job_id, "colormap": {"control_points": [[2, 0]]}}
        )
        assert response.status_code == 400

    def test_job_not_done_409(self, workdir):
        # a single worker keeps the second job queued while the first runs
        with TestClient(create_app(workdir, max_workers=1)) as client:
            png = _viz_png(48)
            first = _submit(client, png, iterations=600)
            second = _submit(client, png, iterations=600)
            response = client.post(
                "/api/recolor", json={"jobId": second, "colormap": {"control_points": []}}
            )
            assert response.status_code == 409
            _wait(client, second, timeout=60)

    def test_unknown_job_404(self, client):
        response = client.post(
            "/api/recolor", json={"jobId": "nope", "colormap": {"control_points": []}}
        )
        assert response.status_code == 404


class TestTransferEndpoint:
    def test_ramp_under_library_gray(self, client):
        cmaps = {c["name"]: c for c in client.get("/api/colormaps").json()}
        field_csv = "2 16\n" + "\n".join(
            " ".join(str(v / 15) for v in range(16)) for _ in range(2)
        )
        response = client.post(
            "/api/transfer",
            files={"field": ("f.csv", field_csv.encode(), "text/csv")},
            data={"colormap": json.dumps(cmaps["gray"])},
        )
        assert response.status_code == 200
        from cmaprec.colormapping import decode_image

        pixels = decode_image(response.content).pixels
        assert pixels[0, 0, 0] == 0.0
        assert pixels[0, -1, 0] == 1.0

    def test_missing_field_400(self, client):
        response = client.post("/api/transfer", data={"colormap": "{}"})
        assert response.status_code == 400

    def test_with_job_colormap(self, client):
        job_id = _submit(client, _viz_png())
        _wait(client, job_id)
        response = client.post(
            "/api/transfer",
            files={"field": ("f.csv", b"2 2\n0 1\n0.5 0.25", "text/csv")},
            data={"jobId": job_id},
        )
        assert response.status_code == 200

    def test_bad_csv_400(self, client):
        job_id = _submit(client, _viz_png())
        _wait(client, job_id)
        response = client.post(
            "/api/transfer",
            files={"field": ("f.csv", b"not a field", "text/csv")},
            data={"jobId": job_id},
        )
        assert response.status_code == 400


class TestJobStore:
    def test_status_only_moves_forward(self):
        from cmaprec.service import JobStore

        store = JobStore()
        job_id = store.create()
        store.set_status(job_id, "running")
        store.set_status(job_id, "done")
        with pytest.raises(RuntimeError):
            store.set_status(job_id, "running")

    def test_progress_is_monotone(self):
        from cmaprec.service import JobStore

        store = JobStore()
        job_id = store.create()
        store.set_progress(job_id, 5, 10)
        store.set_progress(job_id, 3, 10)  # stale update must not regress
        assert store.snapshot(job_id)["progress"] == {"done": 5, "total": 10}


class TestColormapsEndpoint:
    def test_library_entries_valid(self, client):
        entries = client.get("/api/colormaps").json()
        assert len(entries) >= 1
        for entry in entries:
            cmap = colormap_from_dict(entry)
            assert cmap.n_points >= 4
            assert entry.get("name")


class TestFloatFormatting:
    def test_nine_significant_digits(self, client):
        job_id = _submit(client, _viz_png())
        job = _wait(client, job_id)
        for row in job["colormap"]["control_points"]:
            for value in row:
                assert value == float(f"{value:.9g}")

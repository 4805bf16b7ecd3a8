import json

import pytest
from fastapi.testclient import TestClient

from formrelax.cli import main
from formrelax.pipeline import load_bundle, save_bundle
from formrelax.service import ServiceConfig, create_app
from formrelax.synthetic import (
    MEANINGLESS_VALUES,
    planted_dataset,
    planted_schema,
    write_dataset_csv,
)
from formrelax.dataset import serialize_schema


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    """Small planted-rule corpus on disk plus a trained bundle."""
    root = tmp_path_factory.mktemp("fixture")
    (root / "schema.json").write_text(
        serialize_schema(planted_schema()), encoding="utf-8"
    )
    (root / "meaningless.txt").write_text(
        "\n".join(MEANINGLESS_VALUES) + "\n", encoding="utf-8"
    )
    write_dataset_csv(planted_dataset(n=600, seed=3), root / "data.csv")
    code = main(
        [
            "train",
            "--data", str(root / "data.csv"),
            "--schema", str(root / "schema.json"),
            "--dict", str(root / "meaningless.txt"),
            "--out", str(root / "bundle.json"),
            "--seed", "1",
        ]
    )
    assert code == 0
    return root


class TestTrainCommand:
    def test_toy_csv_produces_bundle(self, toy_dataset, toy_schema, tmp_path, capsys):
        import dataclasses

        from formrelax.dataset import Dataset
        from formrelax.synthetic import write_dataset_csv

        # tile the four worked-example rows so every split slice sees each kind
        tiled = []
        for rep in range(5):
            for j, ins in enumerate(toy_dataset.instances):
                tiled.append(
                    dataclasses.replace(ins, submitted_at=float(rep * 10 + j))
                )
        write_dataset_csv(
            Dataset(schema=toy_schema, instances=tuple(tiled)), tmp_path / "toy.csv"
        )
        (tmp_path / "schema.json").write_text(
            serialize_schema(toy_schema), encoding="utf-8"
        )
        (tmp_path / "dict.txt").write_text("@\nn/a\n", encoding="utf-8")
        code = main(
            [
                "train",
                "--data", str(tmp_path / "toy.csv"),
                "--schema", str(tmp_path / "schema.json"),
                "--dict", str(tmp_path / "dict.txt"),
                "--out", str(tmp_path / "bundle.json"),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "model(s)" in out and "bundle written" in out
        bundle = load_bundle(tmp_path / "bundle.json")
        assert len(bundle.models) >= 1

    def test_missing_schema_file(self, tmp_path, capsys):
        code = main(
            [
                "train",
                "--data", str(tmp_path / "none.csv"),
                "--schema", str(tmp_path / "ghost.json"),
                "--dict", str(tmp_path / "dict.txt"),
                "--out", str(tmp_path / "bundle.json"),
            ]
        )
        assert code == 1
        assert "ghost.json" in capsys.readouterr().err

    def test_variant_flags_recorded(self, fixture_dir, tmp_path):
        out = tmp_path / "plain.json"
        code = main(
            [
                "train",
                "--data", str(fixture_dir / "data.csv"),
                "--schema", str(fixture_dir / "schema.json"),
                "--dict", str(fixture_dir / "meaningless.txt"),
                "--out", str(out),
                "--no-smote",
                "--no-endorser",
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["train_config"]["enable_smote"] is False
        assert doc["train_config"]["enable_endorser"] is False
        assert all(m["theta"] == 0.0 for m in doc["models"].values())


class TestEvaluateCommand:
    def test_sequential_table(self, fixture_dir, capsys):
        code = main(
            [
                "evaluate",
                "--bundle", str(fixture_dir / "bundle.json"),
                "--data", str(fixture_dir / "data.csv"),
                "--scenario", "sequential",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        for column in ("Prec", "Rec", "NPV", "Spec"):
            assert column in out

    def test_unknown_scenario_is_usage_error(self, fixture_dir):
        with pytest.raises(SystemExit) as err:
            main(
                [
                    "evaluate",
                    "--bundle", str(fixture_dir / "bundle.json"),
                    "--data", str(fixture_dir / "data.csv"),
                    "--scenario", "chaotic",
                ]
            )
        assert err.value.code == 2

    def test_deterministic_across_runs(self, fixture_dir, capsys):
        def run():
            main(
                [
                    "evaluate",
                    "--bundle", str(fixture_dir / "bundle.json"),
                    "--data", str(fixture_dir / "data.csv"),
                    "--scenario", "partial-random",
                    "--seed", "9",
                ]
            )
            raw = capsys.readouterr().out
            doc = json.loads(raw[raw.index("{"):])
            doc.pop("latency_ms")
            return doc

        assert run() == run()


class TestPredictCommand:
    def test_single_target(self, fixture_dir, capsys):
        code = main(
            [
                "predict",
                "--bundle", str(fixture_dir / "bundle.json"),
                "--filled", json.dumps(
                    {
                        "company_name": "Wish",
                        "monthly_revenue": "20",
                        "company_type": "NPO",
                        "field_of_activity": "Education",
                    }
                ),
                "--target", "tax_id",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["target"] == "tax_id"
        assert payload[0]["class"] in ("required", "optional")

    def test_bad_json(self, fixture_dir, capsys):
        code = main(
            [
                "predict",
                "--bundle", str(fixture_dir / "bundle.json"),
                "--filled", "{nope",
            ]
        )
        assert code == 1


class TestSynthCommand:
    def test_writes_fixture_files(self, tmp_path, capsys):
        code = main(["synth", "--out", str(tmp_path / "demo"), "--rows", "50"])
        assert code == 0
        for name in ("schema.json", "data.csv", "meaningless.txt"):
            assert (tmp_path / "demo" / name).exists()


@pytest.fixture()
def client(fixture_dir):
    config = ServiceConfig(bundle_path=str(fixture_dir / "bundle.json"))
    app = create_app(config)
    return TestClient(app)


class TestService:
    def test_health(self, client):
        res = client.get("/health")
        assert res.status_code == 200
        assert res.json()["bundle_loaded"] is True

    def test_schema_endpoint(self, client):
        res = client.get("/schema")
        assert res.status_code == 200
        body = res.json()
        names = [f["name"] for f in body["schema"]["fields"]]
        assert "tax_id" in names
        assert body["modeled_targets"] == ["tax_id"]

    def test_predict_empty_filled_uses_priors(self, client):
        res = client.post("/predict", json={"filled": {}})
        assert res.status_code == 200
        body = res.json()
        assert body["bundle_version"]
        assert all(d["latency_ms"] >= 0 for d in body["decisions"])

    def test_predict_running_example(self, client):
        res = client.post(
            "/predict",
            json={
                "filled": {
                    "company_name": "Wish",
                    "monthly_revenue": "20",
                    "company_type": "NPO",
                    "field_of_activity": "Education",
                },
                "targets": ["tax_id"],
            },
        )
        assert res.status_code == 200
        (decision,) = res.json()["decisions"]
        assert decision["final_required"] is False
        assert decision["class"] == "optional"

    def test_unknown_target_404(self, client):
        res = client.post("/predict", json={"filled": {}, "targets": ["ghost"]})
        assert res.status_code == 404

    def test_malformed_body_400(self, client):
        res = client.post("/predict", json={"filled": "not-a-map"})
        assert res.status_code == 400

    def test_unknown_filled_field_400(self, client):
        res = client.post("/predict", json={"filled": {"ghost": "1"}})
        assert res.status_code == 400

    def test_api_determinism(self, client):
        payload = {
            "filled": {"company_type": "NPO", "field_of_activity": "Charity"}
        }
        a = client.post("/predict", json=payload).json()
        b = client.post("/predict", json=payload).json()
        for d in (*a["decisions"], *b["decisions"]):
            d.pop("latency_ms")
        assert a == b

    def test_reload_same_schema_ok(self, client):
        res = client.post("/reload")
        assert res.status_code == 200
        assert res.json()["models"] == ["tax_id"]

    def test_reload_schema_mismatch_409(self, fixture_dir, tmp_path, toy_schema, toy_dictionary, toy_dataset):
        from formrelax.dataset import Dataset
        from formrelax.pipeline import TrainConfig, train_bundle
        from test_pipeline import spread_dataset

        ds = spread_dataset(toy_schema, n=80)
        other = train_bundle(
            Dataset(schema=toy_schema, instances=ds.instances[:60]),
            Dataset(schema=toy_schema, instances=ds.instances[60:]),
            toy_dictionary,
            TrainConfig(),
        )
        path = tmp_path / "swap.json"
        save_bundle(load_bundle(fixture_dir / "bundle.json"), path)
        config = ServiceConfig(bundle_path=str(path))
        app = create_app(config)
        with TestClient(app) as tc:
            assert tc.get("/health").json()["bundle_loaded"]
            save_bundle(other, path)  # different schema lands on disk
            assert tc.post("/reload").status_code == 409

    def test_no_bundle_503(self, tmp_path):
        config = ServiceConfig(bundle_path=str(tmp_path / "missing.json"))
        app = create_app(config)
        with TestClient(app) as tc:
            assert tc.get("/schema").status_code == 503
            assert tc.post("/predict", json={"filled": {}}).status_code == 503

    def test_filled_target_conflict_400(self, client):
        res = client.post(
            "/predict",
            json={"filled": {"tax_id": "T1"}, "targets": ["tax_id"]},
        )
        assert res.status_code == 400

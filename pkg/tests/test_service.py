"""HTTP service endpoints and the thin-client CLI."""

import warnings

import pytest
import yaml
from click.testing import CliRunner

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from onebitae.cli import main as cli_main
from onebitae.service.app import app

FAST_CFG = {
    "code": "wifi-648",
    "modulation": 4,
    "chain": "unquantized-baseline",
    "sweep": [8.0, 12.0],
    "seed": 5,
    "stop": {"min_bit_errors": 20, "max_codewords": 30},
    "record_timing": False,
}


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("ONEBITAE_WORKERS", "1")


class TestEndpoints:
    def test_health(self, client):
        assert client.get("/health").json() == {"status": "ok"}

    def test_validate_ok(self, client):
        resp = client.post("/config/validate", json={"config": FAST_CFG})
        body = resp.json()
        assert body["valid"]
        assert body["warnings"]  # low min_bit_errors warning

    def test_validate_reports_field_paths(self, client):
        bad = dict(FAST_CFG, sweep=[8.0, 8.0], modulation=5)
        body = client.post("/config/validate", json={"config": bad}).json()
        assert not body["valid"]
        joined = " ".join(body["errors"])
        assert "sweep" in joined
        assert "modulation" in joined

    def test_run(self, client, tmp_path):
        resp = client.post("/runs", json={"config": FAST_CFG,
                                          "out_dir": str(tmp_path)})
        assert resp.status_code == 200
        body = resp.json()
        assert body["chain"] == "unquantized-baseline"
        assert len(body["points"]) == 2
        assert body["csv"].startswith("es_n0_db,codewords,bit_errors,bits,ber,seconds\n")
        with open(body["csv_path"]) as f:
            assert f.read() == body["csv"]

    def test_run_chain_override(self, client):
        body = client.post("/runs", json={
            "config": FAST_CFG, "chain": "onebit-baseline"}).json()
        assert body["chain"] == "onebit-baseline"

    def test_run_invalid_config(self, client):
        resp = client.post("/runs", json={"config": {"sweep": []}})
        assert resp.status_code == 422

    def test_summarize_texts(self, client):
        csv = client.post("/runs", json={"config": FAST_CFG}).json()["csv"]
        body = client.post("/summarize", json={"csv_texts": {"base": csv}}).json()
        assert "base" in body["table"]
        assert "es_n0_db" in body["table"]

    def test_summarize_empty(self, client):
        assert client.post("/summarize", json={}).status_code == 422

    def test_summarize_bad_schema(self, client):
        resp = client.post("/summarize",
                           json={"csv_texts": {"x": "not,a,csv\n1,2,3\n"}})
        assert resp.status_code == 422

    def test_kernel_report(self, client):
        cfg = {"nets_per_width": 20, "pairs": 1, "widths": [1],
               "correlation_grid": 3, "residuals": {"enabled": False}}
        body = client.post("/kernel-report", json={"config": cfg}).json()
        assert "[closed_form_vs_quadrature]" in body["report"]

    def test_kernel_report_gp_section(self, client):
        cfg = {"gp": {"nets_per_width": 20, "pairs": 1, "widths": [1],
                      "correlation_grid": 3, "residuals": {"enabled": False}}}
        resp = client.post("/kernel-report", json={"config": cfg})
        assert resp.status_code == 200


class TestCli:
    def write_cfg(self, tmp_path, data=None):
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(data or FAST_CFG))
        return str(path)

    def test_validate_ok(self, tmp_path):
        runner = CliRunner()
        res = runner.invoke(cli_main, ["validate-config",
                                       self.write_cfg(tmp_path)])
        assert res.exit_code == 0
        assert "config ok" in res.output

    def test_validate_bad_exits_nonzero(self, tmp_path):
        path = self.write_cfg(tmp_path, dict(FAST_CFG, sweep=[]))
        res = CliRunner().invoke(cli_main, ["validate-config", path])
        assert res.exit_code == 1

    def test_run_writes_csv(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        out = tmp_path / "out"
        res = CliRunner().invoke(cli_main, ["run", "--config", cfg,
                                            "--out", str(out)])
        assert res.exit_code == 0, res.output
        csv_path = out / "unquantized-baseline.csv"
        assert csv_path.exists()
        assert csv_path.read_text().startswith("es_n0_db,")

    def test_run_seed_override_changes_nothing_at_same_seed(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            res = CliRunner().invoke(cli_main, ["run", "--config", cfg,
                                                "--out", str(out),
                                                "--seed", "5"])
            assert res.exit_code == 0, res.output
        assert ((out1 / "unquantized-baseline.csv").read_text()
                == (out2 / "unquantized-baseline.csv").read_text())

    def test_summarize(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        out = tmp_path / "out"
        runner = CliRunner()
        runner.invoke(cli_main, ["run", "--config", cfg, "--out", str(out)])
        res = runner.invoke(cli_main, [
            "summarize", str(out / "unquantized-baseline.csv")])
        assert res.exit_code == 0, res.output
        assert "unquantized-baseline" in res.output

    def test_kernel_report_to_file(self, tmp_path):
        gp_cfg = tmp_path / "gp.yaml"
        gp_cfg.write_text(yaml.safe_dump({
            "gp": {"nets_per_width": 20, "pairs": 1, "widths": [1],
                   "correlation_grid": 3, "residuals": {"enabled": False}}}))
        out = tmp_path / "report.txt"
        res = CliRunner().invoke(cli_main, ["kernel-report", "--config",
                                            str(gp_cfg), "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert "[kernel_convergence]" in out.read_text()

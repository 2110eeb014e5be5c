import json
from importlib import resources

import jsonschema
import pytest

from bellcert.cli import main


@pytest.fixture(scope="module")
def schema():
    text = resources.files("bellcert").joinpath("schemas/cli_output.schema.json").read_text()
    return json.loads(text)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


INVOCATIONS = [
    ("purify", "--state", "1,0,0,0", "--rounds", "3"),
    ("purify", "--fidelity", "0.7", "--rounds", "2", "--lambda", "0.01"),
    ("success-prob", "--fidelity", "0.7"),
    ("distribution", "--state", "0.4,0.3,0.2,0.1", "--lambda", "0.05"),
    ("estimate", "--p", "0.68,0.68,0.4352", "--lambda", "0"),
    ("estimate", "--counts", "6458,6458,4774", "--shots", "10000", "--lambda", "0.1"),
    ("sigma", "--fidelity", "0.95", "--convention", "joint"),
    ("plan", "--fidelity", "0.99", "--lambda", "0", "--halfwidth", "0.01", "--k", "3"),
    ("certify-plan", "--fidelity", "0.7", "--threshold", "0.9"),
    ("sweep", "--fidelity", "0.7", "--n-start", "500", "--n-stop", "1500", "--n-step", "500", "--replicates", "2"),
    ("sampled-purify", "--fidelity", "0.7", "--lambda", "0.1", "--rounds", "5", "--shots", "500"),
    ("protocol", "--fidelity", "0.7", "--threshold", "0.9", "--seed", "4"),
    ("threshold-lambda", "--fidelity", "0.7"),
]


@pytest.mark.parametrize("argv", INVOCATIONS, ids=lambda a: a[0])
def test_json_output_matches_schema(capsys, schema, argv):
    code, out, _ = run(capsys, *argv, "--json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema)
    assert doc["schema_version"] == 1 and doc["command"] == argv[0]


@pytest.mark.parametrize("argv", INVOCATIONS, ids=lambda a: a[0])
def test_human_output(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip()


def test_examples(capsys):
    code, out, _ = run(capsys, "plan", "--fidelity", "0.99", "--lambda", "0", "--halfwidth", "0.01", "--k", "3", "--json")
    pairs = json.loads(out)["result"]["bell_pairs"]
    assert pairs == pytest.approx(2841, rel=0.02)
    code, out, _ = run(capsys, "purify", "--state", "1,0,0,0", "--rounds", "3", "--json")
    rounds = json.loads(out)["result"]["rounds"]
    assert code == 0 and all(r["state"]["a"] == 1.0 for r in rounds)
    code, out, _ = run(capsys, "estimate", "--p", "0.68,0.68,0.4352", "--lambda", "0", "--json")
    assert json.loads(out)["result"]["a_hat"] == pytest.approx(0.7, abs=1e-12)


@pytest.mark.parametrize("argv,expected", [
    (("plan", "--fidelity", "0.99"), 0),
    (("estimate", "--p", "0.3,0.7,0.5"), 1),
    (("purify", "--state", "0.5,0.5,0.5,0.5"), 1),
    (("certify-plan", "--fidelity", "0.7", "--threshold", "0.9", "--lambda", "0.1"), 1),
    (("threshold-lambda", "--fidelity", "0.4"), 1),
    (("plan", "--fidelity", "0.99", "--bogus"), 2),
    (("frobnicate",), 2),
    ((), 2),
    (("purify",), 2),
    (("purify", "--state", "1,0,0"), 2),
    (("estimate", "--p", "0.7,0.7,0.5", "--counts", "1,1,1", "--shots", "2"), 2),
    (("sigma", "--fidelity", "0.9", "--convention", "other"), 2),
])
def test_exit_codes(capsys, argv, expected):
    code, out, err = run(capsys, *argv)
    assert code == expected
    if expected:
        assert err.strip() and not out.strip()


def test_config_file_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for a plan\nfidelity = 0.95\nlambda = 0.1\nhalfwidth = 0.02\n")
    code, out, _ = run(capsys, "plan", "--config", str(cfg), "--json")
    res = json.loads(out)["result"]
    assert code == 0 and res["fidelity"] == 0.95 and res["target_halfwidth"] == 0.02
    code, out, _ = run(capsys, "plan", "--config", str(cfg), "--halfwidth", "0.01", "--json")
    assert json.loads(out)["result"]["target_halfwidth"] == 0.01
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense_key = 3\n")
    assert run(capsys, "plan", "--config", str(bad))[0] == 2
    assert run(capsys, "plan", "--fidelity", "0.9", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_sweep_writes_csv_and_manifest(capsys, tmp_path):
    out_csv, manifest = tmp_path / "s.csv", tmp_path / "m.txt"
    code, _, _ = run(capsys, "sweep", "--fidelity", "0.7", "--n-start", "500", "--n-stop", "1000",
                     "--n-step", "500", "--replicates", "2", "--seed", "5", "--out", str(out_csv),
                     "--manifest", str(manifest))
    assert code == 0
    assert out_csv.read_text().startswith("werner_F,lambda,base_seed")
    assert "SeedSequence" in manifest.read_text()


def test_seeded_commands_are_reproducible(capsys):
    argv = ("sampled-purify", "--fidelity", "0.8", "--shots", "2000", "--seed", "9", "--json")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]

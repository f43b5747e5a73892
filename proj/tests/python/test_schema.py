import json
import os
import pathlib
import subprocess

import jsonschema
import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMA = json.loads((ROOT / "configs" / "schema.json").read_text())
CONFIGS = sorted(p for p in (ROOT / "configs").glob("*.json") if p.name != "schema.json")


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_validate(path):
    jsonschema.validate(json.loads(path.read_text()), SCHEMA)


def test_unknown_key_is_rejected():
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"experiment": "translation", "chian": {}}, SCHEMA)


def test_truth_file_validates(tmp_path):
    exe = pathlib.Path(os.environ.get("LNA_INFER_EXE", ROOT / "build" / "tools" / "lna-infer"))
    if not exe.exists():
        pytest.skip("command-line tool not built")
    config = json.loads((ROOT / "configs" / "translation_small.json").read_text())
    config["simulation"]["cells"] = 2
    config["data"] = "observations.csv"
    config["out"] = "."
    (tmp_path / "run.json").write_text(json.dumps(config))
    subprocess.run([str(exe), "simulate", "--config", str(tmp_path / "run.json")], check=True, capture_output=True)
    jsonschema.validate(json.loads((tmp_path / "truth.json").read_text()), SCHEMA)

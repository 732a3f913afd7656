import json

import jsonschema
import pytest

from factorder import schemas
from factorder.cli import main

N6 = dict(types=12, length=4, instances=120, seed=7)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def synth_corpus(tmp_path, capsys, **overrides):
    params = {**N6, **overrides}
    out = tmp_path / "corpus.jsonl"
    code, _, err = run(
        capsys,
        "synth",
        "--types", str(params["types"]),
        "--length", str(params["length"]),
        "--instances", str(params["instances"]),
        "--seed", str(params["seed"]),
        *params.get("extra", []),
        "--out", str(out),
    )
    assert code == 0, err
    return out, tmp_path / "corpus.schema.json", tmp_path / "corpus.spec.json"


class TestSynth:
    def test_writes_dataset_and_sidecars(self, tmp_path, capsys):
        data, schema, spec = synth_corpus(tmp_path, capsys)
        assert data.exists() and schema.exists() and spec.exists()
        assert len(data.read_text().splitlines()) == 120

    def test_regeneration_is_byte_identical(self, tmp_path, capsys):
        data, schema, spec = synth_corpus(tmp_path, capsys)
        first = (data.read_bytes(), schema.read_bytes(), spec.read_bytes())
        data2, schema2, spec2 = synth_corpus(tmp_path, capsys)
        assert (data2.read_bytes(), schema2.read_bytes(), spec2.read_bytes()) == first

    def test_length_exceeding_types_is_usage_error(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "synth", "--types", "3", "--length", "6",
            "--instances", "10", "--out", str(tmp_path / "x.jsonl"),
        )
        assert code == 1
        assert not (tmp_path / "x.jsonl").exists()

    def test_outputs_validate_against_schemas(self, tmp_path, capsys):
        data, schema, spec = synth_corpus(tmp_path, capsys)
        jsonschema.validate(json.loads(schema.read_text()), schemas.load("domain-schema"))
        jsonschema.validate(json.loads(spec.read_text()), schemas.load("synthetic-spec"))
        line_schema = schemas.load("dataset-line")
        for line in data.read_text().splitlines():
            jsonschema.validate(json.loads(line), line_schema)


class TestTrain:
    def test_trains_and_persists(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        model = tmp_path / "planner.json"
        code, out, _ = run(
            capsys, "train", "--data", str(data), "--schema", str(schema),
            "--scheme", "decision-tree", "--out", str(model),
        )
        assert code == 0
        assert "4 stages" in out
        document = json.loads(model.read_text())
        jsonschema.validate(document, schemas.load("planner"))
        assert len(document["stages"]) == 4

    def test_unknown_scheme_lists_choices(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        code, _, err = run(
            capsys, "train", "--data", str(data), "--schema", str(schema),
            "--scheme", "boosting", "--out", str(tmp_path / "m.json"),
        )
        assert code == 1
        assert "majority" in err and "decision-tree" in err

    def test_malformed_line_cited(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        lines = data.read_text().splitlines()
        record = json.loads(lines[4])
        record["order"] = record["order"][:-1]
        lines[4] = json.dumps(record)
        data.write_text("\n".join(lines) + "\n")
        code, _, err = run(
            capsys, "train", "--data", str(data), "--schema", str(schema),
            "--scheme", "majority", "--out", str(tmp_path / "m.json"),
        )
        assert code == 2
        assert "line 5" in err
        assert not (tmp_path / "m.json").exists()

    def test_fixed_order_uses_schema_canonical(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        code, _, _ = run(
            capsys, "train", "--data", str(data), "--schema", str(schema),
            "--scheme", "fixed-order", "--out", str(tmp_path / "fo.json"),
        )
        assert code == 0


class TestOrder:
    @pytest.fixture()
    def trained(self, tmp_path, capsys):
        data, schema, spec = synth_corpus(tmp_path, capsys)
        model = tmp_path / "planner.json"
        run(capsys, "train", "--data", str(data), "--schema", str(schema),
            "--scheme", "knn", "--out", str(model))
        names = json.loads(schema.read_text())["fact_types"]
        return model, names

    def test_single_set(self, trained, capsys):
        model, names = trained
        facts = ",".join(["anchor"] + names[1:4])
        code, out, _ = run(capsys, "order", "--model", str(model), "--facts", facts)
        assert code == 0
        ordered = out.strip().split(",")
        assert sorted(ordered) == sorted(["anchor"] + names[1:4])
        assert ordered[0] == "anchor"

    def test_wrong_cardinality(self, trained, capsys):
        model, names = trained
        code, _, err = run(capsys, "order", "--model", str(model),
                           "--facts", ",".join(names[:3]))
        assert code == 2
        assert "4" in err

    def test_unknown_name(self, trained, capsys):
        model, _ = trained
        code, _, err = run(capsys, "order", "--model", str(model),
                           "--facts", "anchor,made-of,x,y")
        assert code == 2
        assert "made-of" in err

    def test_stdin_batch_preserves_order(self, trained, capsys, monkeypatch):
        import io
        import itertools
        import sys

        model, names = trained
        combos = list(itertools.combinations(names[1:], 3))
        batch = [["anchor", *combo] for combo, _ in zip(itertools.cycle(combos), range(1000))]
        monkeypatch.setattr(
            sys, "stdin", io.StringIO("\n".join(json.dumps(b) for b in batch))
        )
        code, out, _ = run(capsys, "order", "--model", str(model), "--stdin")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 1000
        for line, facts in zip(lines, batch):
            assert sorted(line.split(",")) == sorted(facts)

    def test_truncated_model_is_data_error(self, trained, capsys):
        model, names = trained
        model.write_text(model.read_text()[:40])
        code, _, err = run(capsys, "order", "--model", str(model),
                           "--facts", ",".join(["anchor"] + names[1:4]))
        assert code == 2


class TestEvaluate:
    def test_report_files_and_schema(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        report = tmp_path / "eval.json"
        code, out, _ = run(
            capsys, "evaluate", "--data", str(data), "--schema", str(schema),
            "--scheme", "majority", "--folds", "5", "--seed", "3",
            "--report", str(report),
        )
        assert code == 0
        assert "1.0000" in out  # anchored data: position 1 is perfect
        document = json.loads(report.read_text())
        jsonschema.validate(document, schemas.load("evaluation-report"))
        assert len(document["fold_position_accuracy"]) == 5
        assert (tmp_path / "eval.csv").exists()
        assert (tmp_path / "eval.png").exists()

    def test_zero_folds_is_usage_error(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        code, _, _ = run(
            capsys, "evaluate", "--data", str(data), "--schema", str(schema),
            "--scheme", "majority", "--folds", "0",
        )
        assert code == 1

    def test_report_dir_env_var(self, tmp_path, capsys, monkeypatch):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        outdir = tmp_path / "reports"
        outdir.mkdir()
        monkeypatch.setenv("FACTORDER_REPORT_DIR", str(outdir))
        code, _, _ = run(
            capsys, "evaluate", "--data", str(data), "--schema", str(schema),
            "--scheme", "majority", "--folds", "5", "--report", "eval.json",
        )
        assert code == 0
        assert (outdir / "eval.json").exists()
        assert (outdir / "eval.png").exists()


class TestCompare:
    def test_self_comparison_is_null(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        report = tmp_path / "cmp.json"
        code, out, _ = run(
            capsys, "compare", "--data", str(data), "--schema", str(schema),
            "--scheme-a", "majority", "--scheme-b", "majority",
            "--folds", "5", "--report", str(report),
        )
        assert code == 0
        assert "significant" not in [
            line.split()[-1] for line in out.splitlines() if line and line[0].isdigit()
        ]
        document = json.loads(report.read_text())
        schemas.validator("comparison-report").validate(document)
        for test in document["per_position_tests"]:
            assert test["p"] == 1.0
            assert not test["significant"]

    def test_invalid_alpha_is_usage_error(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        code, _, _ = run(
            capsys, "compare", "--data", str(data), "--schema", str(schema),
            "--scheme-a", "majority", "--scheme-b", "knn",
            "--folds", "5", "--alpha", "1.5",
        )
        assert code == 1


class TestInspect:
    def test_model_summary(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        model = tmp_path / "m.json"
        run(capsys, "train", "--data", str(data), "--schema", str(schema),
            "--scheme", "knn", "--out", str(model))
        code, out, _ = run(capsys, "inspect", "--model", str(model))
        assert code == 0
        assert "scheme=knn" in out
        assert "stage 4" in out

    def test_dataset_summary_with_vector_dump(self, tmp_path, capsys):
        data, schema, _ = synth_corpus(tmp_path, capsys)
        code, out, _ = run(
            capsys, "inspect", "--data", str(data), "--schema", str(schema),
            "--stage", "2", "--instance", "0",
        )
        assert code == 0
        assert "no violations" in out
        dump = json.loads(out.strip().splitlines()[-1])
        assert set(dump) == {"presence", "selected"}
        assert len(dump["selected"]) == 1

    def test_data_requires_schema(self, tmp_path, capsys):
        data, _, _ = synth_corpus(tmp_path, capsys)
        code, _, _ = run(capsys, "inspect", "--data", str(data))
        assert code == 1

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        code, _, _ = run(capsys, "inspect", "--model", str(tmp_path / "nope.json"))
        assert code == 2

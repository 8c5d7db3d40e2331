"""CLI surface: subcommands, exit codes, determinism, env defaults."""

import json

from pfmlab.cli import main
from pfmlab.jsonutil import read_json, write_json
from pfmlab.taste import bundled_data_path


def test_gen_writes_stream_and_manifest(tmp_path):
    out = tmp_path / "stream"
    assert main(["gen", "--days", "30", "--seed", "4",
                 "--out", str(out)]) == 0
    manifest = read_json(out / "manifest.json")
    assert manifest["seed"] == 4
    assert len(manifest["config_fingerprint"]) == 64
    assert (out / "events.jsonl").exists()
    assert (out / "day_contexts.jsonl").exists()


def test_gen_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["gen", "--days", "25", "--seed", "11",
                     "--out", str(out)]) == 0
    for name in ("events.jsonl", "day_contexts.jsonl", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_env_var_default_root(tmp_path, monkeypatch):
    monkeypatch.setenv("PFMLAB_DATA_DIR", str(tmp_path / "root"))
    assert main(["gen", "--days", "5", "--seed", "1"]) == 0
    assert (tmp_path / "root" / "stream" / "events.jsonl").exists()


def test_validation_error_exit_code_2(tmp_path):
    missing = tmp_path / "nope.json"
    assert main(["gen", "--days", "10", "--profiles", str(missing),
                 "--out", str(tmp_path / "o")]) == 2
    # config referencing a missing file is a validation failure
    cfg = tmp_path / "cfg.json"
    write_json(cfg, {"experiment": "rq1", "profiles_path": str(missing)})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 2


def test_unknown_experiment_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    write_json(cfg, {"experiment": "rq9"})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 2


def test_taste_build(tmp_path):
    out = tmp_path / "taste.json"
    assert main(["taste", "build",
                 "--molecules", str(bundled_data_path("molecules.csv")),
                 "--recipes", str(bundled_data_path("recipes.json")),
                 "--out", str(out)]) == 0
    doc = read_json(out)
    assert len(doc["dishes"]) == 60
    assert all(len(d["taste"]) == 6 for d in doc["dishes"])


def test_mine_pipeline(tmp_path):
    stream_dir = tmp_path / "s"
    assert main(["gen", "--days", "150", "--seed", "6",
                 "--out", str(stream_dir)]) == 0
    assert main(["mine", "generate", "--stream", str(stream_dir),
                 "--out", str(tmp_path / "mg"),
                 "--split", "stress_report=informational.stress_level"]) == 0
    assert (tmp_path / "mg" / "cooccurrence_heatmap.csv").exists()

    pattern = tmp_path / "pattern.json"
    write_json(pattern, {
        "input": {"kind": "stress_report",
                  "filters": {"informational.stress_level": "high"}},
        "outcome": {"kind": "meal",
                    "filters": {"structural.meal_type": "dinner"},
                    "value": {"field": "informational.weight_class",
                              "equals": "heavy"}},
        "window_hours": 16.5,
        "confounders": ["temperature_level"]})
    assert main(["mine", "verify", "--stream", str(stream_dir),
                 "--pattern", str(pattern), "--out", str(tmp_path / "mv")]) == 0
    rule = read_json(tmp_path / "mv" / "verified_rule.json")
    assert rule["verdict"] in ("supported", "rejected", "inconclusive")


def test_eval_rq1_structure(tmp_path):
    stream_dir = tmp_path / "s"
    assert main(["gen", "--days", "90", "--seed", "2",
                 "--out", str(stream_dir)]) == 0
    assert main(["eval", "rq1", "--stream", str(stream_dir),
                 "--out", str(tmp_path / "rq1")]) == 0
    lines = (tmp_path / "rq1" / "rq1_bins.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 5 * 3 * 9


def test_atlas_ingest_and_query(tmp_path, taste_dataset):
    from pfmlab.cre import build_synthetic_atlas
    from pfmlab.jsonutil import write_jsonl
    records = build_synthetic_atlas(taste_dataset, seed=1, n_eateries=6,
                                    n_stores=2, n_recipes=4, n_supplements=1)
    src = tmp_path / "records.jsonl"
    write_jsonl(src, records)
    store_dir = tmp_path / "atlas"
    assert main(["atlas", "ingest", "--records", str(src),
                 "--out", str(store_dir)]) == 0
    assert read_json(store_dir / "rejections.json") == []
    out = tmp_path / "eateries.json"
    assert main(["atlas", "query", "--class", "eateries", "--store", str(store_dir),
                 "--lat", "33.68", "--lon", "-117.82", "--radius-km", "80",
                 "--out", str(out)]) == 0
    assert len(read_json(out)) > 0
    effects_out = tmp_path / "effects.json"
    menu_id = read_json(out)[0]["menu_item_ids"][0]
    assert main(["atlas", "query", "--class", "effects", "--store", str(store_dir),
                 "--food", menu_id, "--out", str(effects_out)]) == 0


def test_cfg_pipeline(tmp_path):
    stream_dir = tmp_path / "s"
    assert main(["gen", "--days", "60", "--seed", "8",
                 "--out", str(stream_dir)]) == 0
    settings = tmp_path / "settings.json"
    write_json(settings, {"nutrition_level": 3, "preference_level": 2,
                          "restriction_list": ["Ham"]})
    samples = tmp_path / "cf.json"
    assert main(["cfg", "emit", "--stream", str(stream_dir),
                 "--settings", str(settings), "--person", "user1",
                 "--n-samples", "25", "--seed", "3",
                 "--out", str(samples)]) == 0
    doc = read_json(samples)
    assert len(doc["samples"]) + doc["skipped_all_restricted"] == 25

    templates = tmp_path / "seq.txt"
    assert main(["cfg", "templates", "--samples", str(samples),
                 "--category", "sequential", "--out", str(templates)]) == 0
    lines = templates.read_text().strip().splitlines()
    assert len(lines) == 3 * len(doc["samples"])
    assert all("\t" in line for line in lines)

    # rank one emitted option list through the file interface
    personal = tmp_path / "personal.json"
    write_json(personal, doc["personal"])
    options = tmp_path / "options.json"
    write_json(options, doc["samples"][0]["options"])
    ranking_out = tmp_path / "ranking.json"
    assert main(["cfg", "rank", "--settings", str(settings),
                 "--personal", str(personal), "--options", str(options),
                 "--out", str(ranking_out)]) == 0
    ranking = read_json(ranking_out)
    assert ranking["top_choice"] == doc["samples"][0]["target_id"]
    assert ranking["ordering"] == doc["samples"][0]["cfg_sorted_ids"]


def test_run_rq2_metrics(tmp_path):
    out = tmp_path / "rq2"
    assert main(["run", "--experiment", "rq2", "--days", "120", "--seed", "5",
                 "--out", str(out)]) == 0
    metrics = read_json(out / "metrics.json")
    assert set(metrics) == {"none", "stress_only", "temperature_only",
                            "stress_and_temperature"}
    manifest = read_json(out / "manifest.json")
    assert manifest["experiment"] == "rq2"

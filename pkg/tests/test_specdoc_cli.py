import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from mtdgame import CostModel, GameSpec
from mtdgame.cli import main
from mtdgame.specdoc import (
    DEFAULT_DOCUMENT,
    SpecError,
    dumps_spec,
    parse_spec,
    spec_from_document,
    spec_hash,
    spec_to_document,
)


def doc(**changes):
    d = json.loads(json.dumps(DEFAULT_DOCUMENT))
    d.update(changes)
    return d


def test_default_document_round_trip():
    assert spec_from_document(DEFAULT_DOCUMENT) == GameSpec()
    assert parse_spec(dumps_spec(GameSpec())) == GameSpec()


@given(
    beta=st.floats(0.01, 0.99),
    q=st.floats(0, 10),
    kind=st.sampled_from(["none", "log", "linear"]),
    rule=st.sampled_from(["match_and_keep", "current", "target"]),
)
def test_round_trip_property(beta, q, kind, rule):
    spec = GameSpec(discount=beta, cost_model=CostModel(kind, q), attacker_rule=rule)
    again = parse_spec(dumps_spec(spec))
    assert again == spec
    assert spec_hash(again) == spec_hash(spec)


def test_timing_section():
    spec = spec_from_document(doc(timing={"brute_force_seconds": [30, 60], "margin": 0.5}))
    assert spec.brute_force_times == (30.0, 60.0) and spec.slot_margin == 0.5
    assert spec_to_document(spec)["timing"]["brute_force_seconds"] == [30, 60]


@pytest.mark.parametrize(
    "bad",
    [
        doc(colour="red"),
        doc(beta=1.0),
        doc(techniques=0),
        doc(cost={"model": "cubic", "q": 1}),
        doc(rewards={"defender_other_tech": 10}),
        doc(power={"defender": [1, 3], "attacker": [1, 3], "extra": 1}),
        doc(conventions={"attacker_reward": "always"}),
    ],
)
def test_schema_rejections(bad):
    with pytest.raises(SpecError):
        spec_from_document(bad)


def test_semantic_rejection_after_schema():
    with pytest.raises(SpecError, match="defender_power"):
        spec_from_document(doc(power={"defender": [1], "attacker": [1, 3]}))


def test_parse_error_has_position():
    with pytest.raises(SpecError, match=r"<spec>:2:\d+"):
        parse_spec('{\n  "beta": ,\n}')


def test_unknown_key_message_names_path():
    d = doc()
    d["rewards"]["bonus"] = 1
    with pytest.raises(SpecError, match="rewards"):
        spec_from_document(d)


def test_hash_ignores_key_order():
    text = json.dumps(DEFAULT_DOCUMENT, sort_keys=False)
    shuffled = json.dumps(dict(reversed(list(DEFAULT_DOCUMENT.items()))))
    assert spec_hash(parse_spec(text)) == spec_hash(parse_spec(shuffled))


# CLI


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_json_and_csv_agree(capsys, tmp_path):
    code, out, _ = run(capsys, "solve")
    assert code == 0
    bundle = json.loads(out)
    assert bundle["certificate"]["passed"] is True
    assert bundle["bimatrix_shape"] == [256, 16]
    assert {"spec_hash", "tool_version", "solver_label", "started", "finished"} <= set(bundle["metadata"])
    code, out, _ = run(capsys, "solve", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["state", "value_defender", "value_attacker"]
    assert [r[1] for r in rows[1:]] == bundle["values"]["defender"]


def test_solve_writes_tables(capsys, tmp_path):
    assert run(capsys, "solve", "--out", str(tmp_path), "--format", "csv")[0] == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert names == {"values.csv", "defender_policy.csv", "attacker_policy.csv", "certificate.csv"}
    assert run(capsys, "solve", "--out", str(tmp_path))[0] == 0
    assert (tmp_path / "result.json").exists()


def test_sweep_json_csv_numbers_identical(capsys):
    _, js, _ = run(capsys, "sweep-beta", "--from", "0.2", "--to", "0.4")
    _, cs, _ = run(capsys, "sweep-beta", "--from", "0.2", "--to", "0.4", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(cs)))
    assert [r["value_defender"] for r in rows] == [r["value_defender"] for r in json.loads(js)["rows"]]
    assert len(rows) == 12


def test_sweeps_run(capsys):
    assert run(capsys, "compare-uniform", "--betas", "0.5,0.75")[0] == 0
    assert run(capsys, "sweep-cost", "--betas", "0.5", "--format", "csv")[0] == 0
    code, out, _ = run(capsys, "sweep-power", "--scenario", "2,2", "--format", "csv")
    assert code == 0 and out.count("\n") == 5


def test_simulate_from_saved_policy(capsys, tmp_path):
    run(capsys, "solve", "--out", str(tmp_path))
    log = tmp_path / "episodes.jsonl"
    code, out, _ = run(
        capsys, "simulate", "--policy", str(tmp_path / "result.json"), "--episodes", "200",
        "--start", "2", "--format", "csv", "--log", str(log), "--log-episodes", "3",
    )
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["state"] == "2" and row["episodes"] == "200"
    assert abs(float(row["mean_defender"]) - float(row["value_defender"])) < 1e-3
    lines = log.read_text().splitlines()
    assert len(lines) == 3 and json.loads(lines[0])["episode"] == 0


def test_simulate_is_reproducible(capsys):
    args = ("simulate", "--solve-first", "--episodes", "100", "--seed", "5", "--format", "csv")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_exit_codes(capsys, tmp_path):
    big = tmp_path / "big.json"
    big.write_text(json.dumps(doc(keys_per_technique=4)))
    code, _, err = run(capsys, "solve", "--spec", str(big))
    assert code == 2 and "refused" in err
    assert run(capsys, "sweep-beta", "--from", "0.9", "--to", "0.1")[0] == 3
    assert run(capsys, "solve", "--spec", str(tmp_path / "missing.json"))[0] == 3
    assert run(capsys, "simulate")[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert run(capsys, "solve", "--spec", str(bad))[0] == 3
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 3


def test_uncertified_exit(capsys, tmp_path):
    spec = tmp_path / "cost.json"
    spec.write_text(json.dumps(doc(beta=0.9, cost={"model": "linear", "q": 1})))
    assert run(capsys, "solve", "--spec", str(spec))[0] == 1


def test_shipped_default_spec():
    from pathlib import Path

    from mtdgame.specdoc import load_spec

    path = Path(__file__).resolve().parents[1] / "specs" / "default.json"
    assert load_spec(path) == GameSpec()


def test_single_point_sweep_matches_solve(capsys):
    _, js, _ = run(capsys, "solve")
    _, sw, _ = run(capsys, "sweep-beta", "--from", "0.75", "--to", "0.75")
    assert [r["value_defender"] for r in json.loads(sw)["rows"]] == json.loads(js)["values"]["defender"]


def test_trivial_spec_compare_uniform(capsys, tmp_path):
    path = tmp_path / "one.json"
    path.write_text(json.dumps(doc(techniques=1, keys_per_technique=1, power={"defender": [1], "attacker": [1]})))
    code, out, _ = run(capsys, "compare-uniform", "--spec", str(path), "--format", "csv")
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(row["percent_increase"]) == 0.0


def test_simulate_matches_solved_values(capsys):
    code, out, _ = run(capsys, "simulate", "--solve-first", "--episodes", "10000", "--seed", "42", "--format", "csv")
    assert code == 0
    for row in csv.DictReader(io.StringIO(out)):
        gap = abs(float(row["mean_defender"]) - float(row["value_defender"]))
        # pure equilibrium: zero spread, only the truncated tail remains
        assert gap <= 3 * float(row["se_defender"]) + 1e-3

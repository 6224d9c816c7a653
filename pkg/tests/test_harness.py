"""Spec files, verification suites and the command line."""

import json

import pytest
import yaml

from twistlab.cli import main
from twistlab.grouptable import named_table
from twistlab.harness import Config, exit_status, format_records, format_table, load_config, parse_config, run_suite
from twistlab.specio import (SpecError, load, named_group, parse_group, parse_spec, parse_text, resolve_instance,
                             same_object, serialize)


# -- spec files ------------------------------------------------------------

@pytest.mark.parametrize("name", ["trivial-phi(A5,S2)", "nonfaithful(5,S2)", "almost-simple(6)",
                                  "trivial-phi(PSL27,C3)"])
def test_round_trip_instances(name):
    D = resolve_instance(name)
    D2 = parse_text(serialize(D))
    assert same_object(D, D2)
    assert serialize(D2) == serialize(D)


def test_round_trip_group_and_table():
    G = named_group("D5")
    assert same_object(G, parse_text(serialize(G)))
    T = named_table("A5")
    T2 = parse_text(serialize(T))
    assert T2.size == 60 and same_object(T, T2)


def test_overlapping_cycles_named():
    with pytest.raises(SpecError, match="generators\\[0\\].*point 2"):
        parse_group({"degree": 3, "generators": ["(1 2)(2 3)"]})


def test_missing_field_path():
    with pytest.raises(SpecError, match="P"):
        parse_spec({"kind": "twist", "T": "A5", "phi": "trivial"})


def test_conjugation_needs_matching_normal_subgroup():
    obj = {"kind": "twist", "T": "A5", "P": {"degree": 3, "generators": ["(1 2 3)", "(1 2)"]},
           "phi": "conjugation"}
    with pytest.raises(SpecError, match="phi"):
        parse_spec(obj)


def test_named_table_size():
    assert parse_spec({"kind": "table", "group": "A5"}).size == 60


def test_load_from_file(tmp_path):
    path = tmp_path / "w.yaml"
    path.write_text(serialize(resolve_instance("trivial-phi(A5,S2)")))
    D = load(path)
    assert D.order() == 7200
    assert resolve_instance(str(path)).order() == 7200


def test_unknown_instance():
    with pytest.raises(SpecError):
        resolve_instance("nosuch(A5)")


# -- configs and suites -------------------------------------------------------

def test_config_errors_have_locations():
    with pytest.raises(SpecError, match="config.suites\\[1\\]"):
        parse_config({"suites": ["balanced", "nope"]})
    with pytest.raises(SpecError, match="config.seed"):
        parse_config({"seed": "x"})


def test_load_config(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({"suites": ["balanced"], "instances": ["almost-simple(6)"], "seed": 3}))
    cfg = load_config(str(path))
    assert cfg.suites == ["balanced"] and cfg.seed == 3


def strip(rows):
    return [(r.suite, r.instance, r.check, r.status,
             json.dumps({k: v for k, v in r.values.items() if k != "seconds"}, default=str, sort_keys=True))
            for r in rows]


def test_theorem_qp_suite():
    cfg = Config(["theorem-QP"], ["diagonal(A5)", "almost-simple(6)", "trivial-phi(A5,C3)"])
    rows = run_suite(cfg)
    assert rows and all(r.status == "pass" for r in rows)
    assert all(r.anchor for r in rows)
    assert exit_status(rows) == 0


def test_pyber_and_exp_suites():
    cfg = Config(["theorem-pyber", "theorem-exp"], ["blowup(diagonal(A5),S2)", "trivial-phi(A5,S2)"])
    rows = run_suite(cfg)
    assert [r.status for r in rows if r.suite == "theorem-pyber"] == ["pass", "pass"]
    exp = [r for r in rows if r.suite == "theorem-exp" and r.instance.startswith("blowup")]
    assert exp and exp[0].status == "pass"


def test_reports_deterministic_and_sorted():
    cfg = Config(["fix-counts", "action-laws", "balanced"], ["trivial-phi(A5,S2)", "nonfaithful(5,S2)"],
                 law_samples=200)
    a, b = run_suite(cfg), run_suite(Config(**{**cfg.__dict__, "threads": 2}))
    assert strip(a) == strip(b)
    assert [r.suite for r in a] == sorted((r.suite for r in a), key=["action-laws", "fix-counts",
                                                                       "balanced"].index)
    table, records = format_table(a), format_records(a)
    assert len(table.splitlines()) == len(a) + 1 and len(records.splitlines()) == len(a)


def test_failed_build_becomes_row():
    rows = run_suite(Config(["balanced"], ["nosuch(A5)"]))
    assert rows[0].status == "fail" and "twistlab verify" in rows[0].repro
    assert exit_status(rows) == 1


# -- command line --------------------------------------------------------------

def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_cli_construct(capsys, tmp_path):
    out = tmp_path / "d.yaml"
    code, cap = run_cli(capsys, "construct", "--spec", "trivial-phi(A5,S2)", "--out", str(out))
    assert code == 0 and "7200" in cap.out
    assert load(out).order() == 7200


def test_cli_base_records(capsys):
    code, cap = run_cli(capsys, "--format", "records", "base", "--spec", "trivial-phi(A5,S2)")
    rec = json.loads(cap.out)
    assert code == 0 and rec["exact"] == 2 and rec["delta"] == 1


def test_cli_flags_after_subcommand(capsys):
    code, cap = run_cli(capsys, "prob", "--spec", "trivial-phi(A5,S2)", "--format", "records", "--seed", "5")
    rec = json.loads(cap.out)
    assert code == 0 and rec["mc_estimate"] == "1/60" and rec["seed"] == 5


def test_cli_prob_limits_b(capsys):
    code, cap = run_cli(capsys, "prob", "--spec", "trivial-phi(A5,S2)", "--b", "5")
    assert code == 2 and "between 1 and 4" in cap.err


def test_cli_dist_group(capsys):
    code, cap = run_cli(capsys, "--format", "records", "dist", "--group", "S5")
    assert code == 0 and json.loads(cap.out)["d"] == 5


def test_cli_classify_and_balanced(capsys):
    code, cap = run_cli(capsys, "--format", "records", "classify", "--spec", "trivial-phi(A5,S2)", "--oracle")
    rec = json.loads(cap.out)
    assert rec["primitive"] is False and rec["oracle"]["primitive"] is False
    code, cap = run_cli(capsys, "--format", "records", "balanced", "--spec", "almost-simple(6)")
    assert json.loads(cap.out)["minimal_twisted"] is True


def test_cli_examples_round_trip(capsys, tmp_path):
    out = tmp_path / "e.yaml"
    code, _ = run_cli(capsys, "examples", "--family", "nonfaithful", "--params", "5", "S2", "--out", str(out))
    assert code == 0
    code, cap = run_cli(capsys, "--format", "records", "construct", "--spec", str(out))
    assert code == 0 and json.loads(cap.out)["faithful_top"] is False


def test_cli_spec_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("kind: twist\nT: A5\nP: {degree: 3, generators: ['(1 2)(2 3)']}\nphi: trivial\n")
    code, cap = run_cli(capsys, "construct", "--spec", str(bad))
    assert code == 2 and "point 2" in cap.err


def test_cli_verify_exit_codes(capsys, tmp_path):
    code, cap = run_cli(capsys, "verify", "--suite", "balanced", "--instance", "almost-simple(6)")
    assert code == 0 and "pass" in cap.out
    code, _ = run_cli(capsys, "verify", "--suite", "balanced", "--instance", "nosuch(A5)")
    assert code == 1
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope"])
    assert exc.value.code == 2

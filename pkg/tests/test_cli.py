import json

import pytest

from fourslot import harness
from fourslot.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_prove_unmodified_passes(capsys):
    code, out = run(capsys, "prove", "--k", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[-1] == "overall: pass"
    assert not any(line.startswith("FAIL") for line in lines)


def test_prove_mutation_names_failing_node(capsys):
    code, out = run(capsys, "prove", "--mutate", "swap-a+1-a+2")
    assert code != 0
    assert "overall: FAIL at AUX_a" in out


def test_structured_output_is_byte_identical(capsys):
    outputs = [run(capsys, "prove", "--k", "3", "--mutate", "drop-b-2", "--format",
                   "structured")[1] for _ in range(2)]
    assert outputs[0] == outputs[1]
    records = [json.loads(line) for line in outputs[0].splitlines()]
    assert records[-1] == {"record": "overall", "ok": False, "failed": "COND2",
                           "nodes": len(records) - 1}
    fuzz = [run(capsys, "fuzz", "--writes", "2000", "--reads", "2000", "--seed", "4",
                "--jitter", "uniform", "--format", "structured")[1] for _ in range(2)]
    assert fuzz[0] == fuzz[1]


def test_fuzz_reports_clean_run(capsys):
    code, out = run(capsys, "fuzz", "--writes", "100000", "--reads", "100000", "--seed", "7")
    assert code == 0
    assert out.strip().endswith(
        "0 races, coherence OK, freshness OK, integrity OK, linearizability OK")


def test_fuzz_race_is_nonzero_exit(capsys):
    code, out = run(capsys, "fuzz", "--writes", "200", "--reads", "200", "--scheduled",
                    "--mutate", "drop-b-2", "--seed", "1")
    assert code == 1 and "FAIL" in out


def test_fuzz_history_then_lincheck(tmp_path, capsys):
    path = tmp_path / "h.jsonl"
    code, _ = run(capsys, "fuzz", "--writes", "4", "--reads", "4", "--scheduled",
                  "--save-history", str(path))
    assert code == 0
    code, out = run(capsys, "lincheck", str(path))
    assert code == 0
    assert "linearizability: pass" in out and "agrees" in out


def test_lincheck_rejects_stale_history(tmp_path, capsys):
    result = harness.run_scheduled(3, 3, seed=2, writer_bias=0.9)
    text = result.history.dumps().splitlines()
    # rewrite the last read so it returns the initial value after all writes returned
    last = max(k for k, line in enumerate(text) if '"read-return"' in line)
    row = json.loads(text[last])
    row[5], row[6] = 1, 0
    text[last] = json.dumps(row)
    path = tmp_path / "stale.jsonl"
    path.write_text("\n".join(text) + "\n")
    code, out = run(capsys, "lincheck", str(path))
    assert code == 1 and "FAIL" in out


def test_lincheck_missing_file(tmp_path, capsys):
    code, out = run(capsys, "lincheck", str(tmp_path / "absent"))
    assert code == 2


def test_explore_and_out_file(tmp_path, capsys):
    out_path = tmp_path / "report.txt"
    code, printed = run(capsys, "explore", "--k", "3", "--out", str(out_path))
    assert code == 0 and printed == ""
    text = out_path.read_text()
    assert "reachable states: 1690" in text and "transitions: 3001" in text
    assert "stable from K=6" in text


def test_catalog(capsys):
    code, out = run(capsys, "catalog", "--format", "structured")
    names = [json.loads(line)["name"] for line in out.splitlines()]
    assert code == 0 and "FRESH2" in names and "COND1" in names


@pytest.mark.parametrize("argv", [[], ["prove", "--k", "0"], ["fuzz", "--writes", "-1"],
                                  ["explore", "--mutate", "bogus"], ["nonsense"]])
def test_bad_flags(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code != 0
    assert "usage" in capsys.readouterr().err

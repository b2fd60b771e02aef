from __future__ import annotations

import csv
import json

import pytest
from conftest import INSTANCES

from qmrgen import cli
from qmrgen.cli import BENCH_COLUMNS

LINE4_CYCLE = ["--program", "nisqmr", "--arch", str(INSTANCES / "line4.json"), "--circuit", str(INSTANCES / "line4_cycle.qc")]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_then_validate(tmp_path, capsys):
    sol, log = tmp_path / "s.json", tmp_path / "log.csv"
    code, out, _ = run(capsys, "solve", *LINE4_CYCLE, "--seed", "1", "--out", str(sol), "--log", str(log))
    assert code == 0
    report = json.loads(out)
    assert report["status"] == "ok" and report["best_cost"] == 1.0 and report["seed"] == 1
    assert report["solution_path"] == str(sol) and "solution" not in report
    assert log.read_text().splitlines()[0] == "wall_seconds,worker_id,best_cost"
    code, out, _ = run(capsys, "validate", *LINE4_CYCLE, "--solution", str(sol))
    assert (code, out) == (0, "ok: 2 states, total cost 1\n")


def test_same_seed_gives_identical_solution_files(tmp_path, capsys):
    files = []
    for k in range(2):
        path = tmp_path / f"s{k}.json"
        assert run(capsys, "solve", *LINE4_CYCLE, "--seed", "9", "--out", str(path))[0] == 0
        files.append(path.read_bytes())
    assert files[0] == files[1]


def test_random_seed_is_reported(capsys):
    code, out, _ = run(capsys, "solve", *LINE4_CYCLE)
    report = json.loads(out)
    assert code == 0 and isinstance(report["seed"], int) and "solution" in report


def test_fixed_map_and_flags(capsys):
    code, out, _ = run(capsys, "solve", *LINE4_CYCLE, "--fixed-map", '{"0": 3, "1": 2, "2": 1, "3": 0}',
                       "--no-warm-start", "--no-criticality")
    report = json.loads(out)
    assert code == 0 and report["solution"]["steps"][0]["map"] == {"0": 3, "1": 2, "2": 1, "3": 0}
    assert report["config"]["warm_start"] is False


def test_timeout_zero_reports_no_solution(capsys):
    code, out, err = run(capsys, "solve", *LINE4_CYCLE, "--timeout", "0", "--seed", "0")
    assert code == 2 and json.loads(out)["status"] == "no-solution" and "timeout" in err


def test_tampered_solution_is_rejected(tmp_path, capsys):
    sol = tmp_path / "s.json"
    run(capsys, "solve", *LINE4_CYCLE, "--seed", "1", "--out", str(sol))
    data = json.loads(sol.read_text())
    data["total_cost"] = 3.0
    data["steps"][0]["routes"] = data["steps"][0]["routes"][:1]
    sol.write_text(json.dumps(data))
    code, out, _ = run(capsys, "validate", *LINE4_CYCLE, "--solution", str(sol))
    lines = out.splitlines()
    assert code == 2
    assert any(line.startswith("step -: instruction missing: g") for line in lines)
    assert any("total cost recorded 3.0" in line for line in lines)


@pytest.mark.parametrize("argv, fragment", [
    (["solve", "--program", "nosuch", "--arch", "line:4", "--circuit", "x.qc"], "neither a file nor a built-in"),
    (["solve", "--program", "nisqmr", "--arch", "ring:4", "--circuit", str(INSTANCES / "line4_cycle.qc")], "ring"),
    (["solve", "--program", "nisqmr", "--arch", "line:4", "--circuit", "missing.qc"], "not found"),
    (["solve", "--program", "nisqmr", "--arch", "line:2", "--circuit", str(INSTANCES / "line4_cycle.qc")], "only 2 locations"),
])
def test_bad_inputs_exit_1(capsys, argv, fragment):
    code, _, err = run(capsys, *argv)
    assert code == 1 and fragment in err


def test_bad_program_files(tmp_path, capsys):
    p = tmp_path / "bad.marol"
    p.write_text("RouteInfo:\n  ???\n")
    code, _, err = run(capsys, "check", "--program", str(p))
    assert code == 1 and err.startswith("syntax error")
    p.write_text((INSTANCES.parent / "src/qmrgen/problems/nisqmr.marol").read_text().replace("else 1.0", "else 1"))
    code, _, err = run(capsys, "check", "--program", str(p))
    assert code == 1 and "10:10: cost: branches of 'if' differ: Float and Int" in err


def test_check(capsys):
    assert run(capsys, "check", "--program", "nisqmr")[1] == "non-interfering\n"
    assert run(capsys, "check", "--program", "nisq_ve")[1] == "non-interfering\n"
    assert run(capsys, "check", "--program", "scmr")[1] == "interfering\n"


def test_oracle(tmp_path, capsys):
    assert run(capsys, "oracle", *LINE4_CYCLE)[:2] == (0, "1\n")
    empty = tmp_path / "e.qc"
    empty.write_text("")
    assert run(capsys, "oracle", "--program", "nisqmr", "--arch", "line:4", "--circuit", str(empty))[:2] == (0, "0\n")
    code, _, err = run(capsys, "oracle", "--program", "nisqmr", "--arch", "line:6", "--circuit", str(INSTANCES / "line4_cycle.qc"))
    assert code == 1 and "bound" in err
    split = tmp_path / "split.json"
    split.write_text('{"n": 2, "edges": []}')
    pair = tmp_path / "p.qc"
    pair.write_text("cx 0 1\n")
    assert run(capsys, "oracle", "--program", "nisqmr", "--arch", str(split), "--circuit", str(pair))[:2] == (2, "inf\n")


def test_bench(tmp_path, capsys):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps([
        {"program": "nisqmr", "arch": str(INSTANCES / "line4.json"), "circuit": str(INSTANCES / "line4_cycle.qc"),
         "timeout": 10, "seed": 0},
        {"program": "nisqmr", "arch": "line:4", "circuit": str(INSTANCES / "grid_two_cx.qc"), "timeout": 10, "seed": 1},
        {"program": "scmr", "arch": str(INSTANCES / "grid3x3_magic.json"), "circuit": str(INSTANCES / "magic_cx_t.qc"),
         "timeout": 10, "seed": 2},
    ]))
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "bench", "--suite", str(suite), "--out", str(out_dir))
    assert code == 0 and out.strip() == str(out_dir / "bench.csv")
    with open(out_dir / "bench.csv", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    assert reader.fieldnames == BENCH_COLUMNS and len(rows) == 3
    assert [r["status"] for r in rows] == ["ok"] * 3
    assert rows[0]["best_cost"] == "1.0"
    for k in range(3):
        assert (out_dir / f"{k:03d}.solution.json").exists() and (out_dir / f"{k:03d}.log.csv").exists()


def test_bench_empty_manifest(tmp_path, capsys):
    suite = tmp_path / "suite.json"
    suite.write_text("[]")
    assert run(capsys, "bench", "--suite", str(suite), "--out", str(tmp_path / "o"))[0] == 0
    assert (tmp_path / "o" / "bench.csv").read_text() == ",".join(BENCH_COLUMNS) + "\n"

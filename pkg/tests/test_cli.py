import io
import json
import subprocess
import sys

import pytest

from para_renorm.cli import CSV_HEADER, SCHEMA, dispatch


def run(*argv):
    buf = io.StringIO()
    code = dispatch(list(argv), buf)
    return code, buf.getvalue()


def test_cf_expand():
    code, out = run("cf", "expand", "5/13")
    assert code == 0
    js = json.loads(out)
    assert js["result"] == [[3, 1], [2, -1], [2, 1]] and js["schema"] == SCHEMA


def test_unknown_subcommand_exit_2():
    assert run("frobnicate")[0] == 2
    assert run("cf", "nope")[0] == 2


@pytest.mark.parametrize("argv", [("cf", "expand", "7/3"), ("tower", "run", "--seed", "1/7",
                                                              "--kappa", "b", "--depth", "1"),
                                  ("--set", "bogus=1", "config", "show"),
                                  ("--out", "csv", "cf", "expand", "1/3")])
def test_input_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_fatou_grid_csv():
    code, out = run("--out", "csv", "fatou", "grid", "--alpha", "0.05+0.02i", "--n", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 17
    assert max(float(l.split(",")[-1]) for l in lines[1:]) < 1e-6


def test_tower_run_json_deterministic():
    argv = ("tower", "run", "--seed", "(sqrt(45)-7)/2", "--kappa", "t", "--depth", "5", "--r", "0.15")
    a, b = run(*argv), run(*argv)
    assert a == b and a[0] == 0
    js = json.loads(a[1])
    assert len(js["levels"]) == 5 and js["status"] == "depth_reached"


def test_config_show_override():
    code, out = run("--set", "N=31", "config", "show")
    assert code == 0 and json.loads(out)["constants"]["N"] == 31


def test_output_file(tmp_path):
    p = tmp_path / "r.json"
    assert run("--output", str(p), "maps", "ply", "--pq", "1/3")[0] == 0
    assert json.loads(p.read_text())["radius"] > 0


def test_gauss_and_maps_commands():
    assert json.loads(run("gauss", "orbit", "5/13")[1])["terminated"]
    assert run("gauss", "cone-check", "(3,+)")[0] == 0
    js = json.loads(run("maps", "fixed-data", "--alpha", "0.1")[1])
    assert abs(complex(*js["index"])) < 1e-8


def test_sweep_workers_match():
    argv = ("sweep", "--seq", "(20,+);(400,+);(160000,+)", "--r3", "0.2", "--r5", "0.1,0.2")
    one = run("--workers", "1", *argv)
    two = run("--workers", "2", *argv)
    assert json.loads(one[1])["cells"] == json.loads(two[1])["cells"]


def test_selftest_byte_identical():
    a = run("selftest")
    b = run("selftest")
    assert a[0] == 0 and a == b
    assert json.loads(a[1])["ok"]


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "para_renorm", "cf", "evaluate", "(2,+)"],
                       capture_output=True, text=True, check=True)
    assert json.loads(p.stdout)["value"] == "1/2"

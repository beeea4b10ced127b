import csv
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from spintomo import io
from spintomo.cli import CSV_COLUMNS, main


@pytest.fixture
def files(tmp_path):
    def path(name):
        return str(tmp_path / name)

    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_scheme_new_preset_matches_reference(files, capsys):
    assert run("scheme", "new", "--preset", "example1", "--out", files("e1.json")) == 0
    assert "scheme example1: PASS" in capsys.readouterr().out
    s = io.load_scheme(files("e1.json"))
    np.testing.assert_allclose(s.D, io.reference_matrices("example1", "D"), atol=1e-15)


def test_scheme_new_random_deterministic(files):
    for name in ("a.json", "b.json"):
        assert run("scheme", "new", "--random", 7, "--mode", "mixed", "--out", files(name)) == 0
    assert open(files("a.json")).read() == open(files("b.json")).read()


def test_scheme_new_from_triple(files):
    with open(files("v.json"), "w") as fh:
        json.dump({"vectors": [[0, 0.8, 0.6], [0.8, 0, -0.6], [0, -0.8, 0.6]]}, fh)
    assert run("scheme", "new", "--vectors", files("v.json"), "--out", files("s.json")) == 0
    np.testing.assert_allclose(io.load_scheme(files("s.json")).vectors[3], [-0.8, 0, -0.6], atol=1e-15)


def test_scheme_new_coplanar_names_delta(files, capsys):
    with open(files("v.json"), "w") as fh:
        json.dump([[0.5, 0, 0], [0, 0.5, 0], [-0.5, -0.5, 0], [0, 0, 0]], fh)
    assert run("scheme", "new", "--vectors", files("v.json"), "--out", files("s.json")) == 1
    assert "Delta_1" in capsys.readouterr().err


def test_scheme_new_needs_exactly_one_source(files):
    assert run("scheme", "new", "--out", files("s.json")) == 2
    assert run("scheme", "new", "--preset", "example1", "--random", 1, "--out", files("s.json")) == 2


def test_scheme_validate(files, capsys):
    run("scheme", "new", "--preset", "example2", "--out", files("e2.json"))
    capsys.readouterr()
    assert run("scheme", "validate", files("e2.json")) == 0
    assert "scheme example2: PASS" in capsys.readouterr().out


def test_scheme_validate_json_is_machine_readable(files, capsys):
    run("scheme", "new", "--preset", "example1", "--out", files("e1.json"))
    capsys.readouterr()
    assert run("scheme", "validate", files("e1.json"), "--json") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and {c["name"] for c in report["checks"]} >= {"orthogonality", "completeness"}


def test_scheme_validate_rejects_long_vector(files, capsys):
    run("scheme", "new", "--preset", "example1", "--out", files("e1.json"))
    doc = json.load(open(files("e1.json")))
    doc["vectors"][0] = [0.0, 1.2, 0.9]
    json.dump(doc, open(files("bad.json"), "w"))
    capsys.readouterr()
    assert run("scheme", "validate", files("bad.json")) == 1
    assert run("scheme", "validate", files("bad.json"), "--json") == 1
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] is False and any("exceeds 1" in f for f in out["geometry"]["failures"])


def test_map_forward_and_inverse(files, capsys):
    run("scheme", "new", "--preset", "example1", "--out", files("e1.json"))
    run("state", "new", "--bloch", 0, 0, 1, "--out", files("up.json"))
    assert run("map", "forward", "--scheme", files("e1.json"), "--state", files("up.json"), "--out", files("w.json")) == 0
    np.testing.assert_allclose(io.load_tomogram(files("w.json")).w, [0.8, 0.2, 0.8, 0.2], atol=1e-15)

    io.save_tomogram(files("half.json"), io.Tomogram([0.5] * 4))
    args = ("map", "inverse", "--scheme", files("e1.json"), "--tomogram", files("half.json"), "--out", files("r.json"))
    assert run(*args, "--check-physical") == 0
    np.testing.assert_allclose(io.load_state(files("r.json")), np.eye(2) / 2, atol=1e-15)

    io.save_tomogram(files("bad.json"), io.Tomogram([1.0, 1.0, 0.0, 0.0]))
    args = ("map", "inverse", "--scheme", files("e1.json"), "--tomogram", files("bad.json"), "--out", files("r.json"))
    assert run(*args) == 0
    assert run(*args, "--check-physical") == 1


def test_map_dimension_mismatch_is_usage_error(files):
    run("scheme", "new", "--preset", "example1", "--out", files("e1.json"))
    run("state", "new", "--bell", "--out", files("bell.json"))
    assert run("map", "forward", "--scheme", files("e1.json"), "--state", files("bell.json"), "--out", files("w.json")) == 2


def test_tensor_build_verify(files, capsys):
    run("scheme", "new", "--preset", "example1", "--out", files("e1.json"))
    run("scheme", "new", "--preset", "example2", "--out", files("e2.json"))
    assert run("tensor", "build", "--factors", files("e1.json"), "--n", 2, "--out", files("t2.json")) == 0
    assert run("tensor", "verify", files("t2.json"), "--exhaustive") == 0
    assert run("tensor", "build", "--factors", f"{files('e1.json')},{files('e2.json')}", "--out", files("t12.json")) == 0
    assert run("tensor", "verify", files("t12.json"), "--exhaustive") == 0
    assert run("tensor", "build", "--factors", "example1", "--n", 3, "--out", files("t3.json")) == 0
    assert run("tensor", "verify", files("t3.json"), "--exhaustive") == 2
    capsys.readouterr()
    assert run("tensor", "verify", files("t3.json"), "--json") == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True
    assert run("tensor", "build", "--factors", files("e1.json"), "--n", 0, "--out", files("t0.json")) == 2


def test_tensor_map_bell_round_trip(files):
    run("tensor", "build", "--factors", "example1", "--n", 2, "--out", files("t2.json"))
    run("state", "new", "--bell", "--out", files("bell.json"))
    assert run("map", "forward", "--scheme", files("t2.json"), "--state", files("bell.json"), "--out", files("w.json")) == 0
    args = ("map", "inverse", "--scheme", files("t2.json"), "--tomogram", files("w.json"), "--out", files("r.json"))
    assert run(*args, "--check-physical") == 0
    np.testing.assert_allclose(io.load_state(files("r.json")), io.load_state(files("bell.json")), atol=1e-14)


def _simulate(files, *extra):
    run("scheme", "new", "--preset", "example1", "--out", files("e1.json"))
    run("state", "new", "--maximally-mixed", "--out", files("mm.json"))
    return run("simulate", "--scheme", files("e1.json"), "--state", files("mm.json"), *extra)


def test_simulate_large_shots_small_error(files):
    assert _simulate(files, "--shots", 1_000_000, "--trials", 1, "--seed", 3, "--csv", files("a.csv")) == 0
    rows = list(csv.DictReader(open(files("a.csv"))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert float(rows[0]["frobenius_error"]) < 5e-3


def test_simulate_csv_reproducible_and_threaded(files):
    common = ("--shots", 100, 1000, "--trials", 20, "--seed", 11)
    assert _simulate(files, *common, "--csv", files("a.csv")) == 0
    assert _simulate(files, *common, "--csv", files("b.csv"), "--workers", 4) == 0
    assert open(files("a.csv")).read() == open(files("b.csv")).read()
    rows = list(csv.DictReader(open(files("a.csv"))))
    assert [int(r["trial"]) for r in rows] == list(range(20)) * 2


def test_simulate_without_seed_records_drawn_seed(files, capsys):
    assert _simulate(files, "--shots", 50, "--csv", files("a.csv")) == 0
    out = capsys.readouterr().out
    seed = int(out.split("using seed ")[1].split()[0])
    assert int(next(csv.DictReader(open(files("a.csv"))))["base_seed"]) == seed


def test_simulate_rejects_bad_state(files):
    run("scheme", "new", "--preset", "example1", "--out", files("e1.json"))
    io.save_state(files("bad.json"), np.diag([1.5, -0.5]))
    assert run("simulate", "--scheme", files("e1.json"), "--state", files("bad.json"), "--shots", 10, "--seed", 1) == 1


def test_io_errors_exit_3(files):
    assert run("scheme", "validate", files("missing.json")) == 3
    with open(files("bad.json"), "w") as fh:
        fh.write("{oops")
    assert run("scheme", "validate", files("bad.json")) == 3


def test_state_new_variants(files):
    assert run("state", "new", "--random", 5, "--n", 2, "--pure", "--out", files("p.json")) == 0
    rho = io.load_state(files("p.json"))
    assert rho.shape == (4, 4) and abs(np.trace(rho @ rho) - 1) < 1e-12
    assert run("state", "new", "--bloch", 1, 1, 0, "--out", files("x.json")) == 1
    assert run("state", "new", "--maximally-mixed", "--n", 0, "--out", files("x.json")) == 2


def test_selftest_default_under_a_minute(capsys):
    start = time.perf_counter()
    assert run("selftest") == 0
    assert time.perf_counter() - start < 60
    assert "10/10 suites passed" in capsys.readouterr().out


def test_selftest_fixed_seed(capsys):
    assert run("selftest", "--seed", 4, "--iterations", 20) == 0
    first = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert run("selftest", "--seed", 4, "--iterations", 20) == 0
    assert first == [line.split()[0] for line in capsys.readouterr().out.splitlines()]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "spintomo", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "selftest" in proc.stdout

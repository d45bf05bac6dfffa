import json
import re
import subprocess
import sys

import pytest

from fdhomog.cli import main


@pytest.fixture
def pair(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--model", "0", "--n", "15", "--grid", "10", "--seed", "1", "--out", str(a)]) == 0
    assert main(["simulate", "--model", "1", "--n", "12", "--grid", "10", "--seed", "2", "--out", str(b)]) == 0
    return a, b


def test_simulate_writes_header_plus_curves(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["simulate", "--model", "0", "--n", "50", "--seed", "7", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 51
    assert len(lines[0].split(",")) == 30


def test_simulate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--mean", "peak12", "--delta", "0.5", "--amp", "0.4", "--rate", "2", "--n", "5"]
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_unknown_model_fails(tmp_path, capsys):
    assert main(["simulate", "--model", "9", "--out", str(tmp_path / "x.csv")]) == 1
    assert "unknown model" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["test"])
    assert exc.value.code == 2


def test_depth_command(pair, tmp_path, capsys):
    a, b = pair
    assert main(["depth", str(b), str(a), "--method", "fm"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,label,depth" and len(lines) == 13
    out = tmp_path / "d.json"
    assert main(["depth", str(b), str(a), "--method", "rp", "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["method"] == "rp" and data["reference_size"] == 15 and len(data["values"]) == 12


def test_test_command_prints_verdict(pair, tmp_path, capsys):
    a, b = pair
    out = tmp_path / "r.json"
    assert main(["test", str(a), str(b), "--method", "fm", "--B", "60", "--seed", "3", "--out", str(out)]) == 0
    line = capsys.readouterr().out.strip()
    assert re.fullmatch(r"(REJECT|FAIL-TO-REJECT) p=\S+", line)
    data = json.loads(out.read_text())
    assert data["num_boot"] == 60 and data["seed"] == 3 and data["method"] == "fm"
    assert line.split()[0] == ("REJECT" if data["reject"] else "FAIL-TO-REJECT")


def test_test_command_flores_csv(pair, tmp_path, capsys):
    a, b = pair
    out = tmp_path / "r.csv"
    assert main(["test", str(a), str(b), "--method", "flores", "--B", "50", "--format", "csv",
                 "--out", str(out)]) == 0
    header, row = out.read_text().splitlines()
    assert header.split(",")[0] == "method" and row.startswith("flores-fm")


def test_grid_mismatch_fails(pair, tmp_path, capsys):
    a, _ = pair
    other = tmp_path / "o.csv"
    main(["simulate", "--model", "0", "--n", "5", "--grid", "11", "--out", str(other)])
    assert main(["test", str(a), str(other), "--method", "fm", "--B", "50"]) == 1
    assert "grid" in capsys.readouterr().err.lower()


def test_empty_file_fails(pair, tmp_path, capsys):
    a, _ = pair
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["test", str(a), str(empty), "--B", "50"]) == 1
    assert main(["test", str(a), str(tmp_path / "missing.csv"), "--B", "50"]) == 1


def test_label_split(tmp_path, capsys):
    p = tmp_path / "lab.csv"
    rows = ["label,0,0.5,1"] + [f"{'x' if i < 6 else 'y'},{i},{i * 0.5},{i % 3}" for i in range(14)]
    p.write_text("\n".join(rows) + "\n")
    assert main(["test", str(p), "--label", "x", "--method", "fm", "--B", "50"]) == 0
    assert main(["test", str(p), "--label", "z", "--B", "50"]) == 1
    assert main(["test", str(p), "--B", "50"]) == 1


def test_ddplot_identical_on_diagonal(pair, tmp_path):
    a, _ = pair
    svg = tmp_path / "dd.svg"
    assert main(["ddplot", str(a), str(a), "--method", "fd2", "--out", str(svg)]) == 0
    text = svg.read_text()
    assert 'class="diagonal"' in text
    markers = re.findall(r'class="marker ([fg])"[^>]*data-df="([\d.]+)" data-dg="([\d.]+)"', text)
    assert len(markers) == 30
    assert all(df == dg for _, df, dg in markers)


def test_ddplot_marks_groups(pair, tmp_path):
    a, b = pair
    svg = tmp_path / "dd.svg"
    assert main(["ddplot", str(a), str(b), "--method", "fm", "--out", str(svg)]) == 0
    text = svg.read_text()
    assert text.count('class="marker f"') == 15 and text.count('class="marker g"') == 12


SPEC = {"pairs": [[0, 0], [0, 1]], "tests": ["DD-FM", "Flores"], "num_boot": 50,
        "n_per_sample": 8, "grid_size": 6, "replications": 2, "master_seed": 3}


def test_experiment_deterministic(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(SPEC))
    for d in ("one", "two"):
        assert main(["experiment", str(spec), "--out", str(tmp_path / d), "--threads", "1"]) == 0
    assert main(["experiment", str(spec), "--out", str(tmp_path / "three"), "--threads", "2"]) == 0
    first = (tmp_path / "one" / "power_table.csv").read_bytes()
    assert first == (tmp_path / "two" / "power_table.csv").read_bytes()
    assert first == (tmp_path / "three" / "power_table.csv").read_bytes()
    assert first.decode().splitlines()[0] == "pair,test,replications,rejections,rate,mean_p_adjusted"
    summary = json.loads((tmp_path / "one" / "summary.json").read_text())
    assert set(summary) == {"DD-FM", "Flores"}


def test_experiment_json_and_override(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(SPEC))
    assert main(["experiment", str(spec), "--out", str(tmp_path / "o"), "--format", "json",
                 "--replications", "1", "--threads", "1"]) == 0
    rows = json.loads((tmp_path / "o" / "power_table.json").read_text())["rows"]
    assert all(r["replications"] == 1 for r in rows)


def test_experiment_bad_spec(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({**SPEC, "replications": 0}))
    assert main(["experiment", str(spec), "--out", str(tmp_path / "o")]) == 1
    assert "replications" in capsys.readouterr().err


def test_console_script(tmp_path):
    out = tmp_path / "s.csv"
    proc = subprocess.run([sys.executable, "-m", "fdhomog.cli", "simulate", "--model", "2", "--n", "3",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 4

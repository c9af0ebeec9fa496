import json
import subprocess
import sys


def run_cli(*args, check=True):
    proc = subprocess.run([sys.executable, "-m", "degdiv.cli", *args],
                          capture_output=True, text=True)
    if check:
        assert proc.returncode == 0, proc.stderr
    return proc


def test_gen_writes_graph_file(tmp_path):
    out = tmp_path / "g.txt"
    proc = run_cli("gen", "24", "0.5", "--seed", "7", "--out", str(out))
    summary = json.loads(proc.stdout)
    assert summary["n"] == 24
    text = out.read_text()
    first = text.splitlines()[0].split()
    assert first[0] == "24" and int(first[1]) == summary["m"]


def test_hom_from_file_and_gnp(tmp_path):
    out = tmp_path / "g.txt"
    run_cli("gen", "12", "0.5", "--seed", "3", "--out", str(out))
    from_file = json.loads(run_cli("hom", "--graph", str(out)).stdout)
    from_gnp = json.loads(run_cli("hom", "--gnp", "12,0.5,3").stdout)
    assert from_file == from_gnp
    assert from_file["value"] >= 2


def test_exit_code_precondition():
    proc = run_cli("hom", "--gnp", "300,0.5,1", check=False)
    assert proc.returncode == 2
    assert "precondition" in proc.stderr


def test_graph_argument_validation():
    missing = run_cli("hom", check=False)
    assert missing.returncode == 2 and "graph is required" in missing.stderr
    both = run_cli("hom", "--graph", "x.txt", "--gnp", "4,0.5,1", check=False)
    assert both.returncode == 2 and "mutually exclusive" in both.stderr


def test_exit_code_construction():
    proc = run_cli("partition", "--gnp", "512,0.5,2", "--k", "16", "--scale", "8",
                   "--growth", "2", "--alpha", "0.1", "--relax-degree-floor", "0.3",
                   "--relax-a2", "0", "--attempts", "3", check=False)
    assert proc.returncode == 3
    assert "construction" in proc.stderr


def test_bad_with_spec_file(tmp_path):
    spec = {"version": 1, "n": 10, "variant": "trivial", "domain": list(range(10))}
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    body = json.loads(run_cli("bad", "--gnp", "10,0.5,3", "--spec", str(spec_path),
                              "--pair", "0,1", "--samples", "200").stdout)
    assert body["point"] == 1.0


def test_csv_only_for_experiments():
    proc = run_cli("hom", "--gnp", "12,0.5,3", "--format", "csv", check=False)
    assert proc.returncode == 2


def test_experiment_csv_output(tmp_path):
    out = tmp_path / "rows.csv"
    run_cli("experiment", "--kind", "hom", "--n-values", "16,32", "--p-values", "0.5",
            "--grid-seeds", "0,1", "--format", "csv", "--out", str(out))
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "n,p,seed,metric,value,half_width,budget,commit"
    assert len(lines) == 5


def test_cluster_subcommand():
    body = json.loads(run_cli("cluster", "--gnp", "64,0.5,2", "--vertex", "3",
                              "--scale", "8", "--growth", "2").stdout)
    assert body["vertex"] == 3 and 3 in body["cluster"]


def test_pressure_and_synthesize_subcommands():
    body = json.loads(run_cli("pressure", "--gnp", "128,0.5,4", "--p", "0.5",
                              "--samples", "300", "--trials", "4", "--seed", "2").stdout)
    assert body["witness"]["value"] >= 1
    body = json.loads(run_cli("synthesize", "--gnp", "64,0.5,4", "--samples", "200",
                              "--trials", "4", "--seed", "2").stdout)
    assert body["trace"]


def test_repeat_runs_byte_identical():
    args = ("f-greedy", "--gnp", "40,0.5,6", "--effort", "3", "--seed", "9")
    assert run_cli(*args).stdout == run_cli(*args).stdout

"""Tests for CLI base structure and the commands."""

import json

import pytest

from effector import __version__
from effector.cli import main


@pytest.fixture
def study(study_files, monkeypatch, tmp_path):
    """Study files with the working directory moved next to them."""
    monkeypatch.chdir(tmp_path)
    return study_files


def base_args(study, *extra):
    return [
        "-g", str(study["graph"]), "--undirected", "--prob", "explicit",
        "--state", str(study["state"]), *extra,
    ]


# ============================================================================
# Basic CLI Tests
# ============================================================================

def test_version(runner):
    """Test --version flag."""
    result = runner.invoke(main, ["--version"])

    assert result.exit_code == 0
    assert __version__ in result.output


def test_help(runner):
    """Test --help flag."""
    result = runner.invoke(main, ["--help"])

    assert result.exit_code == 0
    assert "Effector" in result.output
    assert "independent-cascade" in result.output


def test_main_without_args(runner):
    """Test that no command is a usage error with exit code 1."""
    result = runner.invoke(main, [])

    assert result.exit_code == 1


def test_unknown_option(runner):
    """Test that an unknown option is a usage error with exit code 1."""
    result = runner.invoke(main, ["--colour"])

    assert result.exit_code == 1
    assert "No such option" in result.output


def test_debug_flag(runner):
    """Test --debug flag is recognized."""
    result = runner.invoke(main, ["--debug", "--help"])

    assert result.exit_code == 0


def test_invalid_project_config(runner, tmp_path, monkeypatch):
    """Test that a broken project config is a data error."""
    monkeypatch.chdir(tmp_path)
    (tmp_path / ".effector.yaml").write_text("lambda: [\n")

    result = runner.invoke(main, ["init", "--help"])

    assert result.exit_code == 2
    assert "Invalid YAML" in result.output


# ============================================================================
# Command Registration Tests
# ============================================================================

@pytest.mark.parametrize("command", ["init", "detect", "extract", "eval", "experiment", "sweep", "distances"])
def test_command_registered(runner, command):
    """Test that every command is registered and has help."""
    result = runner.invoke(main, [command, "--help"])

    assert result.exit_code == 0
    assert "Examples:" in result.output


# ============================================================================
# Detect Tests
# ============================================================================

@pytest.mark.parametrize("algo", ["mbed", "fbed", "mlbed", "outdegree", "random"])
def test_detect_json(runner, study, algo):
    """Test that every detector returns one active effector as JSON."""
    result = runner.invoke(main, ["detect", *base_args(study, "--algo", algo, "-b", "1", "--json")])

    assert result.exit_code == 0, result.output
    data = json.loads(result.stdout)
    assert data["algorithm"] == algo
    assert len(data["effectors"]) == 1
    assert data["effectors"][0] in {"a", "b", "c"}


def test_detect_text(runner, study):
    """Test the text form: header, note and labels."""
    result = runner.invoke(main, ["detect", *base_args(study, "--algo", "outdegree", "-b", "1")])

    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0].startswith("outdegree  B=1")
    assert lines[-1] == "a"


def test_detect_format_from_config(runner, study, tmp_path):
    """Test that format: json in the project config switches the output."""
    (tmp_path / ".effector.yaml").write_text("format: json\n")

    result = runner.invoke(main, ["detect", *base_args(study, "--algo", "random", "-b", "2", "--seed", "1")])

    assert result.exit_code == 0
    assert json.loads(result.stdout)["budget"] == 2


def test_detect_mlbed_order_seed(runner, study):
    """Test that MLBED accepts a random node order."""
    result = runner.invoke(main, ["detect", *base_args(study, "--algo", "mlbed", "-b", "2", "--order-seed", "5")])

    assert result.exit_code == 0


def test_detect_bad_budget(runner, study):
    """Test that a budget above N1 is a data error."""
    result = runner.invoke(main, ["detect", *base_args(study, "--algo", "mbed", "-b", "4")])

    assert result.exit_code == 2
    assert "Error:" in result.output


def test_detect_bad_lambda(runner, study):
    """Test that lambda outside [0, 1] is a data error."""
    result = runner.invoke(main, ["detect", *base_args(study, "--algo", "mbed", "-b", "1", "--lambda", "2")])

    assert result.exit_code == 2
    assert "lambda" in result.output


def test_detect_unknown_algorithm(runner, study):
    """Test that an unknown detector is a usage error."""
    result = runner.invoke(main, ["detect", *base_args(study, "--algo", "magic", "-b", "1")])

    assert result.exit_code == 1


def test_detect_missing_state(runner, study, tmp_path):
    """Test that a missing state file is a data error."""
    result = runner.invoke(main, [
        "detect", "-g", str(study["graph"]), "--state", str(tmp_path / "nope.txt"), "--algo", "mbed", "-b", "1",
    ])

    assert result.exit_code == 2
    assert "Cannot read" in result.output


def test_detect_unknown_node(runner, study, write_lines):
    """Test that a state naming an unknown node is a data error."""
    state = write_lines("odd.txt", ["a", "zz"])

    result = runner.invoke(main, [
        "detect", "-g", str(study["graph"]), "--state", str(state), "--algo", "mbed", "-b", "1",
    ])

    assert result.exit_code == 2


def test_detect_explicit_without_probabilities(runner, study, write_lines):
    """Test that --prob explicit needs probabilities on every line."""
    graph = write_lines("plain.txt", ["a b", "b c"])

    result = runner.invoke(main, [
        "detect", "-g", str(graph), "--prob", "explicit", "--state", str(study["state"]),
        "--algo", "mbed", "-b", "1",
    ])

    assert result.exit_code == 2


# ============================================================================
# Extract Tests
# ============================================================================

def test_extract_stdout(runner, study):
    """Test that the DAG dump starts with a component comment."""
    result = runner.invoke(main, ["extract", *base_args(study)])

    assert result.exit_code == 0
    assert result.stdout.startswith("# component 0: 3 node(s)")


def test_extract_to_file(runner, study, tmp_path):
    """Test that -o writes the dump to a file."""
    out = tmp_path / "dag.txt"

    result = runner.invoke(main, ["extract", *base_args(study, "--order-seed", "2", "-o", str(out))])

    assert result.exit_code == 0
    assert out.read_text().startswith("# component 0")


# ============================================================================
# Eval Tests
# ============================================================================

def test_eval_json(runner, study):
    """Test that f1 and f2 are reported with their trial counts."""
    result = runner.invoke(main, [
        "eval", *base_args(study, "-e", str(study["effectors"]), "--trials", "200", "--json"),
    ])

    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert set(data) == {"f1", "f2"}
    assert data["f1"]["trials"] == 200
    assert data["f1"]["mean"] >= 0


def test_eval_without_f2(runner, study):
    """Test that --no-f2 reports only f1."""
    result = runner.invoke(main, [
        "eval", *base_args(study, "-e", str(study["effectors"]), "--trials", "100", "--no-f2"),
    ])

    assert result.exit_code == 0
    assert result.stdout.startswith("f1 ")
    assert "f2" not in result.stdout


def test_eval_is_reproducible(runner, study):
    """Test that a fixed seed gives the same estimates."""
    args = ["eval", *base_args(study, "-e", str(study["effectors"]), "--trials", "100", "--seed", "3")]

    assert runner.invoke(main, args).stdout == runner.invoke(main, args).stdout


def test_eval_rejects_inactive_effector(runner, study, write_lines):
    """Test that effectors must be active."""
    effectors = write_lines("bad_effectors.txt", ["d"])

    result = runner.invoke(main, ["eval", *base_args(study, "-e", str(effectors))])

    assert result.exit_code == 2
    assert "not active" in result.output


# ============================================================================
# Experiment Tests
# ============================================================================

@pytest.fixture
def experiment_file(study, write_lines):
    return write_lines("exp.yaml", [
        "graph: graph.txt",
        "undirected: true",
        "probability: explicit",
        "protocol: seeded",
        "size: 1",
        "algorithms: [mbed, random]",
        "trials: 100",
        "replications: 2",
        "timing: false",
    ])


def test_experiment_csv(runner, experiment_file):
    """Test one CSV row per replication and detector."""
    result = runner.invoke(main, ["experiment", "-c", str(experiment_file)])

    assert result.exit_code == 0, result.output
    lines = result.stdout.splitlines()
    assert lines[0] == "replication,n1,budget,algorithm,f1_mean,f1_stderr,score,wall_ms"
    assert [line.split(",")[3] for line in lines[1:]] == ["mbed", "random", "mbed", "random"]


def test_experiment_is_byte_stable(runner, experiment_file):
    """Test that timing: false gives identical output across runs."""
    args = ["experiment", "-c", str(experiment_file)]

    assert runner.invoke(main, args).stdout == runner.invoke(main, args).stdout


def test_experiment_to_file(runner, experiment_file, tmp_path):
    """Test that -o writes the records and reports the count."""
    out = tmp_path / "results" / "records.csv"

    result = runner.invoke(main, ["experiment", "-c", str(experiment_file), "-o", str(out)])

    assert result.exit_code == 0
    assert "Wrote 4 record(s)" in result.output
    assert len(out.read_text().splitlines()) == 5


def test_experiment_bad_file(runner, write_lines):
    """Test that an invalid experiment file is a data error."""
    bad = write_lines("bad.yaml", ["protocol: seeded"])

    result = runner.invoke(main, ["experiment", "-c", str(bad)])

    assert result.exit_code == 2
    assert "Missing required key: graph" in result.output


def test_experiment_rejects_zero_workers(runner, experiment_file):
    """Test that --workers must be positive."""
    result = runner.invoke(main, ["experiment", "-c", str(experiment_file), "--workers", "0"])

    assert result.exit_code == 1


# ============================================================================
# Sweep Tests
# ============================================================================

def test_sweep_rows(runner, study):
    """Test one row per lambda and detector."""
    result = runner.invoke(main, ["sweep", *base_args(study, "--grid", "0.2,0.8", "--trials", "50")])

    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == "lambda,algorithm,f1_mean,f1_stderr,score"
    assert [tuple(line.split(",")[:2]) for line in lines[1:]] == [
        ("0.2", "mbed"), ("0.2", "random"), ("0.8", "mbed"), ("0.8", "random"),
    ]


def test_sweep_bad_grid(runner, study):
    """Test that a malformed grid is a data error."""
    result = runner.invoke(main, ["sweep", *base_args(study, "--grid", "0:1:0")])

    assert result.exit_code == 2


# ============================================================================
# Distances Tests
# ============================================================================

def test_distances(runner, study):
    """Test the distance dump from one source to every node."""
    result = runner.invoke(main, [
        "distances", "-g", str(study["graph"]), "--undirected", "--prob", "explicit",
        "--k", "1", "--sources", str(study["effectors"]),
    ])

    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == "u,v,k,distance"
    assert lines[1] == "a,a,1,0.0"
    assert len(lines) == 5


def test_distances_with_targets(runner, study, write_lines):
    """Test that --targets restricts the columns."""
    targets = write_lines("targets.txt", ["d"])

    result = runner.invoke(main, [
        "distances", "-g", str(study["graph"]), "--sources", str(study["state"]),
        "--targets", str(targets),
    ])

    assert result.exit_code == 0
    assert len(result.stdout.splitlines()) == 4


# ============================================================================
# Init Tests
# ============================================================================

def test_init_writes_config(runner, tmp_path, monkeypatch):
    """Test that init writes .effector.yaml in the current directory."""
    monkeypatch.chdir(tmp_path)

    result = runner.invoke(main, ["init"])

    assert result.exit_code == 0
    assert (tmp_path / ".effector.yaml").is_file()
    assert "Wrote" in result.output


def test_init_refuses_overwrite(runner, tmp_path, monkeypatch):
    """Test that an existing config needs --force."""
    monkeypatch.chdir(tmp_path)
    (tmp_path / ".effector.yaml").write_text("seed: 5\n")

    result = runner.invoke(main, ["init"])

    assert result.exit_code == 2
    assert "already exists" in result.output
    assert (tmp_path / ".effector.yaml").read_text() == "seed: 5\n"

    result = runner.invoke(main, ["init", "--force"])

    assert result.exit_code == 0
    assert "lambda: 0.5" in (tmp_path / ".effector.yaml").read_text()


def test_init_with_path_and_experiment(runner, tmp_path, monkeypatch):
    """Test init into a directory plus an experiment template."""
    monkeypatch.chdir(tmp_path)

    result = runner.invoke(main, ["init", "study", "--experiment", "study/exp.yaml"])

    assert result.exit_code == 0
    assert (tmp_path / "study" / ".effector.yaml").is_file()
    assert "protocol: seeded" in (tmp_path / "study" / "exp.yaml").read_text()

import json
import subprocess
import sys

import pytest

from causaleq.cli import emit, main, parse_graph_file
from causaleq.exceptions import CycleError, ParseError
from causaleq.graph import Dag, HybridGraph, parse_graph
from causaleq.statind import Dataset
from models import COLLIDER, flip_cpt


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestGraphFiles:
    def test_chain(self, files):
        g = parse_graph_file(files("g.txt", "a -> b\nb -> c"))
        assert g == Dag(edges=[("a", "b"), ("b", "c")])

    def test_latent(self, files):
        assert parse_graph_file(files("g.txt", "latent m\na -> m\nm -> b")).latents == ("m",)

    def test_cycle_reports_line(self, files):
        with pytest.raises(CycleError) as info:
            parse_graph_file(files("g.txt", "a -> b\nb -> a"))
        assert info.value.line == 2

    def test_bad_token(self, files):
        with pytest.raises(ParseError):
            parse_graph_file(files("g.txt", "a => b"))


class TestEmit:
    def test_text_and_json(self, capsys):
        emit({"text": "a -> c\nb -> c\n", "n": 1, "_private": 2}, "text")
        emit({"text": "x", "n": 1, "_private": 2}, "json")
        out = capsys.readouterr().out
        assert out.startswith("a -> c\nb -> c\n")
        assert json.loads(out[len("a -> c\nb -> c\n"):]) == {"n": 1, "text": "x"}


class TestCommands:
    def test_dsep(self, capsys, files):
        g = files("g.txt", "a -> b\nb -> c\n")
        assert run(capsys, "dsep", g, "a", "c", "--given", "b")[:2] == (0, "separated\n")
        code, out, _ = run(capsys, "dsep", g, "a", "c", "--witness")
        assert code == 0 and out == "connected\na -> b -> c\n"

    def test_equiv(self, capsys, files):
        g1 = files("g1.txt", "a -> b\nb -> c\n")
        g2 = files("g2.txt", "b -> a\nb -> c\n")
        g3 = files("g3.txt", "a -> b\nc -> b\n")
        assert run(capsys, "equiv", g1, g2)[1] == "equivalent\n"
        assert run(capsys, "equiv", g1, g3)[1] == "distinct\n"

    def test_equiv_embedded(self, capsys, files):
        g1 = files("g1.txt", "a -> m\nm -> b\n")
        g2 = files("g2.txt", "a -> b\nm -> m2\n")
        assert run(capsys, "equiv-embedded", g1, g2, "--observables", "a,b")[1] == "equivalent\n"

    def test_pattern_round_trips(self, capsys, files):
        g = files("g.txt", "a -> c\nb -> c\nc -> d\n")
        code, out, _ = run(capsys, "pattern", g)
        assert code == 0 and out == "a -> c\nb -> c\nc -- d\n"
        assert run(capsys, "pattern", g, "--complete")[1] == "a -> c\nb -> c\nc -> d\n"
        p = files("p.txt", out)
        assert run(capsys, "class", p)[1].count("# member") == 1

    def test_class_json(self, capsys, files):
        p = files("p.txt", "a -- b\nb -- c\n")
        code, out, _ = run(capsys, "class", p, "--json")
        assert code == 0 and json.loads(out)["count"] == 3

    def test_project_and_canonicalize(self, capsys, files):
        g = files("g.txt", "latent h\na -> c\nh -> c\nh -> d\nb -> d\n")
        code, out, _ = run(capsys, "project", g)
        assert code == 0 and out == "a -> c\nb -> d\nc <-> d\n"
        p = files("p.txt", out)
        code, out, _ = run(capsys, "canonicalize", p, "--json")
        payload = json.loads(out)
        assert payload["latents"] == {"c-d": "L_c_d"}
        dag = files("dag.txt", payload["dag"]["text"])
        assert run(capsys, "project", dag)[1] == "a -> c\nb -> d\nc <-> d\n"

    def test_recover_graph_oracle(self, capsys, files):
        g = files("g.txt", "a -> c\nb -> c\nc -> d\n")
        code, out, _ = run(capsys, "recover", "--oracle", f"graph:{g}", "--complete", "--stats")
        assert code == 0
        lines = out.splitlines()
        assert lines[:3] == ["a -> c", "b -> c", "c -> d"] and lines[3].startswith("# queries step1=")
        code, out, _ = run(capsys, "recover", "--oracle", f"graph:{g}", "--latent-free", "--json")
        payload = json.loads(out)
        assert payload["separators"]["a-b"] == [] and "markov" in payload["queries"]

    def test_sample_citest_recover_causes(self, capsys, files, tmp_path):
        g = files("g.txt", "a -> c\nb -> c\n")
        cpt = files("cpt.json", flip_cpt(COLLIDER).dumps())
        data = str(tmp_path / "d.csv")
        assert run(capsys, "sample", g, cpt, "-n", "10000", "--seed", "3", "-o", data)[0] == 0
        first = open(data).read()
        run(capsys, "sample", g, cpt, "-n", "10000", "--seed", "3", "-o", data)
        assert open(data).read() == first
        assert Dataset.read_csv(data).n_rows == 10000
        code, out, _ = run(capsys, "citest", data, "a", "b")
        assert code == 0 and out.startswith("independent")
        code, out, _ = run(capsys, "citest", data, "a", "b", "--given", "c", "--json")
        payload = json.loads(out)
        assert not payload["independent"] and payload["covered_mass"] == 1.0
        assert run(capsys, "recover", "--oracle", f"data:{data}")[1] == "a -> c\nb -> c\n"
        code, out, _ = run(capsys, "causes", "--oracle", f"data:{data}", "--pair", "a,c")
        assert code == 0 and out.splitlines()[0] == "potential"

    def test_causes_graph(self, capsys, files):
        g = files("g.txt", "a -> c\nb -> c\nc -> d\n")
        code, out, _ = run(capsys, "causes", "--oracle", f"graph:{g}", "--pair", "c,d", "--inclusive")
        assert code == 0 and out.splitlines()[0] == "genuine (also potential)"
        payload = json.loads(run(capsys, "causes", "--oracle", f"graph:{g}", "--pair", "c,d", "--json")[1])
        assert payload["verdict"] == "genuine" and payload["patterns"] == 1

    def test_env_selects_json(self, capsys, files, monkeypatch):
        monkeypatch.setenv("CAUSALEQ_FORMAT", "json")
        g = files("g.txt", "a -> b\n")
        assert json.loads(run(capsys, "dsep", g, "a", "b")[1])["separated"] is False
        assert run(capsys, "dsep", g, "a", "b", "--text")[1] == "connected\n"


class TestExitCodes:
    def test_domain_errors_exit_one(self, capsys, files):
        g = files("g.txt", "a -> b\nb -> a\n")
        code, _, err = run(capsys, "pattern", g)
        assert code == 1 and "line 2" in err
        ok = files("ok.txt", "a -> b\n")
        assert run(capsys, "dsep", ok, "a", "zz")[0] == 1
        assert run(capsys, "pattern", str(files("x", "")) + ".missing")[0] == 1

    def test_usage_errors_exit_two(self, capsys, files):
        g = files("g.txt", "a -> b\n")
        for argv in (["nosuch"], ["dsep", g, "a"], ["dsep", g, "a", "b", "--bogus"],
                     ["recover", "--oracle", "nope"], ["causes", "--oracle", f"graph:{g}", "--pair", "a"],
                     ["citest", "d.csv", "a", "b", "--kmin", "0"]):
            with pytest.raises(SystemExit) as info:
                main(argv)
            assert info.value.code == 2
        capsys.readouterr()

    def test_bad_env_format(self, capsys, monkeypatch, files):
        monkeypatch.setenv("CAUSALEQ_FORMAT", "xml")
        with pytest.raises(SystemExit) as info:
            main(["dsep", files("g.txt", "a -> b\n"), "a", "b"])
        assert info.value.code == 2

    def test_module_entry_point(self, files):
        g = files("g.txt", "a -> c\nb -> c\n")
        proc = subprocess.run([sys.executable, "-m", "causaleq", "pattern", g], capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout == "a -> c\nb -> c\n"
        proc = subprocess.run([sys.executable, "-m", "causaleq", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0 and "recover" in proc.stdout


def test_text_output_round_trips(capsys, files):
    """Parsing, emitting and parsing again gives the first parse."""
    for text in ("a -> b\nb -> c\n", "latent h\na -> c\nh -> c\nh -> d\nb -> d\n"):
        out = run(capsys, "project", files("g.txt", text), "--complete")[1]
        first = parse_graph(out, kind="hybrid")
        emitted = run(capsys, "canonicalize", files("p.txt", out))[1]
        dag = parse_graph(emitted)
        assert isinstance(dag, Dag)
        assert parse_graph(run(capsys, "project", files("d.txt", emitted), "--complete")[1], kind="hybrid") == first
    h = parse_graph("a <-> b\nc -- b\n")
    assert isinstance(h, HybridGraph)

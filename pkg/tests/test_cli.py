import subprocess
import sys

import pytest

from conftest import CORPUS
from weakorder.cli import RunConfig, main, run, scaling_ratios


def call(command, path, **kw):
    data = (CORPUS / path).read_bytes() if path else None
    return run(RunConfig(command=command, input=path, **kw), data)


def test_wto_g1():
    r = call("wto", "g1.graph")
    assert r.code == 0 and r.output == b"1 (2 (3 4) (6 7 9 8) 5) 10\n"


def test_analyze_fig1_workers():
    r = call("analyze", "fig1.prog", workers=4)
    assert r.code == 0
    assert "7: x=[0,+inf]" in r.output.decode().splitlines()


def test_analyze_sequential_matches():
    assert call("analyze", "fig1.prog", sequential=True).output == \
        call("analyze", "fig1.prog", workers=2).output


def test_check_determinism():
    r = call("analyze", "fig1.prog", workers=4, check_determinism=20)
    assert r.code == 0
    assert r.output.decode().rstrip().endswith("20/20 identical")


@pytest.mark.parametrize("name", sorted(p.name for p in CORPUS.iterdir()))
def test_validate_corpus(name):
    for lift in (False, True):
        r = call("validate", name, lift=lift)
        assert (r.code, r.output) == (0, b"ok\n")


def test_validate_reports_violation(tmp_path, monkeypatch):
    import weakorder.cli as cli
    from weakorder.wpo import construct_wpo_bu

    def broken(g, forest=None, lift=False):
        w = construct_wpo_bu(g, forest, lift)
        return w.with_relations(scheduling=w.scheduling[:-1])

    monkeypatch.setattr(cli, "construct_wpo_bu", broken)
    r = call("validate", "g1.graph")
    assert r.code == 1
    assert r.output.decode().splitlines()[0].split(":")[0] in {"W5", "H5", "H3"}


def test_wpo_text_and_dot():
    text = call("wpo", "g3.graph").output.decode()
    assert "stab x5 5" in text and "sched x5 3" in text
    lifted = call("wpo", "g3.graph", lift=True).output.decode()
    assert set(lifted.splitlines()) - set(text.splitlines()) == {"sched x5 2"}
    dot = call("wpo", "g3.graph", format="dot").output.decode()
    assert dot.startswith("digraph") and "doublecircle" in dot


def test_wto_dot_includes_chain_edges():
    dot = call("wto", "g1.graph", format="dot").output.decode()
    assert "n12 -> n5;" in dot  # x3 -> 6


def test_program_accepted_as_graph_input():
    assert call("wto", "fig1.prog").output == b"0 8 1 (2 3) (4 5 6) 7\n"


def test_parse_error_exit_code():
    r = run(RunConfig(command="wto"), b"vertices 3\nedge 0 x\n")
    assert r.code == 2
    assert b"line 2, column 8" in r.errors


def test_analyze_dot_rejected():
    assert call("analyze", "fig1.prog", format="dot").code == 2


def test_output_is_byte_stable():
    outs = {call("analyze", "fig1.prog", workers=3).output for _ in range(5)}
    assert len(outs) == 1


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(command="wto", workers=0)
    with pytest.raises(ValueError):
        RunConfig(command="nope")


def test_bench_small():
    r = run(RunConfig(command="bench", sizes=(500, 5000), families=("nested", "chain")))
    text = r.output.decode()
    assert r.code == 0
    assert "nested-loop WPO construction growth per decade" in text
    assert text.count("\nchain") == 2


def test_scaling_ratios():
    assert scaling_ratios([10, 100, 1000], [1.0, 10.0, 100.0]) == pytest.approx([10, 10])
    assert scaling_ratios([10, 1000], [1.0, 100.0]) == pytest.approx([10])


def test_main_entry_point(capsys):
    assert main(["wto", str(CORPUS / "g3.graph")]) == 0
    assert capsys.readouterr().out == "1 (5 (6 7) 8) (2 3) (4)\n"
    assert main(["wto", str(CORPUS / "missing.graph")]) == 2


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "weakorder.cli", "wto",
                          str(CORPUS / "fig1a.graph")], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "0 8 1 (2 3) (4 5 6) 7\n"

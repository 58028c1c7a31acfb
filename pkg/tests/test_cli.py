import json
import subprocess
import sys

import pytest

from mlar import cli, corpus, ctl
from mlar import labeling as L
from mlar.general_frame import GeneralValidity
from mlar.modal import AXIOMS, gen_fpf, valid_on_frame


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def fig2_bundle(tmp_path, capsys):
    path = tmp_path / "fig2.frame"
    assert run(capsys, "lattice", "--ts", "fig2_s", "--mode", "iso", "--out", str(path))[0] == 0
    return path


class TestCheckCtl:
    def test_intro(self, capsys):
        assert run(capsys, "check-ctl", "--ts", "fig1_t1", "--formula", "EX EX EX x0") == (0, "true\n", "")

    def test_false(self, capsys):
        assert run(capsys, "check-ctl", "--ts", "fig1_t2", "--formula", "EX EX EX x0")[1] == "false\n"

    def test_json(self, capsys):
        code, out, _ = run(capsys, "check-ctl", "--ts", "fig2_t1", "--formula", "EX b", "--json")
        data = json.loads(out)
        assert data["holds"] is True and "a02'" in data["states"]

    def test_parse_error_is_usage(self, capsys):
        code, _, err = run(capsys, "check-ctl", "--ts", "fig1_t1", "--formula", "EX (")
        assert code == 1 and "position" in err

    def test_unknown_atom_is_usage(self, capsys):
        assert run(capsys, "check-ctl", "--ts", "fig1_t1", "--formula", "zz")[0] == 1

    def test_ts_from_file(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        assert run(capsys, "gen", "--name", "fig2_s", "--out", str(path))[1] == "4 states, 5 transitions\n"
        assert run(capsys, "check-ctl", "--ts", str(path), "--formula", "AX a")[1] == "true\n"


class TestLattice:
    def test_report(self, capsys):
        code, out, _ = run(capsys, "lattice", "--ts", "fig2_s", "--mode", "iso")
        assert code == 0
        assert out.splitlines()[0] == "4 worlds, 3 CTL-blocks"

    def test_partition_mode(self, capsys):
        out = run(capsys, "lattice", "--ts", "fig2_s", "--mode", "partition")[1]
        assert out.splitlines()[0] == "5 worlds, 3 CTL-blocks"

    def test_dot_and_plot(self, capsys, tmp_path):
        dot, png = tmp_path / "l.dot", tmp_path / "l.png"
        run(capsys, "lattice", "--ts", "fig2_s", "--dot", str(dot), "--plot", str(png))
        text = dot.read_text()
        assert '"T3" -> "T1";' in text and '"T3" -> "S"' not in text and "fillcolor" in text
        assert png.read_bytes()[:4] == b"\x89PNG"

    def test_plot_is_reproducible(self, capsys, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        run(capsys, "lattice", "--ts", "fig2_s", "--plot", str(a))
        run(capsys, "lattice", "--ts", "fig2_s", "--plot", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_cap_is_inconclusive(self, capsys):
        assert run(capsys, "lattice", "--ts", "fig2_s", "--mode", "partition", "--max-worlds", "2")[0] == 2


class TestModal:
    def test_witness(self, capsys, fig2_bundle):
        code, out, _ = run(capsys, "modal", "--frame", str(fig2_bundle), "--formula", "p -> []p", "--witness")
        assert code == 0
        assert out == "falsified at T1; p := EX b; V(p) = {T1, T3}\n"

    def test_valid(self, capsys, fig2_bundle):
        assert run(capsys, "modal", "--frame", str(fig2_bundle), "--formula", "[]<>p -> <>[]p")[1] == "valid\n"

    def test_builtin_and_axiom(self, capsys):
        assert run(capsys, "modal", "--frame", "fig2", "--axiom", ".2")[1] == "valid\n"

    def test_plain_frame(self, capsys):
        code, out, _ = run(capsys, "modal", "--frame", "fpf:1", "--axiom", ".2", "--witness")
        assert out.startswith("falsified at ?")

    def test_budget(self, capsys):
        assert run(capsys, "modal", "--frame", "fig2", "--axiom", "K", "--budget", "4")[0] == 2

    def test_unknown_world(self, capsys):
        assert run(capsys, "modal", "--frame", "fig2", "--axiom", "T", "--world", "Q")[0] == 1

    def test_bad_witness_is_invariant_failure(self, capsys, monkeypatch):
        def lying(g, f, at=None, budget=0):
            return GeneralValidity("invalid", "T1", {"p": [1]}, {"p": ["T1"]},
                                   {"p": ctl.parse_ctl("EX b")})
        monkeypatch.setattr(cli, "valid_on_general", lying)
        assert run(capsys, "modal", "--frame", "fig2", "--formula", "p -> []p")[0] == 3

    def test_json(self, capsys):
        out = run(capsys, "modal", "--frame", "fig2", "--formula", "p -> []p", "--json")[1]
        data = json.loads(out)
        assert data["worlds"] == {"p": ["T1", "T3"]} and data["witnesses"] == {"p": "EX b"}


class TestFrames:
    def test_frame_gen(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        assert run(capsys, "frame-gen", "--family", "fpf:2", "--out", str(path))[1] == "9 worlds, 25 pairs\n"
        code, out, _ = run(capsys, "frame-check", "--frame", str(path), "--props")
        assert "directed: no" in out and "antisymmetric: yes" in out

    def test_frame_gen_stdout(self, capsys):
        out = run(capsys, "frame-gen", "--family", "preboolean:0,2")[1]
        assert json.loads(out)["worlds"] == ["{}.0", "{}.1"]

    def test_frame_gen_plot(self, capsys, tmp_path):
        png = tmp_path / "l.png"
        run(capsys, "frame-gen", "--family", "lollipop:1,1", "--plot", str(png))
        assert png.exists()

    def test_frame_check_formula(self, capsys):
        assert run(capsys, "frame-check", "--frame", "lollipop:1,1", "--axiom", ".1")[1] == "valid\n"
        assert run(capsys, "frame-check", "--frame", "preboolean:0,2", "--axiom", ".1")[1].startswith("falsified")

    def test_bad_family(self, capsys):
        assert run(capsys, "frame-gen", "--family", "cube:3")[0] == 1


class TestControl:
    def test_button(self, capsys):
        beta = ctl.to_str(corpus.button_formula(1))
        out = run(capsys, "control", "--frame", "buttons:2", "--kind", "button", "--ctl", beta)[1]
        assert out == "pure-button: yes; pushed: False\n"

    def test_decision_needs_partner(self, capsys):
        assert run(capsys, "control", "--frame", "decisions:1", "--kind", "decision", "--ctl", "AG !a0")[0] == 1

    def test_decision(self, capsys):
        out = run(capsys, "control", "--frame", "decisions:1", "--kind", "decision", "--ctl", "AG !a0",
                  "--partner", "AG !b0", "--json")[1]
        assert json.loads(out)["verdict"] is True

    def test_restricted_switch(self, capsys):
        out = run(capsys, "control", "--frame", "rswitch:2", "--kind", "restricted-switch",
                  "--ctl", ctl.to_str(corpus.RSWITCH), "--restrictor", ctl.to_str(corpus.RESTRICTOR))[1]
        assert out.startswith("restricted-switch: no") and "W5" in out

    def test_independence(self, capsys):
        bs = [ctl.to_str(b) for b in corpus.button_formulas(2)]
        out = run(capsys, "independence", "--frame", "buttons:2", "--buttons", *bs)[1]
        assert out == "independence: yes\n"

    def test_decision_independence(self, capsys):
        out = run(capsys, "independence", "--frame", "decisions:2", "--decisions",
                  "AG !a0", "AG !b0", "AG !a1", "AG !b1")[1]
        assert out == "decision-independence: yes\n"

    def test_odd_decisions(self, capsys):
        assert run(capsys, "independence", "--frame", "decisions:1", "--decisions", "AG !a0")[0] == 1


class TestLabeling:
    def test_verify_and_transfer(self, capsys, tmp_path):
        g, dec = corpus.pruned_subframe(1)
        lab = tmp_path / "lab.json"
        lab.write_text(json.dumps(L.labeling_to_dict(L.build_fpf_labeling(dec))))
        assert run(capsys, "labeling", "verify", str(lab), "--frame", "decisions:1")[1] == "valid labeling\n"
        r = valid_on_frame(gen_fpf(1), AXIOMS[".2"], at="?")
        cm = L.FiniteCountermodel(gen_fpf(1), r.countermodel.valuation, "?", AXIOMS[".2"])
        cmf = tmp_path / "cm.json"
        cmf.write_text(json.dumps(L.countermodel_to_dict(cm)))
        code, out, _ = run(capsys, "labeling", "transfer", str(lab), "--frame", "decisions:1",
                           "--countermodel", str(cmf))
        assert code == 0 and out.startswith("falsified at ?")

    def test_invalid_labeling_reported(self, capsys, tmp_path):
        data = L.labeling_to_dict(L.build_fpf_labeling([(ctl.parse_ctl("AG !a0"), ctl.parse_ctl("AG !a0"))]))
        lab = tmp_path / "lab.json"
        lab.write_text(json.dumps(data))
        code, out, _ = run(capsys, "labeling", "verify", str(lab), "--frame", "decisions:1")
        assert code == 0 and out.startswith("condition")


class TestSystems:
    def test_refines(self, capsys):
        code, out, _ = run(capsys, "refines", "--coarse", "fig1_t1", "--fine", "fig1_t2")
        assert out.splitlines()[0] == "yes" and "x=0 -> x=0" in out

    def test_refines_no(self, capsys):
        assert run(capsys, "refines", "--coarse", "fig2_t1", "--fine", "fig2_t2")[1] == "no\n"

    def test_refines_budget(self, capsys):
        assert run(capsys, "refines", "--coarse", "fig1_t1", "--fine", "fig1_s_trunc", "--budget", "1")[0] == 2

    def test_abstract(self, capsys, tmp_path):
        part = tmp_path / "p.json"
        part.write_text(json.dumps([["a0"], ["a1", "a2"], ["b"]]))
        out = run(capsys, "abstract", "--ts", "fig2_s", "--partition-file", str(part))[1]
        assert json.loads(out)["states"] == ["a0", "a1+a2", "b"]

    def test_abstract_bad_partition(self, capsys, tmp_path):
        part = tmp_path / "p.json"
        part.write_text(json.dumps([["a0", "b"], ["a1", "a2"]]))
        assert run(capsys, "abstract", "--ts", "fig2_s", "--partition-file", str(part))[0] == 1

    def test_gen_dot(self, capsys, tmp_path):
        dot = tmp_path / "s.dot"
        run(capsys, "gen", "--name", "fig2_s", "--dot", str(dot))
        text = dot.read_text()
        assert "shape=point" in text and '"a0" [label="a0\\n{a}"];' in text

    def test_gen_bundle(self, capsys, tmp_path):
        path = tmp_path / "d.frame"
        assert run(capsys, "gen", "--name", "pruned_subframe:1", "--out", str(path))[1] == "3 worlds\n"
        assert run(capsys, "modal", "--frame", str(path), "--axiom", ".2")[1].startswith("falsified")


class TestUsage:
    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as e:
            cli.main(["frobnicate"])
        assert e.value.code == 1

    def test_missing_flag(self, capsys):
        with pytest.raises(SystemExit) as e:
            cli.main(["check-ctl", "--ts", "fig1_t1"])
        assert e.value.code == 1

    def test_missing_file(self, capsys):
        assert run(capsys, "modal", "--frame", "nope.frame", "--axiom", "T")[0] == 1


def test_console_script_is_deterministic():
    cmd = [sys.executable, "-m", "mlar.cli", "lattice", "--ts", "fig2_s", "--json"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and json.loads(first)["worlds"] == ["S", "T1", "T2", "T3"]

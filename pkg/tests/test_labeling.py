import json

import pytest

from mlar import corpus, ctl
from mlar import labeling as L
from mlar.control import truth_set
from mlar.errors import FormatError, MlarError
from mlar.general_frame import eval_worlds
from mlar.modal import AXIOMS, STAR, gen_fpf, parse_modal, valid_on_frame


@pytest.fixture(scope="module")
def b1():
    g = corpus.button_lattice(1)
    return g, L.build_preboolean_labeling(corpus.button_formulas(1), []).on(g, corpus.bottom_world(g))


def _countermodel(frame, formula, at):
    r = valid_on_frame(frame, formula, at=at)
    assert r.status == "invalid"
    return L.FiniteCountermodel(frame, r.countermodel.valuation, at, formula)


class TestVerify:
    def test_b1(self, b1):
        _, l = b1
        assert L.verify_labeling(l)

    def test_bottom_in_top_node_fails_condition_one(self, b1):
        g, l = b1
        top = l.frame.worlds[1]
        bad = L.Labeling(l.frame, l.root, dict(l.phi, **{top: ctl.FALSE}), g, l.anchor)
        v = L.verify_labeling(bad)
        assert not v and v.condition == 1
        pushed = next(w for w in g.world_ids() if w != l.anchor)
        assert v.detail[0] == pushed

    def test_wrong_root_fails_condition_three(self, b1):
        g, l = b1
        bad = L.Labeling(l.frame, l.frame.worlds[1], l.phi, g, l.anchor)
        assert L.verify_labeling(bad).condition == 3

    def test_b2(self, buttons2):
        l = L.build_preboolean_labeling(corpus.button_formulas(2), [])
        assert L.verify_labeling(l.on(buttons2, corpus.bottom_world(buttons2)))

    def test_fpf2(self, decisions2):
        g, dec = decisions2
        l = L.build_fpf_labeling(dec).on(g, corpus.bottom_world(g))
        assert L.verify_labeling(l)
        assert L.quotient_matches(l)

    def test_needs_target(self):
        with pytest.raises(MlarError):
            L.verify_labeling(L.build_fpf_labeling([]))


class TestConstructors:
    def test_preboolean_empty(self):
        l = L.build_preboolean_labeling([], [])
        assert list(l.phi.values()) == [ctl.Top()]

    def test_lollipop_empty(self):
        B = ctl.Atom("b")
        l = L.build_lollipop_labeling([], B, [])
        assert l.phi == {"({},{})": ctl.Not(B), STAR: B}

    def test_fpf_zero(self):
        l = L.build_fpf_labeling([])
        assert l.phi == {"-": ctl.Top()}

    def test_fpf_one(self):
        lam, delta = ctl.Atom("l"), ctl.Atom("r")
        l = L.build_fpf_labeling([(lam, delta)])
        assert l.phi == {"?": ctl.And(ctl.Not(lam), ctl.Not(delta)), "0": lam, "1": delta}
        assert l.root == "?"

    def test_preboolean_explicit_negations(self):
        b = corpus.button_formulas(2)
        l = L.build_preboolean_labeling(b, [])
        assert l.phi["{1}.0"] == ctl.And(ctl.Not(b[0]), b[1])

    def test_quotient_on_buttons(self, buttons2):
        l = L.build_preboolean_labeling(corpus.button_formulas(2), [])
        assert L.quotient_matches(l.on(buttons2, corpus.bottom_world(buttons2)))

    def test_lollipop_star_marks_restrictor_worlds(self):
        g = corpus.rswitch_frame()
        l = L.build_lollipop_labeling([], corpus.RESTRICTOR, [corpus.RSWITCH])
        assert truth_set(g, l.phi[STAR]) == truth_set(g, corpus.RESTRICTOR)


class TestTransfer:
    def test_b1_diamond_p_implies_p(self, b1):
        g, l = b1
        f = parse_modal("<>p -> p")
        cm = L.FiniteCountermodel(l.frame, {"p": (l.frame.worlds[1],)}, l.root, f)
        t = L.transfer_countermodel(l, cm)
        pushed = next(w for w in g.world_ids() if w != l.anchor)
        assert t.worlds == {"p": [pushed]}
        assert not eval_worlds(g, t.worlds, l.anchor, f)

    def test_empty_valuation(self, b1):
        g, l = b1
        f = parse_modal("<>p")
        cm = L.FiniteCountermodel(l.frame, {"p": ()}, l.root, f)
        t = L.transfer_countermodel(l, cm)
        assert t.worlds == {"p": []} and t.formulas["p"] == ctl.FALSE

    def test_fpf1_two(self, decisions1):
        g, dec = decisions1
        l = L.build_fpf_labeling(dec).on(g, corpus.bottom_world(g))
        cm = _countermodel(gen_fpf(1), AXIOMS[".2"], l.root)
        t = L.transfer_countermodel(l, cm)
        assert not eval_worlds(g, t.worlds, l.anchor, AXIOMS[".2"])
        for p, f in t.formulas.items():
            assert sorted(truth_set(g, f)) == sorted(t.worlds[p])

    def test_rejects_non_countermodel(self, b1):
        _, l = b1
        cm = L.FiniteCountermodel(l.frame, {"p": ()}, l.root, parse_modal("p -> p"))
        with pytest.raises(MlarError):
            L.transfer_countermodel(l, cm)

    def test_rejects_invalid_labeling(self, b1):
        g, l = b1
        bad = L.Labeling(l.frame, l.root, dict(l.phi, **{l.frame.worlds[1]: ctl.FALSE}), g, l.anchor)
        cm = L.FiniteCountermodel(l.frame, {"p": (l.frame.worlds[1],)}, l.root, parse_modal("<>p -> p"))
        with pytest.raises(MlarError):
            L.transfer_countermodel(bad, cm)


class TestFiles:
    def test_labeling_round_trip(self, decisions1):
        _, dec = decisions1
        l = L.build_fpf_labeling(dec)
        back = L.labeling_from_dict(json.loads(json.dumps(L.labeling_to_dict(l))))
        assert back.phi == l.phi and back.root == l.root
        assert back.frame.access == l.frame.access

    def test_countermodel_round_trip(self):
        cm = _countermodel(gen_fpf(1), AXIOMS[".2"], "?")
        back = L.countermodel_from_dict(json.loads(json.dumps(L.countermodel_to_dict(cm))))
        assert back.formula == cm.formula and back.root == "?"
        assert {p: set(v) for p, v in back.valuation.items()} == \
            {p: set(v) for p, v in cm.valuation.items()}

    def test_unknown_node_in_valuation(self):
        data = L.countermodel_to_dict(_countermodel(gen_fpf(1), AXIOMS[".2"], "?"))
        data["valuation"]["p"] = ["nowhere"]
        with pytest.raises(FormatError):
            L.countermodel_from_dict(data)

    def test_bad_root(self):
        data = L.labeling_to_dict(L.build_fpf_labeling([]))
        data["root"] = "zz"
        with pytest.raises(FormatError):
            L.labeling_from_dict(data)

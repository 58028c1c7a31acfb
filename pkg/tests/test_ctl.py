import pytest
from hypothesis import given, settings

from mlar import corpus, ctl
from mlar.bisim import bisim_classes
from mlar.errors import EvaluationError, ParseError
from mlar.ts import disjoint_union

from strategies import formulas, oracle_holds, systems

A, B = ctl.Atom("a"), ctl.Atom("b")


class TestParse:
    def test_intro_formula(self):
        f = ctl.parse_ctl("EX EX EX x0")
        assert f == ctl.EX(ctl.EX(ctl.EX(ctl.Atom("x0"))))

    def test_true(self):
        assert ctl.parse_ctl("true") == ctl.Top()
        assert ctl.parse_ctl("false") == ctl.FALSE

    def test_grammar(self):
        f = ctl.parse_ctl("A[a U b] -> !EG a")
        assert f == ctl.Implies(ctl.AU(A, B), ctl.Not(ctl.EG(A)))

    def test_precedence(self):
        assert ctl.parse_ctl("a & b | c") == ctl.Or(ctl.And(A, B), ctl.Atom("c"))
        assert ctl.parse_ctl("a -> b -> c") == ctl.Implies(A, ctl.Implies(B, ctl.Atom("c")))
        assert ctl.parse_ctl("!a & b") == ctl.And(ctl.Not(A), B)

    @pytest.mark.parametrize("text", ["a U b", "EX", "(a", "a &", "E[a U]", "1a", "EX EX", "a b"])
    def test_errors_carry_position(self, text):
        with pytest.raises(ParseError) as err:
            ctl.parse_ctl(text)
        assert "position" in str(err.value)

    @pytest.mark.parametrize("text", [
        "EX EX EX x0", "A[a U b] -> !EG a", "!(a | b) & EF (a -> AX b)", "E[!a U b & a]",
        "a -> (b -> a)", "(a -> b) -> a", "false | true", "AG !a0"])
    def test_print_parse_round_trip(self, text):
        f = ctl.parse_ctl(text)
        assert ctl.parse_ctl(ctl.to_str(f)) == f


class TestCheck:
    def test_fig1(self):
        f = ctl.parse_ctl("EX EX EX x0")
        assert ctl.check_ctl(corpus.fig1_t1(), f).holds
        assert not ctl.check_ctl(corpus.fig1_t2(), f).holds

    def test_fig1_t1_initial_state(self):
        res = ctl.check_ctl(corpus.fig1_t1(), ctl.parse_ctl("EX EX EX x0"))
        assert "x=0" in res.states

    def test_top_everywhere(self):
        ts = corpus.buttons(2)
        assert ctl.check_ctl(ts, ctl.Top()).states == frozenset(ts.states)

    def test_ex_b(self):
        f = ctl.parse_ctl("EX b")
        assert ctl.holds(corpus.fig2_t1(), f)
        assert not ctl.holds(corpus.fig2_s(), f)

    def test_unknown_atom(self):
        with pytest.raises(EvaluationError):
            ctl.check_ctl(corpus.fig2_s(), ctl.parse_ctl("EX zzz"))

    def test_sorted_follows_state_order(self):
        res = ctl.check_ctl(corpus.fig2_s(), ctl.parse_ctl("a"))
        assert res.sorted() == ["a0", "a1", "a2"]

    def test_button_formula(self):
        ts = corpus.buttons(2)
        assert ctl.holds(ts, corpus.button_formula(1))


class TestEnumerate:
    def test_order(self):
        fs = list(ctl.enumerate_formulas(["p"], 2))
        assert fs[:2] == [ctl.Top(), ctl.Atom("p")]
        assert fs[2:4] == [ctl.Not(ctl.Top()), ctl.Not(ctl.Atom("p"))]

    def test_sizes_nondecreasing_and_distinct(self):
        fs = list(ctl.enumerate_formulas(["p", "q"], 4))
        sizes = [ctl.size(f) for f in fs]
        assert sizes == sorted(sizes)
        assert len(set(fs)) == len(fs)

    def test_reserved_words_are_not_atoms(self):
        for word in ("EX", "U", "true"):
            assert word in ctl.RESERVED


class TestNormalize:
    @pytest.mark.parametrize("text", ["a | b", "a -> b", "EF a", "AF a", "EG a", "AG a", "!!a",
                                      "A[a U b]", "AX a"])
    def test_equivalent(self, text):
        f = ctl.parse_ctl(text)
        for ts in (corpus.fig2_s(), corpus.fig2_t1(), corpus.fig2_t3()):
            plain = {s for s in ts.states if oracle_holds(ts, f, s)}
            assert ctl.sat(ts, ctl.normalize(f), {}) == plain


@settings(max_examples=200)
@given(systems(), formulas(depth=3))
def test_path_oracle_agrees(ts, f):
    got = ctl.check_ctl(ts, f).states
    want = {s for s in ts.states if oracle_holds(ts, f, s)}
    assert got == want


def _union_of_corpus():
    systems_ = [corpus.fig2_s(), corpus.fig2_t1(), corpus.fig2_t2(), corpus.fig2_t3()]
    return disjoint_union(systems_)[0]


def test_bisimulation_invariance_exhaustive():
    """Bisimilar states agree on every formula over {a, b} up to size 5."""
    u = _union_of_corpus()
    bp = bisim_classes([u])
    pairs = [(x, y) for x in u.states for y in u.states
             if x < y and bp.same((0, x), (0, y))]
    assert pairs
    for f in ctl.enumerate_formulas(["a", "b"], 5):
        got = ctl.sat(u, ctl.normalize(f), {})
        for x, y in pairs:
            assert (x in got) == (y in got), (f, x, y)

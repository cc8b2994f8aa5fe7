from collections import Counter

import pytest

from logdoc.chart_parser import (
    ScoreConfig,
    analyses,
    coefficient,
    dump_chart,
    extract_fragments,
    filter_readings,
    parse,
    score,
    uncovered,
)
from logdoc.errors import ConfigError
from logdoc.lexicon import tokenize
from logdoc.resources import build_resources

UNPRUNED = ScoreConfig(n_best=0)


def ranked(text, resources, cfg=None):
    return analyses(parse(tokenize(text), resources, cfg))


def shape(analysis):
    """Rule ids down the noun-group spine of a noun phrase analysis."""
    edge = analysis.edge
    return edge.rule_id, edge.children[-1].rule_id


def test_score_formula():
    assert score([0]) == pytest.approx(15.0)
    assert score([15]) == pytest.approx(21.667, abs=1e-3)
    assert score([15, 15]) == pytest.approx(28.333, abs=1e-3)
    assert score([15], spec=80) == pytest.approx(-13.889, abs=1e-3)


@pytest.mark.parametrize("children, spec, expected", [
    ([0, 0], 0, 15.0),
    ([15, 0], 0, 65 / 3),
    ([0, 0], 80, -185 / 9),
])
def test_score_exact_values(children, spec, expected):
    assert score(children, spec) == pytest.approx(expected, abs=1e-9)


def test_score_config_validation():
    with pytest.raises(ConfigError):
        ScoreConfig(rew=1.0).validate()
    with pytest.raises(ConfigError):
        ScoreConfig(filter="best").validate()
    assert ScoreConfig().validate().n_best == 1


def test_gerund_family_without_semantic_types(plain_resources):
    values = sorted(a.value for a in ranked("answering machines", plain_resources, UNPRUNED))
    assert values == pytest.approx([24.630, 25.947, 27.593], abs=1e-3)


def test_gerund_family_pruned_without_semantic_types(plain_resources):
    result = ranked("answering machines", plain_resources)
    assert [round(a.value, 3) for a in result] == [24.630, 25.947]
    assert shape(result[0]) == ("np_bare", "cnp_verb")


@pytest.mark.parametrize("text, value, rule", [
    ("answering machines", 8.827, "cnp_verb"),
    ("implementing languages", -9.609, "vp_tr"),
    ("backtracking problems", 11.790, "cnp_gerund_compound"),
])
def test_semantic_types_pick_the_reading(resources, text, value, rule):
    best = ranked(text, resources)[0]
    assert best.value == pytest.approx(value, abs=1e-3)
    assert best.edge.children[-1].rule_id == rule


def test_semantic_types_change_the_ranking(resources, plain_resources):
    changed = []
    for text in ["answering machines", "implementing languages", "backtracking problems"]:
        with_types = ranked(text, resources)[0]
        without = ranked(text, plain_resources)[0]
        assert without.edge.children[-1].rule_id == "cnp_verb"
        changed.append(shape(with_types) != shape(without))
    assert changed == [False, True, True]


def test_implementing_languages_filter_keeps_gerund_phrase(resources):
    result = ranked("implementing languages", resources)
    assert [round(a.value, 3) for a in result] == [-9.609, 11.790]
    kept = filter_readings(result)
    assert [a.edge.rule_id for a in kept] == ["np_gerund"]


def test_set_phrase_reward(resources):
    result = ranked("natural language question answering systems", resources)
    assert len(result) == 1
    assert result[0].value == pytest.approx(27.056, abs=1e-3)
    assert result[0].edge.children[0].value == pytest.approx(27.126, abs=1e-3)


def test_pp_attachment_competition(resources):
    # both attachments are close enough to stay in one cluster
    result = ranked("the operator tested the programs on the system", resources, UNPRUNED)
    assert [round(a.value, 3) for a in result] == [37.122, 41.027]
    vp = result[0].edge.children[1]
    assert vp.rule_id == "vp_tr"
    assert len(filter_readings(result)) == 2
    assert len(ranked("the operator tested the programs on the system", resources)) == 1


def test_instrument_prefers_verb_attachment(resources):
    result = ranked("the operator translated the sentences with a computer", resources, UNPRUNED)
    assert [round(a.value, 3) for a in result] == [33.125, 37.122]
    assert result[0].edge.children[1].rule_id == "vp_pp"
    assert coefficient(result[0].value, result[1].value) < 0.897
    assert len(filter_readings(result)) == 1


def test_of_phrase_attaches_to_its_noun(resources):
    text = "a new characterization of attachment preferences in english"
    pruned = parse(tokenize(text), resources)
    full = parse(tokenize(text), resources, UNPRUNED)
    ranked_full = analyses(full)
    assert len(ranked_full) == 14
    assert [a.value for a in ranked_full[:3]] == pytest.approx([15.812, 15.876, 21.442], abs=1e-3)
    assert len(filter_readings(ranked_full)) == 2 < len(ranked_full)
    assert pruned.created <= full.created
    assert analyses(pruned)[0].value == pytest.approx(ranked_full[0].value)


def test_filter_modes():
    values = [10.0, 10.5, 11.0, 20.0]
    assert filter_readings(values) == [10.0, 10.5, 11.0]
    assert filter_readings(values, ScoreConfig(filter="first_n", first_n=2)) == [10.0, 10.5]
    assert filter_readings(values, ScoreConfig(filter="within_pct", within_pct=95.0)) == \
        [10.0, 10.5]
    assert filter_readings([]) == []
    assert filter_readings([100.0, 105.0, 200.0]) == [100.0, 105.0]
    assert filter_readings([7.0]) == [7.0]
    assert filter_readings([3.0, 3.0, 3.0]) == [3.0, 3.0, 3.0]
    assert coefficient(0, 0) == 1.0
    # opposite signs compare by magnitude
    assert coefficient(-20, 20) == 1.0
    assert filter_readings([-20.0, 20.0, 40.0]) == [-20.0, 20.0]


def test_fragments_cover_unparsed_text(resources):
    tokens = tokenize("the dog zorp the ball")
    chart = parse(tokens, resources)
    assert analyses(chart) == []
    fragments = extract_fragments(chart)
    assert [f.span for f in fragments] == [(0, 2), (3, 5)]
    assert uncovered(fragments, len(tokens)) == [2]


def test_empty_grammar_gives_no_edges(resources):
    bare = build_resources()
    chart = parse(tokenize("the dog sleeps"), bare)
    assert len(chart) == 0
    assert extract_fragments(chart) == []


def test_dump_chart_lists_live_edges(resources):
    chart = parse(tokenize("john sleeps"), resources)
    lines = dump_chart(chart).splitlines()
    assert len(lines) == len(chart)
    assert any(" s " in line and "0-2" in line for line in lines)


TWIN_GRAMMAR = (
    "LEX noun: l(X, object(Lemma, X))\n"
    "RULE a1: x(B) -> *noun(B)\n"
    "RULE a2: x(B) -> *noun(B)\n"
    "RULE y: y(B) -> *noun(B)\n"
    "RULE a3: x(B) -> *y(B)\n"
)


def test_equal_values_share_a_slot():
    twins = build_resources(grammar_text=TWIN_GRAMMAR, lexicon_text="dog noun\n")
    pruned = parse(["dog"], twins, ScoreConfig(n_best=1))
    kept = sorted(e.rule_id for e in pruned.live_edges() if e.category == "x")
    assert kept == ["a1", "a2"]
    full = parse(["dog"], twins, UNPRUNED)
    assert sorted(e.rule_id for e in full.live_edges() if e.category == "x") == ["a1", "a2", "a3"]
    # a3 is worse than both twins and is never built
    assert pruned.created == full.created - 1


PP_GRAMMAR = (
    "LEX noun: l(X, object(Lemma, X))\n"
    "LEX prep: rel(Lemma)\n"
    "RULE n1: np(B) -> *noun(B)\n"
    "RULE np_pp: np(l(X, B1 & B2 & relationship(R, X, Y))) -> *np(l(X, B1)) pp(p(R, Y, B2))\n"
    "RULE pp: pp(p(R, X, B)) -> prep(rel(R)) *np(l(X, B))\n"
)
PP_LEXICON = "dog noun\npark noun\nhill noun\nin prep\non prep\n"
PP_TOKENS = "dog in park on hill in park".split()


def enumerate_trees(tokens):
    """Every derivation of PP_GRAMMAR over every span, built without the parser."""
    nouns = {"dog", "park", "hill"}
    found = Counter()
    memo = {}

    def trees(category, i, j):
        key = (category, i, j)
        if key in memo:
            return memo[key]
        out = []
        if category == "noun" and j == i + 1 and tokens[i] in nouns:
            out.append((("lex", i), 0.0))
        elif category == "prep" and j == i + 1 and tokens[i] not in nouns:
            out.append((("lex", i), 0.0))
        elif category == "np":
            out += [(("n1", (sig,)), score([v])) for sig, v in trees("noun", i, j)]
            for k in range(i + 1, j):
                for left, lv in trees("np", i, k):
                    for right, rv in trees("pp", k, j):
                        out.append((("np_pp", (left, right)), score([lv, rv])))
        elif category == "pp" and j - i >= 2:
            for prep, pv in trees("prep", i, i + 1):
                for obj, ov in trees("np", i + 1, j):
                    out.append((("pp", (prep, obj)), score([pv, ov])))
        memo[key] = out
        return out

    for i in range(len(tokens)):
        for j in range(i + 1, len(tokens) + 1):
            for category in ("noun", "prep", "np", "pp"):
                for sig, v in trees(category, i, j):
                    found[(category, i, j, sig, round(v, 6))] += 1
    return found


def signature(edge):
    if edge.is_lexical:
        return ("lex", edge.start)
    return (edge.rule_id, tuple(signature(c) for c in edge.children))


@pytest.mark.parametrize("n_best", [0, 1000])
def test_unbounded_chart_holds_every_derivation(n_best):
    pps = build_resources(grammar_text=PP_GRAMMAR, lexicon_text=PP_LEXICON)
    chart = parse(PP_TOKENS, pps, ScoreConfig(n_best=n_best))
    built = Counter((e.category, e.start, e.end, signature(e), round(e.value, 6))
                    for e in chart.live_edges())
    assert built == enumerate_trees(PP_TOKENS)
    assert chart.created == sum(built.values())


def test_single_best_keeps_the_cheapest_derivation():
    pps = build_resources(grammar_text=PP_GRAMMAR, lexicon_text=PP_LEXICON)
    cheapest = min(v for (category, i, j, _, v) in enumerate_trees(PP_TOKENS)
                   if (category, i, j) == ("np", 0, len(PP_TOKENS)))
    best = analyses(parse(PP_TOKENS, pps))[0]
    assert best.value == pytest.approx(cheapest, abs=1e-6)

import pytest

from logdoc.chart_parser import analyses, parse
from logdoc.errors import CompositionError, UnknownPredicateFamily
from logdoc.lexicon import tokenize
from logdoc.reader import parse_atom, parse_atoms
from logdoc.resources import build_resources
from logdoc.semantics import (
    build_of,
    canonical,
    classify_level,
    compose,
    conjoin,
    format_lf,
    keyword_fallback,
    peel,
)
from logdoc.terms import Level, LogicalForm, Variable

from tests.unit import beta_oracle


def best_lf(text, resources):
    ranked = analyses(parse(tokenize(text), resources))
    assert ranked, f"no analysis for {text!r}"
    return compose(ranked[0], resources)[0]


def test_classify_levels():
    assert classify_level(parse_atom("eventuality(give,E,A,O)")) is Level.ROLE
    assert classify_level(parse_atom("locative(roll,E,S,P,G,A)")) is Level.ROLE
    assert classify_level(parse_atom("time(t,E)")) is Level.MODIFIER
    assert classify_level(parse_atom("circumstance(against,E,W)")) is Level.CIRCUMSTANCE
    assert classify_level(parse_atom("object(dog,X)")) is Level.SUPPORT
    with pytest.raises(UnknownPredicateFamily):
        classify_level(parse_atom("frobnicate(a,b)"))


def test_ditransitive_with_modifiers(resources):
    lf = best_lf("On Tuesday, John furtively gave Mary an apple in the courtyard", resources)
    expected = parse_atoms(
        "action(give,Ev,john,O,mary), object(apple,O), location(C,Ev), "
        "object(courtyard,C), time(tuesday1,Ev), manner(furtive,Ev)")
    assert beta_oracle.alpha_equivalent(lf.atoms, expected)
    assert lf.level_of[next(a for a in lf.atoms if a.predicate == "time")] is Level.MODIFIER


def test_compound_and_unanalysed_circumstance(resources):
    lf = best_lf("On Tuesday John gave Mary a nice computer table against her will", resources)
    expected = parse_atoms(
        "action(give,Ev,john,T,mary), property(nice,T), object(computer,C), object(table,T), "
        "circumstance(by_with_for,T,C), circumstance(against,Ev,W), object(will,W), "
        "circumstance(of,W,her), time(tuesday1,Ev)")
    assert beta_oracle.alpha_equivalent(lf.atoms, expected)


def test_gerund_compound_passage(resources):
    lf = best_lf("Natural language question answering systems", resources)
    expected = parse_atoms(
        "property(natural,L), object(language,L), eventuality(answer,Ev,S,Q), "
        "object(question,Q), object(system,S), circumstance(by_with_for,S,L)")
    assert beta_oracle.alpha_equivalent(lf.atoms, expected)


def test_query_reading(resources):
    lf = best_lf("natural language questions", resources)
    expected = parse_atoms(
        "property(natural,L), object(language,L), object(question,Q), "
        "circumstance(by_with_for,Q,L)")
    assert beta_oracle.alpha_equivalent(lf.atoms, expected)


def test_movement_verb_takes_parameter_frame(resources):
    lf = best_lf("the ball rolled from the center to the edge", resources)
    expected = parse_atoms(
        "locative(roll,Ev,C,P,E,B), object(ball,B), object(center,C), object(edge,E)")
    assert beta_oracle.alpha_equivalent(lf.atoms, expected)
    assert [lf.level_of[a] for a in lf.atoms if a.predicate == "locative"] == [Level.ROLE]


def test_format_lf_tags_levels(resources):
    text = format_lf(best_lf("the dog sleeps furiously", resources))
    lines = text.splitlines()
    assert any(line.startswith("L1 ") and "eventuality(sleep," in line for line in lines)
    assert any(line.startswith("L2 ") and "manner(furious," in line for line in lines)
    assert any(line.startswith("support ") and "object(dog," in line for line in lines)


def test_canonical_renames_variables():
    a = LogicalForm(parse_atoms("object(dog, X), property(big, X)"))
    b = LogicalForm(parse_atoms("object(dog, Y), property(big, Y)"))
    assert canonical(a) == canonical(b) == "object(dog,V1), property(big,V1)"


def test_conjoin_keeps_first_occurrence():
    a = LogicalForm(parse_atoms("object(dog, X)"), {parse_atom("object(dog, X)"): Level.SUPPORT})
    both = conjoin(a, a, LogicalForm(parse_atoms("time(t, E)")))
    assert [str(x) for x in both.atoms] == ["object(dog,X)", "time(t,E)"]


def test_keyword_fallback(resources):
    lf = keyword_fallback(["the", "dogs", "sleep", "zorp", "with"], resources.lexicon)
    assert [(a.predicate, a.args[0].name) for a in lf.atoms] == \
        [("object", "dog"), ("object", "sleep"), ("object", "zorp")]
    assert len({a.args[1] for a in lf.atoms}) == 3
    assert all(isinstance(a.args[1], Variable) for a in lf.atoms)


def test_composition_error_names_rule():
    bad = build_resources(grammar_text=(
        "LEX noun: l(X, object(Lemma, X))\n"
        "RULE np_odd: np(B) -> *noun(f(B))\n"
    ), lexicon_text="dog noun\n")
    ranked = analyses(parse(["dog"], bad))
    with pytest.raises(CompositionError) as e:
        build_of(ranked[0].edge, bad)
    assert e.value.rule_id == "np_odd"


ORACLE_SENTENCES = [
    "peter beats john",
    "john sleeps",
    "the dog sleeps",
    "colorless green ideas sleep",
    "john gave mary an apple",
    "john furtively gave mary an apple",
    "the operator tested the programs",
    "on tuesday john gave mary an apple",
    "a nice computer table",
    "the ball rolled from the center",
    "the dog sleeps furiously",
    "her dog sleeps",
]


@pytest.mark.parametrize("text", ORACLE_SENTENCES)
def test_unification_matches_beta_reduction(resources, text):
    edge = analyses(parse(tokenize(text), resources))[0].edge
    composed = peel(build_of(edge, resources))
    reduced = beta_oracle.evaluate(edge)
    assert beta_oracle.alpha_equivalent(composed, reduced), (composed, reduced)

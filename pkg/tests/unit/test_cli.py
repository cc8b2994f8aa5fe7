import json

import pytest
from click.testing import CliRunner
from jsonschema import Draft7Validator, ValidationError, validate

from logdoc.cli import TRACES_SUFFIX, cli
from logdoc.config import CONFIG_ENV
from logdoc.retrieval import record_schema

PASSAGE = "Natural language question answering systems"


@pytest.fixture
def runner(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    return CliRunner()


@pytest.fixture
def kb_path(tmp_path, runner):
    doc = tmp_path / "doc11.txt"
    doc.write_text(PASSAGE + "\n")
    path = str(tmp_path / "kb.txt")
    result = runner.invoke(cli, ['index', '--kb', path, '--doc-id', '11', str(doc)])
    assert result.exit_code == 0, result.output
    assert "document 11: 1 fragments" in result.output
    return path


def test_index_rejects_duplicate_document(runner, kb_path, tmp_path):
    doc = tmp_path / "again.txt"
    doc.write_text("John sleeps.\n")
    result = runner.invoke(cli, ['index', '--kb', kb_path, '--doc-id', '11', str(doc)])
    assert result.exit_code == 3


def test_index_missing_file(runner, tmp_path):
    result = runner.invoke(cli, ['index', '--kb', str(tmp_path / "kb.txt"), '--doc-id', '1',
                                 str(tmp_path / "absent.txt")])
    assert result.exit_code == 2
    assert "cannot read document" in result.output


def test_query_prints_passages(runner, kb_path):
    result = runner.invoke(cli, ['query', '--kb', kb_path, 'Natural language questions'])
    assert result.exit_code == 0, result.output
    assert "11:1 [level3] " + PASSAGE in result.output


def test_query_records(runner, kb_path):
    result = runner.invoke(cli, ['query', '--kb', kb_path, '--format', 'records',
                                 'Natural language questions'])
    assert result.exit_code == 0, result.output
    record = json.loads(result.output.splitlines()[0])
    assert (record['document'], record['fragment'], record['stage']) == (11, 1, 'level3')
    assert record['rules'] == ['by_with_for_agent']


def test_query_by_goal(runner, kb_path):
    result = runner.invoke(cli, ['query', '--kb', kb_path,
                                 '--goal', 'object(system, S), object(language, L)'])
    assert result.exit_code == 0, result.output
    assert "11:1 [direct]" in result.output


def test_query_without_results(runner, kb_path):
    result = runner.invoke(cli, ['query', '--kb', kb_path, 'Peter gave Mary an apple'])
    assert result.exit_code == 1
    assert "No passages found." in result.output


@pytest.mark.parametrize("args", [
    [''],
    ['the of'],
    ['--goal', 'object(dog'],
    ['--m', '3', 'questions'],
])
def test_query_usage_errors(runner, kb_path, args):
    result = runner.invoke(cli, ['query', '--kb', kb_path] + args)
    assert result.exit_code == 2


def test_query_missing_knowledge_base(runner, tmp_path):
    result = runner.invoke(cli, ['query', '--kb', str(tmp_path / "none.txt"), 'dogs'])
    assert result.exit_code == 2
    assert "does not exist" in result.output


def test_bad_configuration_file(runner, kb_path, tmp_path):
    config = tmp_path / "logdoc.yaml"
    config.write_text("scoring:\n  bogus: 1\n")
    result = runner.invoke(cli, ['--config', str(config), 'query', '--kb', kb_path, 'questions'])
    assert result.exit_code == 2
    assert "scoring.bogus" in result.output


def test_explain_prints_stored_trace(runner, kb_path):
    runner.invoke(cli, ['query', '--kb', kb_path, 'Natural language questions'])
    with open(kb_path + TRACES_SUFFIX) as f:
        record = json.loads(f.readline())
    result = runner.invoke(cli, ['explain', '--kb', kb_path, record['trace_id']])
    assert result.exit_code == 0, result.output
    assert "query: Natural language questions" in result.output
    assert f"trace {record['trace_id']}: passage 1/11 stage level3" in result.output
    assert "by_with_for_agent" in result.output


def test_explain_unknown_trace(runner, kb_path):
    result = runner.invoke(cli, ['explain', '--kb', kb_path, 'feedface0000'])
    assert result.exit_code == 4


def test_parse_shows_readings(runner):
    result = runner.invoke(cli, ['parse', 'the dog sleeps furiously'])
    assert result.exit_code == 0, result.output
    assert "Tokens: the dog sleeps furiously" in result.output
    assert "Survivors (cluster):" in result.output
    assert "manner(furious," in result.output


def test_parse_partial_and_dump(runner):
    result = runner.invoke(cli, ['parse', '--dump', 'the dog zorp the ball'])
    assert result.exit_code == 0, result.output
    assert "Analyses: 0" in result.output
    assert "Partial analyses: 2" in result.output
    assert "object(dog," in result.output and "object(ball," in result.output


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


def test_records_follow_bundled_schema(runner, kb_path):
    result = runner.invoke(cli, ['query', '--kb', kb_path, '--format', 'records',
                                 'Natural language questions'])
    assert result.exit_code == 0, result.output
    records = json_lines(result.output)
    assert records
    for record in records:
        validate(record, record_schema('passage'))
    with open(kb_path + TRACES_SUFFIX) as f:
        for line in json_lines(f.read()):
            validate(line, record_schema('trace_line'))
            validate(line, record_schema())
    broken = {k: v for k, v in records[0].items() if k != 'stage'}
    with pytest.raises(ValidationError):
        validate(broken, record_schema('passage'))


def test_schema_command_prints_bundled_schema(runner):
    result = runner.invoke(cli, ['schema'])
    assert result.exit_code == 0, result.output
    printed = json.loads(result.output)
    Draft7Validator.check_schema(printed)
    assert printed == record_schema()
    narrowed = runner.invoke(cli, ['schema', '--kind', 'passage'])
    assert json.loads(narrowed.output)['allOf'] == [{'$ref': '#/definitions/passage'}]


def test_repeated_query_stores_each_trace_once(runner, kb_path):
    for _ in range(3):
        result = runner.invoke(cli, ['query', '--kb', kb_path, 'Natural language questions'])
        assert result.exit_code == 0, result.output
    with open(kb_path + TRACES_SUFFIX) as f:
        ids = [line['trace_id'] for line in json_lines(f.read())]
    assert len(ids) == len(set(ids)) == 1


def test_index_reports_unwritable_knowledge_base(runner, tmp_path):
    doc = tmp_path / "doc.txt"
    doc.write_text("John sleeps.\n")
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory\n")
    result = runner.invoke(cli, ['index', '--kb', str(blocker / "kb.txt"), '--doc-id', '1',
                                 str(doc)])
    assert result.exit_code == 2
    assert "cannot write knowledge base" in result.output


def test_query_reports_composition_error(runner, kb_path, tmp_path):
    grammar = tmp_path / "odd.grammar"
    grammar.write_text("LEX noun: l(X, object(Lemma, X))\nRULE np_odd: np(B) -> *noun(f(B))\n")
    lexicon = tmp_path / "odd.lexicon"
    lexicon.write_text("dog noun\n")
    result = runner.invoke(cli, ['--grammar', str(grammar), '--lexicon', str(lexicon),
                                 'query', '--kb', kb_path, 'dog'])
    assert result.exit_code == 2
    assert "np_odd" in result.output

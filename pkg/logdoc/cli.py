"""
Command line: index documents, query passages, inspect parses, explain proofs.

Exit codes:
    0  success
    1  query found no passages
    2  configuration, resource, input or empty-query error
    3  document id already indexed
    4  unknown trace id

`query --format records` prints one JSON object per passage and every query
appends its new proofs to `<kb>.traces.jsonl`; `logdoc schema` prints the
bundled schema both follow.
"""
import json
import logging
import sys
from typing import Dict, Optional, Set

import click
from botocore.exceptions import BotoCoreError, ClientError

from logdoc import storage
from logdoc.chart_parser import FILTER_MODES, analyses, dump_chart, extract_fragments, filter_readings, parse
from logdoc.config import CONFIG_ENV, OUTPUT_FORMATS, Settings, load_settings
from logdoc.errors import (
    ConfigError,
    DuplicateDocumentError,
    KBFormatError,
    LogDocError,
    ResourceError,
    UnknownTraceError,
)
from logdoc.knowledge_base import KnowledgeBase
from logdoc.lexicon import tokenize
from logdoc.prover import Goal, ProofTrace, format_trace
from logdoc.reader import parse_atoms
from logdoc.retrieval import (
    RECORD_KINDS,
    RetrievalResult,
    answer_goals,
    answer_query,
    index_document,
    record_schema,
)
from logdoc.semantics import compose, compose_fragments, format_lf

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NO_RESULTS = 1
EXIT_USAGE = 2
EXIT_DUPLICATE = 3
EXIT_UNKNOWN_TRACE = 4

TRACES_SUFFIX = ".traces.jsonl"

READ_ERRORS = (OSError, ValueError, BotoCoreError, ClientError)


def _fail(ctx: click.Context, code: int, message: str) -> None:
    click.echo(f"Error: {message}", err=True)
    ctx.exit(code)


def _settings(ctx: click.Context, **sections: Dict) -> Settings:
    overrides = {"resources": ctx.obj["resources"]}
    overrides.update(sections)
    try:
        return load_settings(ctx.obj["config"], overrides)
    except ConfigError as e:
        _fail(ctx, EXIT_USAGE, str(e))


def _load_resources(ctx: click.Context, settings: Settings):
    try:
        return settings.resources.load()
    except ResourceError as e:
        _fail(ctx, EXIT_USAGE, str(e))


def _load_kb(ctx: click.Context, kb_path: str, required: bool = True) -> KnowledgeBase:
    try:
        if storage.exists(kb_path):
            return KnowledgeBase.load(kb_path)
    except KBFormatError as e:
        _fail(ctx, EXIT_USAGE, f"{kb_path}: {e}")
    except READ_ERRORS as e:
        _fail(ctx, EXIT_USAGE, f"cannot read {kb_path}: {e}")
    if required:
        _fail(ctx, EXIT_USAGE, f"knowledge base {kb_path} does not exist")
    return KnowledgeBase()


@click.group()
@click.option('--config', 'config_path', envvar=CONFIG_ENV, default=None,
              help='YAML configuration file (also $LOGDOC_CONFIG)')
@click.option('-v', '--verbose', count=True, help='-v for INFO, -vv for DEBUG logging')
@click.option('--grammar', default=None, help='Grammar file')
@click.option('--lexicon', default=None, help='Lexicon file')
@click.option('--postulates', default=None, help='Meaning postulate file')
@click.option('--spec', default=None, help='Preference (spec) rule file')
@click.option('--isa', default=None, help='Inheritance file')
@click.pass_context
def cli(ctx, config_path, verbose, grammar, lexicon, postulates, spec, isa):
    """Logic-based passage retrieval over indexed documents."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger('logdoc').setLevel(level)
    ctx.obj = {
        "config": config_path,
        "resources": {
            "grammar": grammar,
            "lexicon": lexicon,
            "postulates": postulates,
            "spec": spec,
            "isa": isa,
        },
    }


@cli.command()
@click.option('--kb', 'kb_path', required=True, help='Knowledge base file (created if missing)')
@click.option('--doc-id', type=int, required=True, help='Document id')
@click.argument('files', nargs=-1, required=True)
@click.pass_context
def index(ctx, kb_path, doc_id, files):
    """Index FILES as one document."""
    settings = _settings(ctx)
    resources = _load_resources(ctx, settings)
    kb = _load_kb(ctx, kb_path, required=False)
    try:
        text = "\n".join(storage.read_text(f) for f in files)
    except READ_ERRORS as e:
        _fail(ctx, EXIT_USAGE, f"cannot read document: {e}")
    try:
        report = index_document(kb, doc_id, text, resources, settings.scoring)
    except DuplicateDocumentError as e:
        _fail(ctx, EXIT_DUPLICATE, str(e))
    except LogDocError as e:
        _fail(ctx, EXIT_USAGE, str(e))
    try:
        kb.save(kb_path)
    except READ_ERRORS as e:
        _fail(ctx, EXIT_USAGE, f"cannot write knowledge base {kb_path}: {e}")
    click.echo(str(report))


def _stored_trace_ids(path: str) -> Set[str]:
    if not storage.exists(path):
        return set()
    ids = set()
    for line in storage.read_text(path).splitlines():
        try:
            ids.add(json.loads(line)['trace_id'])
        except (ValueError, KeyError, TypeError):
            continue
    return ids


def _write_traces(kb_path: str, result: RetrievalResult) -> None:
    """Append one line per passage whose trace id is not stored yet."""
    path = storage.sibling_uri(kb_path, TRACES_SUFFIX)
    seen = _stored_trace_ids(path)
    lines = []
    for passage in result:
        if passage.trace_id in seen:
            continue
        seen.add(passage.trace_id)
        lines.append(json.dumps(passage.to_trace_record(result.query), sort_keys=True))
    if lines:
        storage.append_text(path, "\n".join(lines) + "\n")


@cli.command()
@click.option('--kb', 'kb_path', required=True, help='Knowledge base file')
@click.option('--goal', default=None, help='Query as a conjunction of atoms instead of text')
@click.option('--m', type=int, default=None, help='Stop after the direct stage above M passages')
@click.option('--n', type=int, default=None, help='Use meaning postulates below N passages')
@click.option('--o', type=int, default=None, help='Use inheritance below O passages')
@click.option('--escalate-in-band/--no-escalate-in-band', default=None,
              help='Escalate when direct results fall between N and M')
@click.option('--format', 'output_format', type=click.Choice(OUTPUT_FORMATS), default=None)
@click.argument('text', required=False, default='')
@click.pass_context
def query(ctx, kb_path, goal, m, n, o, escalate_in_band, output_format, text):
    """Retrieve passages answering TEXT."""
    settings = _settings(ctx, retrieval={"m": m, "n": n, "o": o,
                                         "escalate_in_band": escalate_in_band},
                         output={"format": output_format})
    resources = _load_resources(ctx, settings)
    kb = _load_kb(ctx, kb_path)
    try:
        if goal:
            goals = [Goal(parse_atoms(goal), goal)]
            rules = list(kb.rules) + list(resources.postulates)
            result = answer_goals(kb, goals, rules, resources.isa, settings.retrieval, goal)
        else:
            result = answer_query(kb, text, resources, settings.retrieval, settings.scoring)
    except LogDocError as e:
        _fail(ctx, EXIT_USAGE, str(e))

    if settings.output.traces:
        try:
            _write_traces(kb_path, result)
        except READ_ERRORS as e:
            logger.warning("Could not store proof traces: %s", e)
    for passage in result:
        if settings.output.format == "records":
            click.echo(json.dumps(passage.to_record(), sort_keys=True))
        else:
            click.echo(str(passage))
    if result.truncated:
        logger.warning("Inference budget exhausted; results may be incomplete")
    if not result.passages:
        click.echo("No passages found.", err=True)
        ctx.exit(EXIT_NO_RESULTS)


@cli.command('parse')
@click.option('--n-best', type=int, default=None, help='Cohort size for pruning (0 disables)')
@click.option('--filter', 'filter_mode', type=click.Choice(FILTER_MODES), default=None)
@click.option('--dump', is_flag=True, help='Print every live chart edge')
@click.argument('text', required=False, default='')
@click.pass_context
def parse_command(ctx, n_best, filter_mode, dump, text):
    """Show ranked analyses and logical forms for TEXT."""
    settings = _settings(ctx, scoring={"n_best": n_best, "filter": filter_mode})
    resources = _load_resources(ctx, settings)
    tokens = tokenize(text)
    chart = parse(tokens, resources, settings.scoring)
    ranked = analyses(chart)

    click.echo(f"Tokens: {' '.join(tokens)}")
    click.echo(f"Edges: {chart.created} created, {len(chart)} live")
    if dump:
        click.echo(dump_chart(chart))
    click.echo(f"Analyses: {len(ranked)}")
    for a in ranked:
        click.echo(f"  {a.value:10.3f}  {a.edge}")
    try:
        if ranked:
            survivors = filter_readings(ranked, settings.scoring)
            click.echo(f"Survivors ({settings.scoring.filter}): {len(survivors)}")
            for a in survivors:
                for lf in compose(a, resources):
                    click.echo(f"--- reading {a.reading} ({a.value:.3f})")
                    click.echo(format_lf(lf))
        elif tokens:
            fragments = extract_fragments(chart, settings.scoring)
            click.echo(f"Partial analyses: {len(fragments)}")
            for f in fragments:
                click.echo(f"  {f.value:10.3f}  {f.edge}")
            click.echo(format_lf(compose_fragments(fragments, resources)))
    except LogDocError as e:
        _fail(ctx, EXIT_USAGE, str(e))


def find_trace(kb_path: str, trace_id: str) -> Dict:
    """Most recent record for ``trace_id`` in the knowledge base's trace file."""
    path = storage.sibling_uri(kb_path, TRACES_SUFFIX)
    if not storage.exists(path):
        raise UnknownTraceError(trace_id)
    found: Optional[Dict] = None
    for line in storage.read_text(path).splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        if record.get('trace_id') == trace_id:
            found = record
    if found is None:
        raise UnknownTraceError(trace_id)
    return found


@cli.command()
@click.option('--kb', 'kb_path', required=True, help='Knowledge base file')
@click.argument('trace_id')
@click.pass_context
def explain(ctx, kb_path, trace_id):
    """Print the proof behind a retrieved passage."""
    try:
        record = find_trace(kb_path, trace_id)
    except UnknownTraceError as e:
        _fail(ctx, EXIT_UNKNOWN_TRACE, str(e))
    except READ_ERRORS as e:
        _fail(ctx, EXIT_USAGE, f"cannot read traces: {e}")
    click.echo(f"query: {record.get('query', '')}")
    click.echo(format_trace(ProofTrace.from_dict(record['trace']), trace_id))


@cli.command()
@click.option('--kind', type=click.Choice(RECORD_KINDS), default=None,
              help='Print the schema of one record type only')
def schema(kind):
    """Print the JSON schema of query records and stored traces."""
    click.echo(json.dumps(record_schema(kind), indent=2, sort_keys=True))


def main() -> None:
    cli(obj=None)

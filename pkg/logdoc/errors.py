"""
Exception hierarchy for LogDoc.
Unification failure, missing proofs and exhausted budgets are values, not errors.
"""
from typing import List, Optional


class LogDocError(Exception):
    """Base class for all LogDoc errors."""


class ConfigError(LogDocError):
    """Invalid configuration value or configuration file."""


class ResourceError(LogDocError):
    """
    One or more problems found while loading grammar, lexicon, spec,
    postulate or inheritance files. Every entry reads ``file:line: message``.
    """

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


class KnowledgeBaseError(LogDocError):
    """Invalid operation on a knowledge base."""


class FragmentAlreadyIndexed(KnowledgeBaseError):
    def __init__(self, fragment: int, document: int):
        self.fragment = fragment
        self.document = document
        super().__init__(f"fragment already indexed: /{fragment}/{document}")


class DuplicateDocumentError(KnowledgeBaseError):
    def __init__(self, document: int):
        self.document = document
        super().__init__(f"document {document} is already indexed")


class KBFormatError(KnowledgeBaseError):
    """Malformed knowledge base file."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


class CompositionError(LogDocError):
    """A grammar rule's semantic builds do not fit together."""

    def __init__(self, rule_id: str, message: str = "semantic build mismatch"):
        self.rule_id = rule_id
        super().__init__(f"{message} in rule {rule_id}")


class UnknownPredicateFamily(LogDocError):
    def __init__(self, predicate: str, arity: int):
        self.predicate = predicate
        self.arity = arity
        super().__init__(f"unknown predicate family: {predicate}/{arity}")


class EmptyQueryError(LogDocError):
    def __init__(self, query: str = ""):
        self.query = query
        super().__init__("empty query")


class UnknownTraceError(LogDocError):
    def __init__(self, trace_id: str):
        self.trace_id = trace_id
        super().__init__(f"unknown trace id: {trace_id}")


class TermSyntaxError(LogDocError):
    """Unreadable term, atom or clause text."""

    def __init__(self, message: str, text: str = "", position: int = 0):
        self.text = text
        self.position = position
        super().__init__(f"{message} at column {position + 1}")

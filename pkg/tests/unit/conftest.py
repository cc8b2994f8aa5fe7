import pytest

from logdoc.knowledge_base import KnowledgeBase
from logdoc.reader import parse_atoms
from logdoc.resources import load_resources
from logdoc.terms import LogicalForm

# Passage 1 of document 3: Skolemized reading of a sentence about
# grammar formalisms sharing structure with language representations.
PASSAGE_3_1 = (
    "representation(sk-1,sk-2), language(sk-2), share(sk-1,sk-3), base(sk-5,sk-8), "
    "structure(sk-3,sk-4), goal(sk-5,sk-1), formalism(sk-5,sk-6), grammar(sk-6,sk-7), "
    "unification(sk-8)"
)


@pytest.fixture(scope="session")
def resources():
    return load_resources()


@pytest.fixture(scope="session")
def plain_resources(resources):
    return resources.without_semtypes()


def lf(text):
    return LogicalForm(parse_atoms(text))


@pytest.fixture
def kb_3_1():
    kb = KnowledgeBase()
    kb.assert_fragment(3, 1, [lf(PASSAGE_3_1)],
                       "Unification-based grammar formalisms share structure "
                       "with language representations.")
    kb.skolems.next_index = 9
    return kb

"""
Lexicon, tokenizer and a small conservative morphology.

Lexicon lines read ``surface category key=value...`` with keys
trans (``intr|tr`` loads one entry per alternative), semtype (comma list),
lemma, const, num, past (irregular past form) and param (eventuality
parameter of movement verbs).
"""
import logging
import re
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

logger = logging.getLogger(__name__)

LEXICON_KEYS = {"trans", "semtype", "lemma", "const", "num", "past", "param"}
TRANSITIVITY = {"intr", "tr", "ditr"}
NUMBERS = {"sg", "pl"}

_WORD = re.compile(r"[a-z0-9]+(?:['-][a-z0-9]+)*")


@dataclass
class LexEntry:
    surface: str
    lemma: str
    category: str
    features: Dict[str, str] = field(default_factory=dict)
    semtypes: FrozenSet[str] = frozenset()
    const: Optional[str] = None
    param: Optional[str] = None
    past: Optional[str] = None

    @property
    def constant(self) -> str:
        """Name used for the entry in logical forms."""
        return self.const or self.lemma

    @property
    def signature(self) -> Tuple:
        return (self.lemma, self.category, tuple(sorted(self.features.items())))


class Lexicon:
    """Entries by surface form, in file order."""

    def __init__(self, entries=()):
        self._by_surface: Dict[str, List[LexEntry]] = {}
        self._past: Dict[str, List[str]] = {}
        for entry in entries:
            self.add(entry)

    def add(self, entry: LexEntry) -> None:
        self._by_surface.setdefault(entry.surface, []).append(entry)
        if entry.past:
            lemmas = self._past.setdefault(entry.past, [])
            if entry.lemma not in lemmas:
                lemmas.append(entry.lemma)

    def entries(self, surface: str) -> List[LexEntry]:
        return self._by_surface.get(surface, [])

    def past_lemmas(self, form: str) -> List[str]:
        return self._past.get(form, [])

    def __contains__(self, surface: str) -> bool:
        return surface in self._by_surface

    def __iter__(self) -> Iterator[LexEntry]:
        for entries in self._by_surface.values():
            yield from entries

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_surface.values())

    def categories(self) -> FrozenSet[str]:
        return frozenset(e.category for e in self)

    def semtypes_of(self, constant: str, category: Optional[str] = None) -> FrozenSet[str]:
        """Union of semantic types of the entries naming ``constant``."""
        types = set()
        for e in self:
            if e.constant == constant and (category is None or e.category == category):
                types |= e.semtypes
        return frozenset(types)

    def param_of(self, lemma: str) -> Optional[str]:
        for e in self:
            if e.category == "verb" and e.lemma == lemma and e.param:
                return e.param
        return None

    def without_semtypes(self) -> "Lexicon":
        return Lexicon(replace(e, semtypes=frozenset(), features=dict(e.features)) for e in self)


def tokenize(text: str) -> List[str]:
    """Lowercased words; hyphenated words stay whole, punctuation is dropped."""
    return _WORD.findall(text.lower())


def parse_lexicon(text: str, source: str, errors: List[str]) -> Lexicon:
    """
    Read lexicon text, appending ``source:line: message`` problems to ``errors``.

    Args:
        text (str): lexicon file contents
        source (str): file name used in messages
        errors (List[str]): collector

    Returns:
        Lexicon: entries from every valid line
    """
    lexicon = Lexicon()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        parts = line.split()
        if len(parts) < 2:
            errors.append(f"{where}: expected 'word category key=value...'")
            continue
        surface, category = parts[0].lower(), parts[1]
        attrs: Dict[str, str] = {}
        ok = True
        for part in parts[2:]:
            key, sep, value = part.partition("=")
            if not sep or key not in LEXICON_KEYS or not value:
                errors.append(f"{where}: bad attribute {part!r}")
                ok = False
                continue
            attrs[key] = value
        trans = attrs["trans"].split("|") if "trans" in attrs else [None]
        bad = [t for t in trans if t is not None and t not in TRANSITIVITY]
        if bad:
            errors.append(f"{where}: unknown transitivity {bad[0]!r}")
            ok = False
        if "num" in attrs and attrs["num"] not in NUMBERS:
            errors.append(f"{where}: unknown number {attrs['num']!r}")
            ok = False
        if not ok:
            continue
        semtypes = frozenset(t for t in attrs.get("semtype", "").split(",") if t)
        for t in trans:
            features = {}
            if t:
                features["trans"] = t
            if "num" in attrs:
                features["num"] = attrs["num"]
            lexicon.add(LexEntry(
                surface=surface,
                lemma=attrs.get("lemma", surface),
                category=category,
                features=features,
                semtypes=semtypes,
                const=attrs.get("const"),
                param=attrs.get("param"),
                past=attrs.get("past"),
            ))
    logger.debug("Loaded %d lexicon entries from %s", len(lexicon), source)
    return lexicon


def _s_stems(form: str) -> List[str]:
    if form.endswith("ies") and len(form) > 4:
        return [form[:-3] + "y"]
    if form.endswith("es") and len(form) > 3:
        return [form[:-2], form[:-1]]
    if form.endswith("s") and not form.endswith("ss") and len(form) > 2:
        return [form[:-1]]
    return []


def _suffix_stems(stem: str) -> List[str]:
    """Stems after removing -ing or -ed: plain, e-restored, undoubled, y-restored."""
    stems = [stem, stem + "e"]
    if len(stem) > 2 and stem[-1] == stem[-2]:
        stems.append(stem[:-1])
    if stem.endswith("i"):
        stems.append(stem[:-1] + "y")
    return stems


def analyze_word(form: str, lexicon: Lexicon) -> List[LexEntry]:
    """
    Exact entries plus suffix-stripped candidates whose lemma is in the lexicon.

    Args:
        form (str): token
        lexicon (Lexicon): loaded lexicon

    Returns:
        List[LexEntry]: entries with surface ``form`` and derived features
        (num for nouns and finite verbs, form=finite|gerund for verbs)
    """
    form = form.lower()
    results: List[LexEntry] = []
    seen = set()

    def add(entry: LexEntry, **derived) -> None:
        features = dict(entry.features)
        features.update(derived)
        candidate = replace(entry, surface=form, features=features)
        if candidate.signature not in seen:
            seen.add(candidate.signature)
            results.append(candidate)

    for e in lexicon.entries(form):
        if e.category == "verb":
            add(e, form="finite", num="pl")
        elif e.category in ("noun", "name") and "num" not in e.features:
            add(e, num="sg")
        else:
            add(e)

    for stem in _s_stems(form):
        for e in lexicon.entries(stem):
            if e.category == "noun" and e.features.get("num") != "pl":
                add(e, num="pl")
            elif e.category == "verb":
                add(e, form="finite", num="sg")

    if form.endswith("ing") and len(form) > 4:
        for stem in _suffix_stems(form[:-3]):
            for e in lexicon.entries(stem):
                if e.category == "verb":
                    add(e, form="gerund")

    if form.endswith("ed") and len(form) > 3:
        for stem in _suffix_stems(form[:-2]):
            for e in lexicon.entries(stem):
                if e.category == "verb" and not e.past:
                    add(e, form="finite")

    for lemma in lexicon.past_lemmas(form):
        for e in lexicon.entries(lemma):
            if e.category == "verb":
                add(e, form="finite")

    return results

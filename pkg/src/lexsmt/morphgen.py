"""Case-marker inflection of bilingual lexicon entries.

Sinhala singular common nouns inflect for five cases and two definiteness
values.  Each paradigm pairs a source-side suffix rewrite (strip, then add)
with a target-side template such as ``"to the {w}"``.  Paradigms are data:
they are read from a TSV rules file so new noun classes can be added
without touching code.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Sequence

from .errors import FormatError
from .textprep import tokenize

CASES = ("nominative", "accusative", "dative", "genitive", "instrumental")
DEFINITENESS = ("definite", "indefinite")
CELLS = tuple((c, d) for c in CASES for d in DEFINITENESS)
CLASSES = ("masculine", "feminine", "unspecified")
KINDS = ("dictionary", "glossary", "names", "addresses", "designations")

NOUN_FLAG = "noun"
AUGMENTED_FLAG = "augmented"
# Suffix notation for a word ending in a bare consonant (inherent vowel).
INHERENT_VOWEL = "අ"
ARTICLE_SLOT = "a/an"


def _is_sinhala_consonant(ch: str) -> bool:
    return "ක" <= ch <= "ෆ"


@dataclass(frozen=True)
class InflectionRule:
    case: str
    definiteness: str
    src_strip: str
    src_add: str
    tgt_template: str

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}")
        if self.definiteness not in DEFINITENESS:
            raise ValueError(f"unknown definiteness {self.definiteness!r}")
        if self.tgt_template.count("{w}") != 1:
            raise ValueError(f"template must contain exactly one {{w}}: {self.tgt_template!r}")

    @property
    def cell(self):
        return (self.case, self.definiteness)


@dataclass
class InflectionParadigm:
    id: str
    match_suffix: str
    noun_class: str = "unspecified"
    rules: list[InflectionRule] = field(default_factory=list)

    def __post_init__(self):
        if not self.match_suffix:
            raise ValueError(f"paradigm {self.id}: empty match_suffix")
        if self.noun_class not in CLASSES:
            raise ValueError(f"paradigm {self.id}: unknown class {self.noun_class!r}")

    def matches(self, word: str) -> bool:
        if self.match_suffix == INHERENT_VOWEL:
            return bool(word) and _is_sinhala_consonant(word[-1])
        return word.endswith(self.match_suffix) and len(word) > len(self.match_suffix)

    @property
    def suffix_length(self) -> int:
        # the inherent vowel has no code point but counts as a one-letter suffix
        return 1 if self.match_suffix == INHERENT_VOWEL else len(self.match_suffix)


@dataclass(frozen=True)
class LexiconEntry:
    source_term: tuple[str, ...]
    target_term: tuple[str, ...]
    kind: str = "dictionary"
    flags: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "source_term", tuple(self.source_term))
        object.__setattr__(self, "target_term", tuple(self.target_term))
        object.__setattr__(self, "flags", frozenset(self.flags))
        if not self.source_term or not self.target_term:
            raise ValueError("lexicon entry terms must be non-empty")
        if self.kind not in KINDS:
            raise ValueError(f"unknown lexicon kind {self.kind!r}")

    @property
    def key(self):
        return (self.source_term, self.target_term)

    @property
    def is_noun(self) -> bool:
        return NOUN_FLAG in self.flags

    @property
    def origin(self) -> str:
        return "augmented-list" if AUGMENTED_FLAG in self.flags else "list"

    def swapped(self) -> "LexiconEntry":
        return LexiconEntry(self.target_term, self.source_term, self.kind, self.flags)


@dataclass
class AugmentReport:
    seeds: int = 0
    seeds_matched: int = 0
    generated: int = 0
    collisions: int = 0
    skipped: Counter = field(default_factory=Counter)

    def merge(self, other: "AugmentReport"):
        self.seeds += other.seeds
        self.seeds_matched += other.seeds_matched
        self.generated += other.generated
        self.collisions += other.collisions
        self.skipped.update(other.skipped)


def vowel_article(entry: LexiconEntry) -> str:
    """Choose "a" or "an" for an entry's target term.

    An ``article=a`` / ``article=an`` flag overrides the default, which picks
    "an" for target terms starting with a vowel letter.
    """
    for flag in entry.flags:
        if flag.startswith("article="):
            return flag.split("=", 1)[1]
    return "an" if entry.target_term[0][:1].lower() in "aeiou" else "a"


def _class_allowed(paradigm: InflectionParadigm, flags) -> bool:
    cls = paradigm.noun_class
    if "inanimate" in flags:
        return cls == "unspecified"
    if flags & {"animate", "masc", "fem"} and cls == "unspecified":
        return False
    if "masc" in flags and cls == "feminine":
        return False
    if "fem" in flags and cls == "masculine":
        return False
    return True


def select_paradigm(
    entry: LexiconEntry,
    paradigms: Sequence[InflectionParadigm],
    require_noun: bool = True,
) -> InflectionParadigm | None:
    """Pick the paradigm whose suffix best matches the entry's final source word.

    Only entries flagged as common singular nouns are eligible unless
    ``require_noun`` is false.  Longest suffix wins; ties keep file order.
    """
    if AUGMENTED_FLAG in entry.flags:
        return None
    if require_noun and not entry.is_noun:
        return None
    word = entry.source_term[-1]
    best = None
    for paradigm in paradigms:
        if not paradigm.matches(word) or not _class_allowed(paradigm, entry.flags):
            continue
        if best is None or paradigm.suffix_length > best.suffix_length:
            best = paradigm
    return best


def inflect_word(word: str, rule: InflectionRule) -> str | None:
    """Apply a strip/add rule; None when the strip does not fit or empties the stem."""
    if rule.src_strip:
        if not word.endswith(rule.src_strip):
            return None
        stem = word[: -len(rule.src_strip)]
    else:
        stem = word
    if not stem:
        return None
    return stem + rule.src_add


def render_target(entry: LexiconEntry, rule: InflectionRule,
                  article_policy: Callable[[LexiconEntry], str] = vowel_article) -> tuple[str, ...]:
    text = rule.tgt_template
    if ARTICLE_SLOT in text:
        text = text.replace(ARTICLE_SLOT, article_policy(entry))
    text = text.replace("{w}", " ".join(entry.target_term))
    return tuple(tokenize(text))


def inflection_cells(entry: LexiconEntry, paradigm: InflectionParadigm,
                     article_policy=vowel_article, report: AugmentReport | None = None):
    """Map every (case, definiteness) cell of the paradigm to its inflected entry.

    Unlike :func:`augment_entry` nothing is collapsed, so the mapping mirrors
    the paradigm table cell for cell.
    """
    cells = {}
    head, last = entry.source_term[:-1], entry.source_term[-1]
    for rule in paradigm.rules:
        word = inflect_word(last, rule)
        if word is None:
            if report is not None:
                report.skipped["empty-stem"] += 1
            continue
        cells[rule.cell] = LexiconEntry(
            head + (word,),
            render_target(entry, rule, article_policy),
            entry.kind,
            {AUGMENTED_FLAG, f"{rule.case}.{rule.definiteness}"},
        )
    return cells


def augment_entry(entry: LexiconEntry, paradigm: InflectionParadigm,
                  article_policy=vowel_article, report: AugmentReport | None = None) -> list[LexiconEntry]:
    out = []
    seen = {entry.key}
    for generated in inflection_cells(entry, paradigm, article_policy, report).values():
        if generated.key in seen:
            if report is not None:
                report.collisions += 1
            continue
        seen.add(generated.key)
        out.append(generated)
    return out


def augment_glossary(entry: LexiconEntry, paradigms: Sequence[InflectionParadigm],
                     article_policy=vowel_article, report: AugmentReport | None = None) -> list[LexiconEntry]:
    """Inflect the final word of a (possibly multiword) glossary term.

    Glossary terms are noun phrases, so no noun flag is required; animacy
    and gender flags still steer paradigm choice.
    """
    if entry.kind != "glossary":
        raise ValueError(f"augment_glossary expects a glossary entry, got {entry.kind!r}")
    paradigm = select_paradigm(entry, paradigms, require_noun=False)
    if paradigm is None:
        if report is not None:
            report.skipped["no-paradigm"] += 1
        return []
    return augment_entry(entry, paradigm, article_policy, report)


def augment_lexicon(entries: Iterable[LexiconEntry], paradigms: Sequence[InflectionParadigm],
                    article_policy=vowel_article) -> tuple[list[LexiconEntry], AugmentReport]:
    """Return the original entries followed by every new inflected entry.

    Previously generated entries are never used as seeds, so running the
    augmentation twice adds nothing the first pass did not.
    """
    entries = list(entries)
    report = AugmentReport()
    out = []
    seen = set()
    for entry in entries:
        if entry.key not in seen:
            seen.add(entry.key)
            out.append(entry)

    for entry in entries:
        if AUGMENTED_FLAG in entry.flags:
            continue
        report.seeds += 1
        if entry.kind == "glossary":
            generated = augment_glossary(entry, paradigms, article_policy, report)
            if generated:
                report.seeds_matched += 1
        elif entry.kind == "dictionary":
            if not entry.is_noun:
                report.skipped["not-noun"] += 1
                continue
            paradigm = select_paradigm(entry, paradigms)
            if paradigm is None:
                report.skipped["no-paradigm"] += 1
                continue
            report.seeds_matched += 1
            generated = augment_entry(entry, paradigm, article_policy, report)
        else:
            report.skipped[f"kind-{entry.kind}"] += 1
            continue
        for new in generated:
            if new.key in seen:
                report.collisions += 1
                continue
            seen.add(new.key)
            out.append(new)
            report.generated += 1
    return out, report


# -- file formats -----------------------------------------------------------

def _field(value: str) -> str:
    return "" if value == "-" else value


def read_paradigms(path) -> list[InflectionParadigm]:
    paradigms: dict[str, InflectionParadigm] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (7, 8):
                raise FormatError(path, lineno, f"expected 7 or 8 tab-separated fields, got {len(parts)}")
            pid, suffix, case, definiteness, strip, add, template = parts[:7]
            cls = parts[7] if len(parts) == 8 else "unspecified"
            try:
                rule = InflectionRule(case, definiteness, _field(strip), _field(add), template)
                paradigm = paradigms.get(pid)
                if paradigm is None:
                    paradigm = paradigms[pid] = InflectionParadigm(pid, suffix, cls)
                elif paradigm.match_suffix != suffix or paradigm.noun_class != cls:
                    raise ValueError(f"paradigm {pid} redefined with a different suffix or class")
            except ValueError as exc:
                raise FormatError(path, lineno, str(exc)) from None
            if any(r.cell == rule.cell for r in paradigm.rules):
                raise FormatError(path, lineno, f"duplicate cell {rule.cell} in paradigm {pid}")
            paradigm.rules.append(rule)
    return list(paradigms.values())


def default_paradigms() -> list[InflectionParadigm]:
    with resources.as_file(resources.files("lexsmt") / "data" / "default_paradigms.tsv") as path:
        return read_paradigms(path)


def default_paradigms_path():
    return resources.files("lexsmt") / "data" / "default_paradigms.tsv"


def parse_lexicon_line(line: str, path="<lexicon>", lineno=0) -> LexiconEntry:
    parts = line.split("\t")
    if len(parts) < 2 or len(parts) > 4:
        raise FormatError(path, lineno, "expected source<TAB>target[<TAB>kind[<TAB>flags]]")
    kind = parts[2] if len(parts) > 2 and parts[2] else "dictionary"
    flags = {f.strip() for f in parts[3].split(",") if f.strip()} if len(parts) > 3 else set()
    try:
        return LexiconEntry(tuple(tokenize(parts[0])), tuple(tokenize(parts[1])), kind, flags)
    except ValueError as exc:
        raise FormatError(path, lineno, str(exc)) from None


def read_lexicon(path) -> list[LexiconEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            entries.append(parse_lexicon_line(line, path, lineno))
    return entries


def format_lexicon_entry(entry: LexiconEntry) -> str:
    return "\t".join([
        " ".join(entry.source_term),
        " ".join(entry.target_term),
        entry.kind,
        ",".join(sorted(entry.flags)),
    ])


def write_lexicon(path, entries: Iterable[LexiconEntry]):
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(format_lexicon_entry(entry) + "\n")

"""Deterministic synthetic Sinhala-English data for exercising the pipeline.

The corpus is built from case-marked sentence templates.  Training nouns
appear in all their inflected forms; lexicon-only nouns appear in the test
set (often inflected) but never in training, so they are out of vocabulary
unless a list supplies them.  English renderings of the noun phrases come
from the same paradigms the augmentation uses.
"""

from __future__ import annotations

import random
from pathlib import Path

from .morphgen import (LexiconEntry, default_paradigms, inflection_cells, select_paradigm,
                       format_lexicon_entry)
from .textprep import tokenize

# (Sinhala, English, flags)
TRAIN_NOUNS = [
    ("මිනිසා", "man", "noun,animate"),
    ("ගොවියා", "farmer", "noun,animate"),
    ("ළමයා", "child", "noun,animate"),
    ("ගුරුවරයා", "teacher", "noun,animate"),
    ("නිලධාරියා", "officer", "noun,animate"),
    ("වෛද්‍යවරයා", "doctor", "noun,animate"),
    ("රියදුරා", "driver", "noun,animate"),
    ("වෙළෙන්දා", "trader", "noun,animate"),
    ("කෙල්ල", "girl", "noun,animate,fem"),
    ("ගැහැනිය", "woman", "noun,animate,fem"),
]

LEXICON_NOUNS = [
    ("සේවකයා", "worker", "noun,animate"),
    ("අමාත්‍යවරයා", "minister", "noun,animate"),
    ("ලේකම්වරයා", "secretary", "noun,animate"),
    ("සභාපතිවරයා", "chairman", "noun,animate"),
    ("කළමනාකරුවා", "manager", "noun,animate"),
    ("ඉංජිනේරුවා", "engineer", "noun,animate"),
    ("නීතිඥයා", "lawyer", "noun,animate"),
    ("කම්කරුවා", "labourer", "noun,animate"),
    ("ශිෂ්‍යයා", "student", "noun,animate"),
    ("පාලකයා", "ruler", "noun,animate"),
    ("ආචාර්යවරයා", "lecturer", "noun,animate"),
    ("විදුහල්පතිවරයා", "principal", "noun,animate"),
    ("හෙදිය", "nurse", "noun,animate,fem"),
    ("දුව", "daughter", "noun,animate,fem"),
    ("බිරිඳ", "wife", "noun,animate,fem"),
]

TRAIN_PLACES = [
    ("ආයතනය", "institute", "noun,inanimate"),
    ("කන්තෝරුව", "office", "noun,inanimate"),
    ("පාසල", "school", "noun,inanimate"),
    ("රෝහල", "hospital", "noun,inanimate"),
]

GLOSSARY = [
    ("ඉඩම් ප්‍රතිසංස්කරණ කොමිෂන් සභාව", "Land Reform Commission"),
    ("මහ බැංකුව", "Central Bank"),
    ("අධ්‍යාපන අමාත්‍යාංශය", "Education Ministry"),
    ("මිනින්දෝරු දෙපාර්තමේන්තුව", "Survey Department"),
    ("ජාතික ලේඛනාරක්ෂක දෙපාර්තමේන්තුව", "National Archives Department"),
    ("රාජ්‍ය භාෂා කොමිෂන් සභාව", "Official Languages Commission"),
]

# Function words; the dictionary glosses deliberately differ from the corpus usage.
FUNCTION_WORDS = [
    ("මම", "me", "pron"), ("ඔහු", "him", "pron"), ("අපි", "us", "pron"),
    ("ගෙදර", "house", "noun,inanimate"), ("ආවා", "arrived", "verb"), ("වැඩ", "job", "noun"),
    ("කළා", "did", "verb"), ("දැක්කා", "noticed", "verb"), ("පොත", "volume", "noun,inanimate"),
    ("දුන්නා", "offered", "verb"), ("කතා", "talk", "noun"), ("ලොකුයි", "large", "adj"),
    ("මුදල්", "cash", "noun"), ("ගත්තා", "received", "verb"), ("ලිපියක්", "note", "noun"),
]

UNUSED_WORDS = [
    ("පුටුව", "chair", "noun,inanimate"), ("මේසය", "table", "noun,inanimate"),
    ("ගස", "tree", "noun,inanimate"), ("කඳුර", "stream", "noun,inanimate"),
    ("ඇස", "eye", "noun,inanimate"), ("ඉර", "sun", "noun,inanimate"),
    ("හඳ", "moon", "noun,inanimate"), ("දොර", "door", "noun,inanimate"),
    ("කොළ", "leaf", "noun,inanimate"), ("පාර", "road", "noun,inanimate"),
]

# (case, definiteness, Sinhala pattern, English pattern); {N} / {n} are the noun phrases.
ANIMATE_TEMPLATES = [
    ("nominative", "definite", "{N} ගෙදර ආවා", "{n} came home"),
    ("nominative", "indefinite", "{N} ගෙදර ආවා", "{n} came home"),
    ("nominative", "definite", "{N} වැඩ කළා", "{n} worked"),
    ("accusative", "definite", "මම {N} දැක්කා", "i saw {n}"),
    ("accusative", "indefinite", "මම {N} දැක්කා", "i saw {n}"),
    ("dative", "definite", "මම {N} පොත දුන්නා", "i gave the book {n}"),
    ("dative", "indefinite", "ඔහු {N} කතා කළා", "he spoke {n}"),
    ("genitive", "definite", "{N} ගෙදර ලොකුයි", "{n} house is big"),
    ("genitive", "indefinite", "{N} ගෙදර ලොකුයි", "{n} house is big"),
    ("instrumental", "definite", "මම {N} මුදල් ගත්තා", "i took money {n}"),
    ("instrumental", "indefinite", "අපි {N} මුදල් ගත්තා", "we took money {n}"),
]

INANIMATE_TEMPLATES = [
    ("nominative", "definite", "{N} ලොකුයි", "{n} is big"),
    ("dative", "definite", "මම {N} ලිපියක් දුන්නා", "i gave a letter {n}"),
    ("instrumental", "definite", "මම {N} ලිපියක් ගත්තා", "i took a letter {n}"),
    ("genitive", "definite", "{N} නිලධාරියා ආවා", "the officer {n} came"),
]

FILLERS = [
    ("මම ගෙදර ආවා", "i came home"),
    ("ඔහු ගෙදර ආවා", "he came home"),
    ("අපි ගෙදර ආවා", "we came home"),
    ("මම වැඩ කළා", "i worked"),
    ("ඔහු වැඩ කළා", "he worked"),
    ("අපි වැඩ කළා", "we worked"),
    ("මම පොත දුන්නා", "i gave the book"),
    ("ඔහු මුදල් ගත්තා", "he took money"),
    ("අපි කතා කළා", "we spoke"),
    ("ගෙදර ලොකුයි", "the house is big"),
]


def _entry(si, en, flags, kind="dictionary"):
    return LexiconEntry(tuple(tokenize(si)), tuple(tokenize(en)), kind,
                        {f for f in flags.split(",") if f})


def _render(noun, template, paradigms):
    case, definiteness, si_pat, en_pat = template
    entry = noun if isinstance(noun, LexiconEntry) else _entry(*noun)
    paradigm = select_paradigm(entry, paradigms, require_noun=False)
    cell = inflection_cells(entry, paradigm)[(case, definiteness)]
    si = si_pat.replace("{N}", " ".join(cell.source_term))
    en = en_pat.replace("{n}", " ".join(cell.target_term))
    return " ".join(tokenize(si)), " ".join(tokenize(en))


def _glossary_entry(si, en):
    return LexiconEntry(tuple(tokenize(si)), tuple(tokenize(en)), "glossary", {"noun", "inanimate"})


def build(seed: int = 13):
    """Return a dict of file name -> list of lines."""
    rng = random.Random(seed)
    paradigms = default_paradigms()

    train = []
    for noun in TRAIN_NOUNS:
        for template in ANIMATE_TEMPLATES:
            train.append(_render(noun, template, paradigms))
    for place in TRAIN_PLACES:
        for template in INANIMATE_TEMPLATES:
            train.append(_render(place, template, paradigms))
    train.extend(FILLERS)
    while len(train) < 200:
        noun = rng.choice(TRAIN_NOUNS)
        train.append(_render(noun, rng.choice(ANIMATE_TEMPLATES), paradigms))

    dev = []
    for _ in range(30):
        if rng.random() < 0.8:
            dev.append(_render(rng.choice(TRAIN_NOUNS), rng.choice(ANIMATE_TEMPLATES), paradigms))
        else:
            dev.append(_render(rng.choice(TRAIN_PLACES), rng.choice(INANIMATE_TEMPLATES), paradigms))

    test = []
    base_forms = [t for t in ANIMATE_TEMPLATES if t[1] == "definite" and t[0] in ("nominative", "accusative")]
    for i, noun in enumerate(LEXICON_NOUNS):
        test.append(_render(noun, base_forms[i % len(base_forms)], paradigms))
    while len(test) < 40:
        test.append(_render(rng.choice(LEXICON_NOUNS), rng.choice(ANIMATE_TEMPLATES), paradigms))
    for si, en in GLOSSARY[:5]:
        test.append(_render(_glossary_entry(si, en), rng.choice(INANIMATE_TEMPLATES), paradigms))
    while len(test) < 50:
        test.append(_render(rng.choice(TRAIN_NOUNS), rng.choice(ANIMATE_TEMPLATES), paradigms))

    dictionary = [_entry(*row) for row in LEXICON_NOUNS + TRAIN_NOUNS + FUNCTION_WORDS + UNUSED_WORDS]
    glossary = [_glossary_entry(si, en) for si, en in GLOSSARY]

    files = {
        "train.si": [s for s, _ in train], "train.en": [e for _, e in train],
        "dev.si": [s for s, _ in dev], "dev.en": [e for _, e in dev],
        "test.si": [s for s, _ in test], "test.en": [e for _, e in test],
        "dictionary.tsv": [format_lexicon_entry(e) for e in dictionary],
        "glossary.tsv": [format_lexicon_entry(e) for e in glossary],
    }
    for config_id, text in experiment_configs().items():
        files[f"{config_id}.ini"] = text.splitlines()
    return files


# Sinhala-English experiment matrix.
MATRIX = {
    "A1": dict(lists=[], augment=[], filter="off"),
    "A2": dict(lists=["dictionary"], augment=[], filter="off"),
    "A3": dict(lists=["dictionary"], augment=["dictionary"], filter="off"),
    "A4": dict(lists=["glossary"], augment=[], filter="off"),
    "A5": dict(lists=["glossary"], augment=["glossary"], filter="off"),
    "A6": dict(lists=["dictionary", "glossary"], augment=["dictionary"], filter="off"),
    "A7": dict(lists=["dictionary", "glossary"], augment=["dictionary"], filter="token"),
}


def experiment_configs(direction: str = "si-en", seed: int = 7, tune_overrides: str = "") -> dict[str, str]:
    configs = {}
    for config_id, setup in MATRIX.items():
        lines = [
            "[experiment]", f"id = {config_id}", f"direction = {direction}", f"seed = {seed}", "",
            "[corpus]", "train = train", "dev = dev", "test = test", "",
            "[lists]",
        ]
        for name in setup["lists"]:
            lines.append(f"{name} = {name}.tsv")
        lines.append(f"augment = {','.join(setup['augment']) or 'none'}")
        lines.append(f"filter = {setup['filter']}")
        lines += ["", "[train]", "model1_iterations = 5", "max_phrase_len = 7", "lm_order = 3", "",
                  "[decode]", "stack_size = 50", "distortion_limit = 6", "table_limit = 10", "",
                  "[tune]", "nbest = 50", "max_iterations = 4", "restarts = 2"]
        if tune_overrides:
            lines.append(tune_overrides)
        configs[config_id] = "\n".join(lines) + "\n"
    return configs


def write(directory, seed: int = 13) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, lines in build(seed).items():
        path = directory / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written

"""Configuration and staged execution of one translation experiment.

A run directory holds one subdirectory per stage.  Every stage reads its
inputs from files written by earlier stages, so any stage can be re-run on
its own once its inputs exist.
"""

from __future__ import annotations

import configparser
import hashlib
import logging
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .align import (TranslationTable, read_alignments, symmetrized_alignments, train_model1,
                    write_alignments)
from .decoder import DecodeParams, Decoder, FeatureWeights, FEATURES
from .lexicon import FILTER_MODES, filter_list, integrate
from .lm import NGramModel, train_lm
from .metrics import REPORT_HEADER, bleu, oov_count, report_row
from .morphgen import augment_lexicon, default_paradigms, read_lexicon, read_paradigms, write_lexicon
from .phrase import PhraseTable, build_phrase_table
from .textprep import (SentencePair, TruecaseModel, build_vocab, clean, read_lines, read_parallel,
                       tokenize, truecase, violates_clean, write_lines, write_parallel)
from .tune import MertParams, mert

log = logging.getLogger(__name__)

LANGS = ("si", "ta", "en")
DIRECTIONS = ("si-en", "en-si", "ta-en", "en-ta")
LIST_NAMES = ("dictionary", "glossary")
STAGES = ("clean", "lists", "align", "phrases", "lm", "tune", "decode", "eval")
STAGE_DIRS = {name: f"{i:02d}_{name}" for i, name in enumerate(STAGES, 1)}


class ConfigError(ValueError):
    pass


def _require(path: Path, what: str) -> Path:
    if not path.is_file():
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


@dataclass
class ExperimentConfig:
    config_id: str
    direction: str
    base_dir: Path
    train: str
    dev: str
    test: str
    seed: int = 1
    lists: dict = field(default_factory=dict)  # name -> path
    augment: tuple = ()
    filter: str = "off"
    paradigms: Path | None = None
    max_len: int = 80
    max_ratio: float = 9.0
    model1_iterations: int = 5
    max_phrase_len: int = 7
    lm_order: int = 3
    decode: DecodeParams = field(default_factory=DecodeParams)
    tune: MertParams = field(default_factory=MertParams)
    digest: str = ""

    @property
    def source_lang(self) -> str:
        return self.direction.split("-")[0]

    @property
    def target_lang(self) -> str:
        return self.direction.split("-")[1]

    def corpus_files(self, split: str) -> tuple[Path, Path]:
        prefix = getattr(self, split)
        src = self.base_dir / f"{prefix}.{self.source_lang}"
        tgt = self.base_dir / f"{prefix}.{self.target_lang}"
        return src, tgt

    def validate(self):
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}, not {self.direction!r}")
        if self.filter not in ("off",) + FILTER_MODES:
            raise ConfigError(f"filter must be off, token or phrase, not {self.filter!r}")
        if self.filter != "off" and not self.lists:
            raise ConfigError("filter is set but no bilingual list is configured")
        for name in self.augment:
            if name not in self.lists:
                raise ConfigError(f"augment names list {name!r}, which is not configured")
        for name in self.lists:
            if name not in LIST_NAMES:
                raise ConfigError(f"unknown list {name!r}; expected one of {LIST_NAMES}")
        for split in ("train", "dev", "test"):
            for path in self.corpus_files(split):
                _require(path, f"{split} corpus file")
        for name, path in self.lists.items():
            _require(path, f"{name} list")
        if self.paradigms is not None:
            _require(self.paradigms, "paradigm file")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        raw = _require(path, "config file").read_bytes()
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            parser.read_string(raw.decode("utf-8"), source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        base = path.parent

        def get(section, key, default=None, conv=str):
            if not parser.has_option(section, key):
                if default is None:
                    raise ConfigError(f"{path}: missing [{section}] {key}")
                return default
            value = parser.get(section, key)
            try:
                return conv(value)
            except ValueError:
                raise ConfigError(f"{path}: bad value for [{section}] {key}: {value!r}") from None

        lists = {}
        if parser.has_section("lists"):
            for name in LIST_NAMES:
                if parser.has_option("lists", name):
                    lists[name] = base / parser.get("lists", name)
        augment_raw = get("lists", "augment", "none") if parser.has_section("lists") else "none"
        if augment_raw.strip() in ("none", ""):
            augment = ()
        elif augment_raw.strip() == "all":
            augment = tuple(lists)
        else:
            augment = tuple(a.strip() for a in augment_raw.split(",") if a.strip())
        paradigms = None
        if parser.has_section("lists") and parser.has_option("lists", "paradigms"):
            paradigms = base / parser.get("lists", "paradigms")

        d = DecodeParams()
        t = MertParams()
        seed = get("experiment", "seed", 1, int)
        config = cls(
            config_id=get("experiment", "id"),
            direction=get("experiment", "direction"),
            base_dir=base,
            train=get("corpus", "train"),
            dev=get("corpus", "dev"),
            test=get("corpus", "test"),
            seed=seed,
            lists=lists,
            augment=augment,
            filter=get("lists", "filter", "off") if parser.has_section("lists") else "off",
            paradigms=paradigms,
            max_len=get("train", "max_len", 80, int),
            max_ratio=get("train", "max_ratio", 9.0, float),
            model1_iterations=get("train", "model1_iterations", 5, int),
            max_phrase_len=get("train", "max_phrase_len", 7, int),
            lm_order=get("train", "lm_order", 3, int),
            decode=DecodeParams(
                stack_size=get("decode", "stack_size", d.stack_size, int),
                distortion_limit=get("decode", "distortion_limit", d.distortion_limit, int),
                table_limit=get("decode", "table_limit", d.table_limit, int),
            ),
            tune=MertParams(
                nbest=get("tune", "nbest", t.nbest, int),
                max_iterations=get("tune", "max_iterations", t.max_iterations, int),
                restarts=get("tune", "restarts", t.restarts, int),
                seed=seed,
            ),
            digest=hashlib.sha256(raw).hexdigest(),
        )
        config.validate()
        return config


def stage_dir(run_dir, stage: str) -> Path:
    return Path(run_dir) / STAGE_DIRS[stage]


def _prep(lines, lang, model=None):
    out = []
    for line in lines:
        tokens = tokenize(line, lang)
        if model is not None:
            tokens = truecase(tokens, model, lang)
        out.append(tokens)
    return out


# -- stages -----------------------------------------------------------------

def run_clean(cfg: ExperimentConfig, run_dir, jobs=1):
    out = stage_dir(run_dir, "clean")
    out.mkdir(parents=True, exist_ok=True)
    raw = {}
    for split in ("train", "dev", "test"):
        src_path, tgt_path = cfg.corpus_files(split)
        src, tgt = read_lines(src_path), read_lines(tgt_path)
        if len(src) != len(tgt):
            raise ValueError(f"{src_path} has {len(src)} lines but {tgt_path} has {len(tgt)}")
        raw[split] = (src, tgt)

    # the truecaser is trained on the tokenized English training side
    en_side = 0 if cfg.source_lang == "en" else 1
    model = TruecaseModel.train(_prep(raw["train"][en_side], "en"))
    model.write(out / "truecase.en")

    langs = (cfg.source_lang, cfg.target_lang)
    summary = []
    for split, (src, tgt) in raw.items():
        sides = [_prep(lines, lang, model) for lines, lang in zip((src, tgt), langs)]
        pairs = [SentencePair(s, t) for s, t in zip(*sides)]
        if split == "train":
            kept = clean(pairs, cfg.max_len, cfg.max_ratio)
            reasons = [violates_clean(p, cfg.max_len, cfg.max_ratio) for p in pairs]
            summary.append(f"train\t{len(pairs)}\t{len(kept)}\t" +
                           ",".join(f"{r}={reasons.count(r)}" for r in sorted({r for r in reasons if r})))
            pairs = kept
        else:
            summary.append(f"{split}\t{len(pairs)}\t{len(pairs)}\t")
        write_parallel(pairs, out / f"{split}.src", out / f"{split}.tgt")
    write_lines(out / "summary.tsv", ["split\tinput\tkept\tdropped"] + summary)


def run_lists(cfg: ExperimentConfig, run_dir, jobs=1):
    out = stage_dir(run_dir, "lists")
    out.mkdir(parents=True, exist_ok=True)
    clean_dir = stage_dir(run_dir, "clean")
    train = read_parallel(clean_dir / "train.src", clean_dir / "train.tgt")
    paradigms = read_paradigms(cfg.paradigms) if cfg.paradigms else default_paradigms()
    vocab = build_vocab(train, "source")
    sentences = [p.source for p in train]

    summary = ["list\tentries\tafter_augment\tafter_filter"]
    integrated = []
    for name, path in cfg.lists.items():
        entries = read_lexicon(path)
        count = len(entries)
        augmented = entries
        if name in cfg.augment:
            augmented, report = augment_lexicon(entries, paradigms)
            write_lexicon(out / f"{name}.augmented.tsv", augmented)
            log.info("%s: %d seeds, %d generated", name, report.seeds, report.generated)
        if cfg.source_lang == "en":
            augmented = [e.swapped() for e in augmented]
        kept = augmented
        if cfg.filter != "off":
            kept, report = filter_list(augmented, vocab, cfg.filter, sentences)
            report.write_tsv(out / f"{name}.filter.tsv")
        write_lexicon(out / f"{name}.used.tsv", kept)
        summary.append(f"{name}\t{count}\t{len(augmented)}\t{len(kept)}")
        integrated.extend(kept)

    pairs = integrate(train, integrated)
    write_parallel(pairs, out / "train.src", out / "train.tgt")
    write_lines(out / "train.origin", [p.origin for p in pairs])
    write_lines(out / "summary.tsv", summary)


def _read_integrated(run_dir):
    d = stage_dir(run_dir, "lists")
    src, tgt = read_lines(d / "train.src"), read_lines(d / "train.tgt")
    origins = read_lines(d / "train.origin")
    return [SentencePair(s.split(), t.split(), o) for s, t, o in zip(src, tgt, origins)]


def run_align(cfg: ExperimentConfig, run_dir, jobs=1):
    out = stage_dir(run_dir, "align")
    out.mkdir(parents=True, exist_ok=True)
    pairs = _read_integrated(run_dir)
    fwd_table = train_model1(pairs, cfg.model1_iterations)
    rev_table = train_model1([p.swapped() for p in pairs], cfg.model1_iterations)
    fwd_table.write(out / "fwd.ttable")
    rev_table.write(out / "rev.ttable")
    triples = symmetrized_alignments(pairs, fwd_table, rev_table)
    fwd, rev, sym = ([t[k] for t in triples] for k in range(3))
    write_alignments(out / "fwd.align", fwd)
    write_alignments(out / "rev.align", rev)
    write_alignments(out / "sym.align", sym)
    write_lines(out / "loglik.tsv", ["iteration\tforward\treverse"] + [
        f"{i}\t{a:.6f}\t{b:.6f}"
        for i, (a, b) in enumerate(zip(fwd_table.log_likelihoods, rev_table.log_likelihoods))])


def run_phrases(cfg: ExperimentConfig, run_dir, jobs=1):
    out = stage_dir(run_dir, "phrases")
    out.mkdir(parents=True, exist_ok=True)
    align_dir = stage_dir(run_dir, "align")
    pairs = _read_integrated(run_dir)
    sym = read_alignments(align_dir / "sym.align")
    if len(sym) != len(pairs):
        raise ValueError(f"{align_dir / 'sym.align'} has {len(sym)} lines for {len(pairs)} sentence pairs")
    table = build_phrase_table(pairs, sym, TranslationTable.read(align_dir / "fwd.ttable"),
                               TranslationTable.read(align_dir / "rev.ttable"), cfg.max_phrase_len)
    table.write(out / "phrase-table.txt")


def run_lm(cfg: ExperimentConfig, run_dir, jobs=1):
    out = stage_dir(run_dir, "lm")
    out.mkdir(parents=True, exist_ok=True)
    corpus = [line.split() for line in read_lines(stage_dir(run_dir, "clean") / "train.tgt")]
    train_lm(corpus, cfg.lm_order).write_arpa(out / "lm.arpa")


# Worker state for parallel decoding; loaded once per process.
_WORKER: dict = {}


def _init_worker(table_path, lm_path, params):
    _WORKER["table"] = PhraseTable.read(table_path)
    _WORKER["lm"] = NGramModel.read_arpa(lm_path)
    _WORKER["params"] = params


def _decode_one(job):
    source, weights, n = job
    decoder = Decoder(_WORKER["table"], _WORKER["lm"], FeatureWeights.from_vector(weights), _WORKER["params"])
    return decoder.nbest(source, n)


class BatchDecoder:
    """Decode lists of sentences, optionally across worker processes."""

    def __init__(self, table_path, lm_path, params: DecodeParams, jobs: int = 1):
        self.jobs = max(1, jobs)
        self.args = (str(table_path), str(lm_path), params)
        self._pool = None
        if self.jobs == 1:
            _init_worker(*self.args)
            self._state = dict(_WORKER)

    def __enter__(self):
        if self.jobs > 1:
            self._pool = ProcessPoolExecutor(self.jobs, initializer=_init_worker, initargs=self.args)
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()

    def __call__(self, sources, weights: FeatureWeights, n: int = 1):
        jobs = [(list(s), weights.vector(), n) for s in sources]
        if self._pool is not None:
            return list(self._pool.map(_decode_one, jobs, chunksize=max(1, len(jobs) // (4 * self.jobs))))
        _WORKER.update(self._state)
        return [_decode_one(job) for job in jobs]


def _model_paths(run_dir):
    return (stage_dir(run_dir, "phrases") / "phrase-table.txt", stage_dir(run_dir, "lm") / "lm.arpa")


def run_tune(cfg: ExperimentConfig, run_dir, jobs=1):
    out = stage_dir(run_dir, "tune")
    out.mkdir(parents=True, exist_ok=True)
    clean_dir = stage_dir(run_dir, "clean")
    dev = read_parallel(clean_dir / "dev.src", clean_dir / "dev.tgt")
    table_path, lm_path = _model_paths(run_dir)
    with BatchDecoder(_require(table_path, "phrase table"), _require(lm_path, "language model"),
                      cfg.decode, jobs) as batch:
        result = mert([p.source for p in dev], [p.target for p in dev], FeatureWeights(), batch, cfg.tune)
    result.weights.write(out / "weights.txt")
    result.write_trace(out / "trace.tsv")


def run_decode(cfg: ExperimentConfig, run_dir, jobs=1):
    out = stage_dir(run_dir, "decode")
    out.mkdir(parents=True, exist_ok=True)
    sources = [line.split() for line in read_lines(stage_dir(run_dir, "clean") / "test.src")]
    weights = FeatureWeights.read(_require(stage_dir(run_dir, "tune") / "weights.txt", "tuned weights"))
    table_path, lm_path = _model_paths(run_dir)
    with BatchDecoder(table_path, lm_path, cfg.decode, jobs) as batch:
        results = [nb[0] for nb in batch(sources, weights, 1)]
    write_lines(out / "test.out", [t.text for t in results])
    write_lines(out / "test.oov", [" ".join(tok for tok, oov in zip(t.tokens, t.oov) if oov) for t in results])


def run_eval(cfg: ExperimentConfig, run_dir, jobs=1):
    out = stage_dir(run_dir, "eval")
    out.mkdir(parents=True, exist_ok=True)
    clean_dir = stage_dir(run_dir, "clean")
    hyps = [line.split() for line in read_lines(stage_dir(run_dir, "decode") / "test.out")]
    refs = [line.split() for line in read_lines(clean_dir / "test.tgt")]
    sources = [line.split() for line in read_lines(clean_dir / "test.src")]
    table = PhraseTable.read(_model_paths(run_dir)[0])
    result = bleu(hyps, refs)
    row = report_row(cfg.config_id, cfg.direction, result,
                     oov_count(sources, table, "tokens"), oov_count(sources, table, "types"))
    write_lines(out / "scores.tsv", [REPORT_HEADER, row])
    write_lines(out / "bleu.txt", [
        f"bleu\t{result.score:.6f}",
        "precisions\t" + " ".join(f"{p:.6f}" for p in result.precisions),
        f"brevity_penalty\t{result.brevity_penalty:.6f}",
        f"hyp_len\t{result.hyp_len}",
        f"ref_len\t{result.ref_len}",
    ])
    return row


RUNNERS = {
    "clean": run_clean, "lists": run_lists, "align": run_align, "phrases": run_phrases,
    "lm": run_lm, "tune": run_tune, "decode": run_decode, "eval": run_eval,
}


def write_manifest(cfg: ExperimentConfig, run_dir, stages):
    lines = [
        f"config_id\t{cfg.config_id}",
        f"config_sha256\t{cfg.digest}",
        f"seed\t{cfg.seed}",
        f"direction\t{cfg.direction}",
        f"lexsmt\t{__version__}",
        f"python\t{platform.python_version()}",
        "stages\t" + ",".join(stages),
        "features\t" + ",".join(FEATURES),
    ]
    write_lines(Path(run_dir) / "manifest.txt", lines)


def run_pipeline(cfg: ExperimentConfig, run_dir, stages=None, jobs: int = 1) -> str | None:
    """Run the named stages (all by default) in order; return the score row if evaluated."""
    stages = list(stages or STAGES)
    for name in stages:
        if name not in RUNNERS:
            raise ConfigError(f"unknown stage {name!r}; expected one of {STAGES}")
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(cfg, run_dir, stages)
    row = None
    for name in STAGES:
        if name in stages:
            log.info("[%s] stage %s", cfg.config_id, name)
            result = RUNNERS[name](cfg, run_dir, jobs)
            if name == "eval":
                row = result
    return row


def run_experiments(config_paths, out_dir, jobs: int = 1, report=None) -> list[str]:
    """Run each config in its own run directory and write a combined score report."""
    out_dir = Path(out_dir)
    configs = [ExperimentConfig.load(p) for p in config_paths]
    rows = []
    for cfg in configs:
        rows.append(run_pipeline(cfg, out_dir / cfg.config_id, jobs=jobs))
    write_lines(Path(report) if report else out_dir / "report.tsv", [REPORT_HEADER] + rows)
    return rows


def default_jobs() -> int:
    return os.cpu_count() or 1

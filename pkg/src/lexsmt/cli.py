"""Command-line interface: one subcommand per pipeline step plus experiment runners."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, fixtures
from .align import (TranslationTable, read_alignments, symmetrized_alignments, train_model1,
                    write_alignments)
from .decoder import DecodeParams, FeatureWeights, format_nbest
from .errors import FormatError
from .lexicon import FILTER_MODES, filter_list
from .lm import train_lm
from .metrics import OOV_MODES, bleu, oov_count
from .morphgen import augment_lexicon, default_paradigms, read_lexicon, read_paradigms, write_lexicon
from .phrase import MAX_PHRASE_LEN, PhraseTable, build_phrase_table
from .pipeline import (STAGES, BatchDecoder, ConfigError, ExperimentConfig, run_experiments,
                       run_pipeline)
from .textprep import (TruecaseModel, build_vocab, clean, read_lines, read_parallel, tokenize,
                       truecase, write_lines, write_parallel)
from .tune import MertParams, mert

log = logging.getLogger("lexsmt")


def _exists(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return path


def _read_tokens(path):
    return [line.split() for line in read_lines(_exists(path))]


def _output(lines, path):
    if path:
        write_lines(path, lines)
    else:
        for line in lines:
            print(line)


def cmd_tokenize(args):
    model = TruecaseModel.read(_exists(args.truecase_model)) if args.truecase_model else None
    source = read_lines(_exists(args.input)) if args.input else [line.rstrip("\n") for line in sys.stdin]
    out = []
    for line in source:
        tokens = tokenize(line, args.lang)
        if model is not None:
            tokens = truecase(tokens, model, args.lang)
        out.append(" ".join(tokens))
    _output(out, args.output)
    if args.train_truecase:
        TruecaseModel.train(line.split() for line in out).write(args.train_truecase)


def cmd_clean(args):
    pairs = read_parallel(_exists(args.src), _exists(args.tgt))
    kept = clean(pairs, args.max_len, args.max_ratio)
    write_parallel(kept, args.out_src, args.out_tgt)
    print(f"kept {len(kept)} of {len(pairs)} pairs")


def cmd_augment(args):
    paradigms = read_paradigms(_exists(args.paradigms)) if args.paradigms else default_paradigms()
    entries = read_lexicon(_exists(args.input))
    augmented, report = augment_lexicon(entries, paradigms)
    write_lexicon(args.output, augmented)
    print(f"entries before\t{len(entries)}")
    print(f"entries after\t{len(augmented)}")
    print(f"seeds inflected\t{report.seeds_matched} of {report.seeds}")
    print(f"generated\t{report.generated}")
    print(f"duplicates skipped\t{report.collisions}")
    for reason, count in sorted(report.skipped.items()):
        print(f"skipped {reason}\t{count}")


def cmd_filter(args):
    entries = read_lexicon(_exists(args.input))
    sentences = _read_tokens(args.corpus)
    vocab = build_vocab([], "source")
    for sent in sentences:
        vocab.counts.update(sent)
    kept, report = filter_list(entries, vocab, args.mode, sentences)
    if args.output:
        write_lexicon(args.output, kept)
    if args.report:
        report.write_tsv(args.report)
    print(f"kept\t{report.kept}")
    print(f"removed\t{report.removed}")
    for reason, count in sorted(report.reasons().items()):
        print(f"{reason}\t{count}")


def cmd_train_lm(args):
    model = train_lm(_read_tokens(args.input), args.order)
    model.write_arpa(args.output)


def cmd_align(args):
    pairs = read_parallel(_exists(args.src), _exists(args.tgt))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fwd_table = train_model1(pairs, args.iterations)
    rev_table = train_model1([p.swapped() for p in pairs], args.iterations)
    fwd_table.write(out / "fwd.ttable")
    rev_table.write(out / "rev.ttable")
    triples = symmetrized_alignments(pairs, fwd_table, rev_table)
    for k, name in enumerate(("fwd", "rev", "sym")):
        write_alignments(out / f"{name}.align", [t[k] for t in triples])


def cmd_phrases(args):
    pairs = read_parallel(_exists(args.src), _exists(args.tgt))
    align_dir = Path(args.align_dir)
    links = read_alignments(_exists(align_dir / "sym.align"))
    if len(links) != len(pairs):
        raise ValueError(f"{align_dir / 'sym.align'} has {len(links)} lines for {len(pairs)} sentence pairs")
    table = build_phrase_table(pairs, links, TranslationTable.read(_exists(align_dir / "fwd.ttable")),
                               TranslationTable.read(_exists(align_dir / "rev.ttable")), args.max_len)
    table.write(args.output)


def _decode_params(args) -> DecodeParams:
    return DecodeParams(args.stack_size, args.distortion_limit, args.table_limit)


def cmd_tune(args):
    sources = _read_tokens(args.src)
    refs = _read_tokens(args.ref)
    params = MertParams(nbest=args.nbest, max_iterations=args.iterations, restarts=args.restarts, seed=args.seed)
    with BatchDecoder(_exists(args.table), _exists(args.lm), _decode_params(args), args.jobs) as batch:
        result = mert(sources, refs, FeatureWeights(), batch, params)
    result.weights.write(args.output)
    if args.trace:
        result.write_trace(args.trace)


def cmd_translate(args):
    sources = _read_tokens(args.input)
    weights = FeatureWeights.read(_exists(args.weights)) if args.weights else FeatureWeights()
    with BatchDecoder(_exists(args.table), _exists(args.lm), _decode_params(args), args.jobs) as batch:
        lists = batch(sources, weights, args.nbest)
    _output([nb[0].text for nb in lists], args.output)
    flags = []
    for nb in lists:
        best = nb[0]
        flags.append(" ".join(f"{i}:{tok}" for i, (tok, oov) in enumerate(zip(best.tokens, best.oov)) if oov))
    if args.oov_out:
        write_lines(args.oov_out, flags)
    else:
        total = sum(nb[0].oov_count for nb in lists)
        print(f"oov passthrough tokens: {total}", file=sys.stderr)
    if args.nbest_out:
        lines = []
        for i, nb in enumerate(lists):
            lines.extend(format_nbest(i, nb))
        write_lines(args.nbest_out, lines)


def cmd_evaluate(args):
    hyps = _read_tokens(args.hyp)
    refs = _read_tokens(args.ref)
    result = bleu(hyps, refs)
    print(f"BLEU\t{result.x100:.2f}")
    print("precisions\t" + " ".join(f"{p:.4f}" for p in result.precisions))
    print(f"brevity_penalty\t{result.brevity_penalty:.4f}")
    if args.src and args.table:
        table = PhraseTable.read(_exists(args.table))
        sources = _read_tokens(args.src)
        for mode in OOV_MODES:
            print(f"oov_{mode}\t{oov_count(sources, table, mode)}")


def cmd_run(args):
    cfg = ExperimentConfig.load(args.config)
    run_dir = args.run_dir or Path(args.config).with_suffix("").name + ".run"
    stages = None
    if args.stages:
        stages = [s.strip() for s in args.stages.split(",") if s.strip()]
    elif args.from_stage:
        stages = list(STAGES[STAGES.index(args.from_stage):])
    row = run_pipeline(cfg, run_dir, stages, args.jobs)
    if row:
        print(row)


def cmd_experiment(args):
    rows = run_experiments(args.configs, args.out_dir, args.jobs, args.report)
    for row in rows:
        print(row)


def cmd_make_fixtures(args):
    for path in fixtures.write(args.out_dir, args.seed):
        log.info("wrote %s", path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexsmt", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def decode_flags(p):
        d = DecodeParams()
        p.add_argument("--stack-size", type=int, default=d.stack_size)
        p.add_argument("--distortion-limit", type=int, default=d.distortion_limit)
        p.add_argument("--table-limit", type=int, default=d.table_limit)
        p.add_argument("--jobs", type=int, default=1, help="decoding worker processes")

    p = sub.add_parser("tokenize", help="tokenize (and optionally truecase) text")
    p.add_argument("--lang", required=True, choices=("si", "ta", "en"))
    p.add_argument("--in", dest="input", help="input file (default stdin)")
    p.add_argument("--out", dest="output", help="output file (default stdout)")
    p.add_argument("--truecase-model", help="apply this truecasing model")
    p.add_argument("--train-truecase", metavar="PATH", help="train a truecasing model on the output")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("clean", help="drop empty, overlong and badly proportioned sentence pairs")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--out-src", required=True)
    p.add_argument("--out-tgt", required=True)
    p.add_argument("--max-len", type=int, default=80)
    p.add_argument("--max-ratio", type=float, default=9.0)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("augment", help="add case-inflected forms of list entries")
    p.add_argument("--paradigms", help="paradigm file (default: shipped Sinhala paradigms)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("filter", help="remove list entries the training corpus already covers")
    p.add_argument("--mode", choices=FILTER_MODES, default="token")
    p.add_argument("--corpus", required=True, help="tokenized training source side")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output")
    p.add_argument("--report", help="write a per-entry kept/removed TSV")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("train-lm", help="train a Katz back-off n-gram model")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("align", help="Model 1 alignment in both directions plus symmetrization")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--iterations", type=int, default=5)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("phrases", help="extract and score a phrase table")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--align-dir", required=True, help="directory written by the align command")
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--max-len", type=int, default=MAX_PHRASE_LEN)
    p.set_defaults(func=cmd_phrases)

    p = sub.add_parser("tune", help="MERT on a development set")
    p.add_argument("--table", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--trace")
    p.add_argument("--nbest", type=int, default=100)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=1)
    decode_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("translate", help="decode tokenized input")
    p.add_argument("--table", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--weights")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output")
    p.add_argument("--oov-out", help="per line, the position:token of every passthrough")
    p.add_argument("--nbest", type=int, default=1)
    p.add_argument("--nbest-out")
    decode_flags(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("evaluate", help="corpus BLEU, plus OOV counts when --src and --table are given")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--src")
    p.add_argument("--table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="run the full pipeline for one experiment config")
    p.add_argument("config")
    p.add_argument("--run-dir")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--from-stage", choices=STAGES)
    group.add_argument("--stages", help="comma-separated stages to run")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run several configs and write one score report")
    p.add_argument("configs", nargs="+")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--report")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("make-fixtures", help="write the synthetic Sinhala-English fixture bundle")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=cmd_make_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"lexsmt: config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"lexsmt: error: file not found: {exc.filename}" if exc.filename else f"lexsmt: error: {exc}",
              file=sys.stderr)
        return 1
    except (FormatError, ValueError) as exc:
        print(f"lexsmt: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``termcon <subcommand> ...``.

Every subcommand streams stdin -> stdout when its input/output paths are
omitted.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

from . import __version__
from .annotate import AnnotationConfig, Scheme, annotate
from .combine import SystemOutput, combine
from .core import (
    Mode,
    format_sidecar_line,
    iter_lines,
    open_text,
    pretokenize,
    read_parallel,
    read_sidecar,
    tokenize,
)
from .lemma import LemmatizerSpec, get_lemmatizer
from .metrics import EvalConfig, EvalInstance, TermWeights, evaluate
from .pipeline import CleanStats, FilterConfig, clean, run_pipeline
from .sampler import SamplerConfig, build_ngram_pool, load_pool, sample_batch, save_pool
from .termbase import VariantPolicy, find_matches, load_termbase, matches_to_constraints

log = logging.getLogger("termcon")


def _lemmatizer(args) -> LemmatizerSpec:
    return LemmatizerSpec.parse(args.lemmatizer, lowercase=not args.case_sensitive_lemmas)


def _tokenizer(args):
    return pretokenize if getattr(args, "pretokenize", False) else tokenize


def _read_sentences(path, tok) -> list:
    with open_text(path) as fh:
        return [tok(line) for line in iter_lines(fh)]


def cmd_clean(args) -> int:
    cfg = FilterConfig(args.min_tokens, args.max_tokens, args.max_ratio, not args.no_dedup)
    stats = CleanStats()
    pairs = read_parallel(args.src, args.tgt, args.tsv)
    with open_text(args.out, "w") as out:
        for pair in clean(pairs, cfg, stats):
            out.write(" ".join(pair.source.surface) + "\t" + " ".join(pair.target.surface) + "\n")
    report = json.dumps(vars(stats), indent=2)
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as fh:
            fh.write(report + "\n")
    else:
        print(report, file=sys.stderr)
    return 0


def cmd_ngram_pool(args) -> int:
    with open_text(args.input) as fh:
        corpus = (tokenize(line.partition("\t")[2] if args.tsv else line) for line in iter_lines(fh))
        pool = build_ngram_pool(corpus, args.max_len, args.reservoir_size, args.seed)
    if args.out is None or args.out == "-":
        for k in sorted(pool.counts):
            sys.stdout.write(f"#count\t{k}\t{pool.counts[k]}\n")
        for k in sorted(pool.by_length):
            for gram in pool.by_length[k]:
                sys.stdout.write(f"{k}\t{' '.join(gram)}\n")
    else:
        save_pool(pool, args.out)
    return 0


def cmd_sample(args) -> int:
    cfg = SamplerConfig(
        s=args.s, e=args.e, n=args.n, v=args.v, l=args.l,
        tri_min=args.tri_min, tri_max=args.tri_max, tri_mode=args.tri_mode,
        seed=args.seed, shuffle_variants=args.shuffle_variants,
    )
    pool = load_pool(args.pool) if args.pool else None
    if cfg.v > 0 and pool is None:
        raise SystemExit("sample: --pool is required when --v > 0")
    with open_text(args.input) as fh:
        targets = [tokenize(line.partition("\t")[2] if args.tsv else line).surface for line in iter_lines(fh)]
    mode = Mode(args.mode)
    lem = get_lemmatizer(_lemmatizer(args)) if mode is Mode.LEMMA else None
    batch = 50000
    with open_text(args.out, "w") as out:
        for lo in range(0, len(targets), batch):
            chunk = targets[lo:lo + batch]
            results = sample_batch(chunk, list(range(lo, lo + len(chunk))), cfg, pool)
            for k, cons in enumerate(results):
                if lem is not None:
                    cons = [lem.constraint(c, restore_case=True) for c in cons]
                out.write(format_sidecar_line(lo + k, cons) + "\n")
    return 0


def _annotation_config(args) -> AnnotationConfig:
    return AnnotationConfig(Scheme(args.scheme), args.sep, args.cdelim, args.vdelim, Mode(args.mode))


def cmd_annotate(args) -> int:
    if (args.constraints is None) == (args.termbase is None):
        raise SystemExit("annotate: give exactly one of --constraints or --termbase")
    cfg = _annotation_config(args)
    spec = _lemmatizer(args)
    sentences = _read_sentences(args.input, _tokenizer(args))
    if args.termbase:
        tb = load_termbase(args.termbase, spec)
        lem = get_lemmatizer(spec)
        policy = VariantPolicy(args.variants)
        per_line = [
            matches_to_constraints(find_matches(lem.sentence(s), tb, spec), tb, cfg.mode, policy)
            for s in sentences
        ]
    else:
        per_line = read_sidecar(args.constraints, len(sentences), cfg.mode)
        if args.variants == VariantPolicy.FIRST_ONLY.value:
            per_line = [[type(c)(c.variants[:1], c.origin, c.mode, c.source_span) for c in cs] for cs in per_line]
    with open_text(args.out, "w") as out:
        for idx, (sent, cons) in enumerate(zip(sentences, per_line)):
            out.write(annotate(sent, cons, cfg, line_index=idx).to_line() + "\n")
    return 0


def cmd_match(args) -> int:
    spec = _lemmatizer(args)
    tb = load_termbase(args.termbase, spec)
    lem = get_lemmatizer(spec)
    with open_text(args.input) as fh, open_text(args.out, "w") as out:
        for idx, line in enumerate(iter_lines(fh)):
            sent = lem.sentence(_tokenizer(args)(line))
            for m in find_matches(sent, tb, spec):
                out.write(f"{idx}\t{m.entry_index}\t{m.span[0]}:{m.span[1]}\t{m.level.value}\n")
    return 0


def cmd_evaluate(args) -> int:
    tok = _tokenizer(args)
    hyps = _read_sentences(args.hyp, tok)
    refs = _read_sentences(args.ref, tok)
    srcs = _read_sentences(args.src, tok) if args.src else [tokenize("")] * len(hyps)
    if not (len(hyps) == len(refs) == len(srcs)):
        raise SystemExit("evaluate: --src, --hyp and --ref must have the same number of lines")
    terms = read_sidecar(args.terms, len(hyps)) if args.terms else [[] for _ in hyps]
    instances = [EvalInstance(s, h, r, tuple(t)) for s, h, r, t in zip(srcs, hyps, refs, terms)]
    cfg = EvalConfig(
        lemmatizer=_lemmatizer(args),
        weights=TermWeights(args.base_weight, args.term_weight),
        shift_cost=args.shift_cost,
        dedupe_terms=args.dedupe_terms,
    )
    report = evaluate(instances, cfg)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    print(json.dumps(report.summary(), indent=2))
    for w in report.warnings:
        log.warning(w)
    return 0


def _parse_systems(text: str):
    out = []
    for item in text.split(","):
        sid, sep, rest = item.partition("=")
        path, sep2, bleu = rest.rpartition(":")
        if not sep or not sep2 or not sid or not path:
            raise SystemExit(f"combine: bad system spec {item!r} (expected id=path:bleu)")
        out.append((sid, path, float(bleu)))
    return out


def cmd_combine(args) -> int:
    spec = _lemmatizer(args)
    systems = [
        SystemOutput(sid, bleu, tuple(_read_sentences(path, tokenize)))
        for sid, path, bleu in _parse_systems(args.systems)
    ]
    n = len(systems[0].translations)
    terms = read_sidecar(args.terms, n) if args.terms else [[] for _ in range(n)]
    chosen = combine(systems, args.baseline, terms, spec, partial=args.partial)
    with open_text(args.out, "w") as out:
        for _, sent in chosen:
            out.write(" ".join(sent.surface) + "\n")
    if args.provenance:
        with open(args.provenance, "w", encoding="utf-8") as fh:
            for idx, (sid, _) in enumerate(chosen):
                fh.write(f"{idx}\t{sid}\n")
    return 0


def cmd_pipeline(args) -> int:
    manifest = run_pipeline(args.config, jobs=args.jobs)
    print(json.dumps(manifest["stats"], indent=2))
    return 0


def _add_lemmatizer(p):
    p.add_argument("--lemmatizer", default="identity", help="identity | dict:<path>")
    p.add_argument("--case-sensitive-lemmas", action="store_true",
                   help="do not lowercase before lemma lookup")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="termcon", description="Terminology constraint toolkit.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--jobs", type=int, default=None, help="worker processes (pipeline)")
    ap.add_argument("--log-level", default="WARNING")
    # the global flags are also accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    common.add_argument("--log-level", default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)
    _add_parser = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add_parser(*a, parents=[common], **kw)

    p = sub.add_parser("clean", help="length/ratio filtering and deduplication")
    p.add_argument("--src")
    p.add_argument("--tgt")
    p.add_argument("--tsv", help="source<TAB>target input (default: stdin)")
    p.add_argument("--out", help="cleaned TSV output (default: stdout)")
    p.add_argument("--stats", help="write drop statistics JSON here (default: stderr)")
    p.add_argument("--min-tokens", type=int, default=1)
    p.add_argument("--max-tokens", type=int, default=100)
    p.add_argument("--max-ratio", type=float, default=9.0)
    p.add_argument("--no-dedup", action="store_true")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("ngram-pool", help="reservoir-sample target n-grams for decoy variants")
    p.add_argument("--input", help="target sentences, one per line (default: stdin)")
    p.add_argument("--tsv", action="store_true", help="input is source<TAB>target; use the target")
    p.add_argument("--max-len", type=int, default=9)
    p.add_argument("--reservoir-size", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ngram_pool)

    p = sub.add_parser("sample", help="sample synthetic constraints from target sentences")
    p.add_argument("--input")
    p.add_argument("--tsv", action="store_true", help="input is source<TAB>target; use the target")
    p.add_argument("--out", help="constraint sidecar (default: stdout)")
    p.add_argument("--pool")
    p.add_argument("--s", type=float, default=0.1, help="open probability")
    p.add_argument("--e", type=float, default=0.75, help="close probability")
    p.add_argument("--n", type=float, default=0.1, help="skip-sentence probability")
    p.add_argument("--v", type=float, default=0.1, help="decoy-variant probability")
    p.add_argument("--l", type=float, default=0.9, help="same-length decoy probability")
    p.add_argument("--tri-min", type=int, default=1)
    p.add_argument("--tri-max", type=int, default=9)
    p.add_argument("--tri-mode", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shuffle-variants", action="store_true")
    p.add_argument("--mode", choices=["surface", "lemma"], default="surface")
    _add_lemmatizer(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("annotate", help="annotate source sentences with constraints")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--constraints", help="per-line constraint sidecar")
    p.add_argument("--termbase", help="match this term base inline")
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="suffix")
    p.add_argument("--mode", choices=["surface", "lemma"], default="surface")
    p.add_argument("--variants", choices=["first", "all"], default="all")
    p.add_argument("--sep", default="<sep>")
    p.add_argument("--cdelim", default="<c>")
    p.add_argument("--vdelim", default="<v>")
    p.add_argument("--pretokenize", action="store_true", help="split leading/trailing punctuation")
    _add_lemmatizer(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("match", help="list term-base matches per sentence")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--termbase", required=True)
    p.add_argument("--pretokenize", action="store_true")
    _add_lemmatizer(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("evaluate", help="BLEU, exact match, window overlap and 1-TERm")
    p.add_argument("--src")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--terms", help="per-line expected-term sidecar")
    p.add_argument("--report", help="write the full JSON report here")
    p.add_argument("--term-weight", type=float, default=2.0)
    p.add_argument("--base-weight", type=float, default=1.0)
    p.add_argument("--shift-cost", type=float, default=1.0, help="in units of the base weight")
    p.add_argument("--dedupe-terms", action="store_true", help="count repeated terms once per line")
    p.add_argument("--pretokenize", action="store_true")
    _add_lemmatizer(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("combine", help="rank-based system combination")
    p.add_argument("--systems", required=True, help="id=path:bleu,id2=path:bleu,...")
    p.add_argument("--baseline", required=True)
    p.add_argument("--terms", help="per-line expected-term sidecar")
    p.add_argument("--out")
    p.add_argument("--provenance", help="write line<TAB>system_id here")
    p.add_argument("--partial", action="store_true", help="prefer most-terms-covered before fallback")
    _add_lemmatizer(p)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("pipeline", help="run clean -> pool -> sample -> annotate from a TOML config")
    p.add_argument("config")
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    for stream in (sys.stdin, sys.stdout):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`); not an error
        sys.stderr.close()
        return 0
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"termcon {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Corpus cleaning and the sharded clean -> pool -> sample -> annotate driver."""

from __future__ import annotations

import hashlib
import json
import logging
import sys
import zlib
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .annotate import AnnotationConfig, Scheme, annotate
from .core import Mode, SentencePair, format_sidecar_line, iter_lines, pretokenize, tokenize
from .lemma import LemmatizerSpec, get_lemmatizer
from .sampler import SamplerConfig, build_ngram_pool, load_pool, sample_batch, save_pool
from .termbase import TermBase, VariantPolicy, find_matches, load_termbase, matches_to_constraints

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

log = logging.getLogger(__name__)

DEFAULT_SHARD_SIZE = 20000


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    pass


# -- cleaning ------------------------------------------------------------------


@dataclass(frozen=True)
class FilterConfig:
    min_tokens: int = 1
    max_tokens: int = 100
    max_ratio: float = 9.0
    dedup: bool = True

    def __post_init__(self):
        if not 0 <= self.min_tokens <= self.max_tokens:
            raise ValueError("need 0 <= min_tokens <= max_tokens")
        if self.max_ratio < 1:
            raise ValueError("max_ratio must be >= 1")


@dataclass
class CleanStats:
    read: int = 0
    kept: int = 0
    too_short: int = 0
    too_long: int = 0
    ratio: int = 0
    duplicate: int = 0
    rejected_by_hook: int = 0
    hash_collisions: int = 0

    def merge(self, other: "CleanStats") -> "CleanStats":
        return CleanStats(*(a + b for a, b in zip(asdict(self).values(), asdict(other).values())))


class Deduplicator:
    """First-occurrence dedup keyed by a 128-bit hash of the pair.

    A CRC32 plus length is kept next to each hash; when a hash matches but the
    check value does not, the pair is a genuine collision and falls back to
    exact byte comparison.
    """

    def __init__(self):
        self._seen: Dict[int, int] = {}
        self._exact: set = set()
        self.collisions = 0

    def is_duplicate(self, source: Sequence[str], target: Sequence[str]) -> bool:
        data = (" ".join(source) + "\t" + " ".join(target)).encode("utf-8")
        key = int.from_bytes(hashlib.blake2b(data, digest_size=16).digest(), "little")
        check = zlib.crc32(data) | (len(data) << 32)
        prev = self._seen.get(key)
        if prev is None:
            self._seen[key] = check
            return False
        if prev == check:
            return True
        self.collisions += 1
        if data in self._exact:
            return True
        self._exact.add(data)
        return False


def drop_reason(pair: SentencePair, cfg: FilterConfig) -> Optional[str]:
    ls, lt = len(pair.source), len(pair.target)
    if min(ls, lt) < cfg.min_tokens:
        return "too_short"
    if max(ls, lt) > cfg.max_tokens:
        return "too_long"
    lo, hi = min(ls, lt), max(ls, lt)
    if hi > 0 and (lo == 0 or hi / lo > cfg.max_ratio):
        return "ratio"
    return None


def clean(
    pairs: Iterable[SentencePair],
    cfg: FilterConfig = FilterConfig(),
    stats: Optional[CleanStats] = None,
    hook: Optional[Callable[[SentencePair], bool]] = None,
) -> Iterator[SentencePair]:
    """Drop pairs that violate length, ratio or uniqueness constraints.

    ``stats`` (updated in place while iterating) receives per-reason counts.
    ``hook`` is an optional keep-predicate, e.g. a language-id filter.
    """
    stats = stats if stats is not None else CleanStats()
    dedup = Deduplicator() if cfg.dedup else None
    for pair in pairs:
        stats.read += 1
        reason = drop_reason(pair, cfg)
        if reason is None and hook is not None and not hook(pair):
            reason = "rejected_by_hook"
        if reason is None and dedup is not None and dedup.is_duplicate(pair.source.surface, pair.target.surface):
            reason = "duplicate"
        if dedup is not None:
            stats.hash_collisions = dedup.collisions
        if reason is not None:
            setattr(stats, reason, getattr(stats, reason) + 1)
            continue
        stats.kept += 1
        yield pair


# -- pipeline configuration ----------------------------------------------------


@dataclass
class PipelineConfig:
    out_dir: Path
    source: Optional[Path] = None
    target: Optional[Path] = None
    tsv: Optional[Path] = None
    pretokenize: bool = False
    filter: FilterConfig = field(default_factory=FilterConfig)
    clean_enabled: bool = True
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    pool_path: Optional[Path] = None
    pool_max_len: int = 9
    pool_reservoir: int = 10000
    pool_seed: int = 0
    annotation: AnnotationConfig = field(default_factory=AnnotationConfig)
    variant_policy: VariantPolicy = VariantPolicy.ALL
    termbase: Optional[Path] = None
    lemmatizer: LemmatizerSpec = field(default_factory=LemmatizerSpec)
    jobs: int = 1
    shard_size: int = DEFAULT_SHARD_SIZE
    raw: dict = field(default_factory=dict)

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, ensure_ascii=False, default=str)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _path(base: Path, value) -> Optional[Path]:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def _lemmatizer_kind(base: Path, kind: str) -> str:
    if kind.startswith("dict:"):
        return "dict:" + str(_path(base, kind[5:]))
    return kind


def load_config(path: str | Path, jobs: Optional[int] = None) -> PipelineConfig:
    """Parse and validate a TOML pipeline config; relative paths resolve next to it."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent
    inp = raw.get("input", {})
    out = raw.get("output", {})
    if "dir" not in out:
        raise ConfigError("[output] dir is required")
    try:
        cln = dict(raw.get("clean", {}))
        clean_enabled = cln.pop("enabled", True)
        smp = raw.get("sample", {})
        pool = raw.get("pool", {})
        ann = raw.get("annotate", {})
        lem = raw.get("lemmatizer", {})
        run = raw.get("run", {})
        tb = raw.get("termbase", {})
        cfg = PipelineConfig(
            out_dir=_path(base, out["dir"]),
            source=_path(base, inp.get("source")),
            target=_path(base, inp.get("target")),
            tsv=_path(base, inp.get("tsv")),
            pretokenize=bool(inp.get("pretokenize", False)),
            filter=FilterConfig(**cln),
            clean_enabled=bool(clean_enabled),
            sampler=SamplerConfig(**smp),
            pool_path=_path(base, pool.get("path")),
            pool_max_len=int(pool.get("max_len", 9)),
            pool_reservoir=int(pool.get("reservoir_size", 10000)),
            pool_seed=int(pool.get("seed", 0)),
            annotation=AnnotationConfig(
                scheme=Scheme(ann.get("scheme", "suffix")),
                sep_token=ann.get("sep", "<sep>"),
                constraint_delim=ann.get("cdelim", "<c>"),
                variant_delim=ann.get("vdelim", "<v>"),
                mode=Mode(ann.get("mode", "surface")),
            ),
            variant_policy=VariantPolicy(ann.get("variants", "all")),
            termbase=_path(base, tb.get("path")),
            lemmatizer=LemmatizerSpec.parse(_lemmatizer_kind(base, lem.get("kind", "identity")), bool(lem.get("lowercase", True))),
            jobs=int(jobs if jobs is not None else run.get("jobs", 1)),
            shard_size=int(run.get("shard_size", DEFAULT_SHARD_SIZE)),
            raw={k: v for k, v in raw.items() if k != "run"},
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: PipelineConfig):
    if cfg.tsv is None and (cfg.source is None or cfg.target is None):
        raise ConfigError("[input] needs tsv, or both source and target")
    missing = [
        str(p)
        for p in (cfg.source, cfg.target, cfg.tsv, cfg.pool_path, cfg.termbase, cfg.lemmatizer.dictionary_path)
        if p is not None and not Path(p).exists()
    ]
    if missing:
        raise ConfigError(f"missing input path(s): {', '.join(missing)}")
    if cfg.termbase is None and cfg.annotation.scheme is not Scheme.SUFFIX:
        raise ConfigError("factored/replace schemes need source-aligned constraints: configure [termbase]")
    if cfg.jobs < 1 or cfg.shard_size < 1:
        raise ConfigError("jobs and shard_size must be positive")


# -- shard workers ---------------------------------------------------------------

_STATE: dict = {}


def _init_worker(state: dict):
    _STATE.clear()
    _STATE.update(state)


@dataclass
class ShardResult:
    annotated: List[str]
    targets: List[str]
    sidecar: List[str]
    constraints: int = 0
    variants: int = 0


def process_shard(shard: Sequence[Tuple[int, int, str, str]], state: Optional[dict] = None) -> ShardResult:
    """Sample or match constraints for one shard and annotate its sources.

    Shard rows are ``(output_index, input_line_index, source, target)``.
    """
    st = state if state is not None else _STATE
    cfg: PipelineConfig = st["cfg"]
    tok = pretokenize if cfg.pretokenize else tokenize
    sources = [tok(r[2]) for r in shard]
    targets = [tok(r[3]) for r in shard]
    ann = cfg.annotation
    lem = get_lemmatizer(cfg.lemmatizer)
    if st.get("termbase") is not None:
        tb: TermBase = st["termbase"]
        all_constraints = []
        for src in sources:
            matches = find_matches(lem.sentence(src), tb, cfg.lemmatizer)
            all_constraints.append(matches_to_constraints(matches, tb, ann.mode, cfg.variant_policy))
    else:
        all_constraints = sample_batch(
            [t.surface for t in targets], [r[1] for r in shard], cfg.sampler, st.get("pool")
        )
        if ann.mode is Mode.LEMMA:
            all_constraints = [[lem.constraint(c, restore_case=True) for c in cs] for cs in all_constraints]
    res = ShardResult([], [], [])
    for row, src, tgt, cs in zip(shard, sources, targets, all_constraints):
        try:
            out = annotate(src, cs, ann, line_index=row[1])
        except ValueError as exc:
            raise StageError(f"annotate failed at input line {row[1] + 1}: {exc}") from exc
        res.annotated.append(out.to_line())
        res.targets.append(" ".join(tgt.surface))
        res.sidecar.append(format_sidecar_line(row[0], cs))
        res.constraints += len(cs)
        res.variants += sum(len(c.variants) for c in cs)
    return res


def _run_shard(shard, state: Optional[dict] = None) -> ShardResult:
    try:
        return process_shard(shard, state)
    except Exception as exc:
        raise StageError(f"shard with input lines {shard[0][1] + 1}-{shard[-1][1] + 1} failed: {exc}") from exc


def _ordered_map(fn, items: Iterable, jobs: int, state: dict) -> Iterator:
    """Order-preserving map with a bounded number of in-flight shards."""
    if jobs <= 1:
        for item in items:
            yield fn(item, state)
        return
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(state,)) as ex:
        window: deque = deque()
        for item in items:
            window.append(ex.submit(fn, item))
            if len(window) >= 2 * jobs:
                yield window.popleft().result()
        while window:
            yield window.popleft().result()


def _read_pairs(cfg: PipelineConfig) -> Iterator[SentencePair]:
    tok = pretokenize if cfg.pretokenize else tokenize
    if cfg.tsv is not None:
        with open(cfg.tsv, encoding="utf-8") as fh:
            for idx, line in enumerate(iter_lines(fh)):
                src, sep, tgt = line.partition("\t")
                if not sep:
                    raise StageError(f"{cfg.tsv}:{idx + 1}: expected source<TAB>target")
                yield SentencePair(tok(src), tok(tgt), idx)
        return
    with open(cfg.source, encoding="utf-8") as fs, open(cfg.target, encoding="utf-8") as ft:
        idx = -1
        for idx, (s, t) in enumerate(zip(iter_lines(fs), iter_lines(ft))):
            yield SentencePair(tok(s), tok(t), idx)
        if fs.readline() or ft.readline():
            raise StageError(f"source and target differ in length after line {idx + 1}")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def run_pipeline(config: str | Path | PipelineConfig, jobs: Optional[int] = None) -> dict:
    """Run clean -> pool -> sample/match -> annotate; returns the manifest.

    Outputs in ``out_dir``: ``clean.index`` (input line numbers kept),
    ``annotated.src``, ``annotated.tgt``, ``constraints.tsv``, optionally
    ``pool.tsv`` and ``manifest.json``. Data files are byte-identical for any
    ``jobs`` and ``shard_size``.
    """
    cfg = config if isinstance(config, PipelineConfig) else load_config(config, jobs)
    if jobs is not None:
        cfg.jobs = jobs
    validate_config(cfg)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)

    # stage 1: clean (sequential: dedup keeps the global first occurrence)
    stats = CleanStats()
    kept_path = out / "clean.tsv"
    index_path = out / "clean.index"
    pairs = _read_pairs(cfg)
    if cfg.clean_enabled:
        pairs = clean(pairs, cfg.filter, stats)
    with open(kept_path, "w", encoding="utf-8", newline="\n") as fk, open(index_path, "w", encoding="utf-8") as fi:
        for pair in pairs:
            fk.write(" ".join(pair.source.surface) + "\t" + " ".join(pair.target.surface) + "\n")
            fi.write(f"{pair.line_index}\n")
            if not cfg.clean_enabled:
                stats.read += 1
                stats.kept += 1

    # stage 2: n-gram pool over cleaned targets (only needed for sampled decoys)
    state: dict = {"cfg": cfg}
    pool_stats: dict = {}
    if cfg.termbase is not None:
        state["termbase"] = load_termbase(cfg.termbase, cfg.lemmatizer)
    elif cfg.sampler.v > 0:
        if cfg.pool_path is not None:
            pool = load_pool(cfg.pool_path)
        else:
            with open(kept_path, encoding="utf-8") as fk:
                pool = build_ngram_pool(
                    (line.rstrip("\n").partition("\t")[2].split() for line in fk),
                    cfg.pool_max_len,
                    cfg.pool_reservoir,
                    cfg.pool_seed,
                )
            save_pool(pool, out / "pool.tsv")
        state["pool"] = pool
        pool_stats = {str(k): len(v) for k, v in sorted(pool.by_length.items())}

    # stage 3: sample/match + annotate, sharded
    def shards() -> Iterator[List[Tuple[int, int, str, str]]]:
        with open(kept_path, encoding="utf-8") as fk, open(index_path, encoding="utf-8") as fi:
            buf: List[Tuple[int, int, str, str]] = []
            for pos, (line, idx) in enumerate(zip(fk, fi)):
                src, _, tgt = line.rstrip("\n").partition("\t")
                buf.append((pos, int(idx), src, tgt))
                if len(buf) >= cfg.shard_size:
                    yield buf
                    buf = []
            if buf:
                yield buf

    n_constraints = n_variants = 0
    with open(out / "annotated.src", "w", encoding="utf-8", newline="\n") as fa, open(
        out / "annotated.tgt", "w", encoding="utf-8", newline="\n"
    ) as ft, open(out / "constraints.tsv", "w", encoding="utf-8", newline="\n") as fc:
        for res in _ordered_map(_run_shard, shards(), cfg.jobs, state):
            fa.write("".join(x + "\n" for x in res.annotated))
            ft.write("".join(x + "\n" for x in res.targets))
            fc.write("".join(x + "\n" for x in res.sidecar))
            n_constraints += res.constraints
            n_variants += res.variants
    kept_path.unlink()

    outputs = ["clean.index", "annotated.src", "annotated.tgt", "constraints.tsv"]
    if (out / "pool.tsv").exists() and "pool" in state and cfg.pool_path is None:
        outputs.append("pool.tsv")
    manifest = {
        "config_hash": cfg.config_hash(),
        "config": cfg.raw,
        "seeds": {"sample": cfg.sampler.seed, "pool": cfg.pool_seed},
        "jobs": cfg.jobs,
        "stats": {
            "clean": asdict(stats),
            "pool": pool_stats,
            "annotate": {"sentences": stats.kept, "constraints": n_constraints, "variants": n_variants},
        },
        "outputs": {name: _sha256(out / name) for name in outputs},
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return manifest


"""Synthetic training constraints sampled from target sentences.

Each sentence owns a counter-based random stream keyed by ``(seed,
line_index)``. The draw layout is fixed: counter 0 decides whether the
sentence is skipped, counter ``1 + t`` belongs to target token ``t`` and
decoy-variant draws live at ``VARIANT_BASE + 5 * j + k`` for constraint ``j``.
Output for a line therefore never depends on which other lines share its
batch, shard or worker.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .core import ConstraintSpec, Origin, SentencePair, Tokens, TokenizedSentence, normalize

log = logging.getLogger(__name__)

VARIANT_BASE = 1 << 32
DRAWS_PER_CONSTRAINT = 5


@dataclass(frozen=True)
class SamplerConfig:
    s: float = 0.1
    e: float = 0.75
    n: float = 0.1
    v: float = 0.1
    l: float = 0.9  # noqa: E741
    tri_min: int = 1
    tri_max: int = 9
    tri_mode: int = 2
    seed: int = 0
    shuffle_variants: bool = False

    def __post_init__(self):
        for name in ("s", "e", "n", "v", "l"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {name}={p} outside [0, 1]")
        if not 1 <= self.tri_min <= self.tri_mode <= self.tri_max:
            raise ValueError("need 1 <= tri_min <= tri_mode <= tri_max")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def triangular_pmf(lo: int, hi: int, mode: int) -> np.ndarray:
    """Discrete triangular pmf over ``lo..hi``.

    Mass at each integer is proportional to the continuous triangular density
    there, so the two endpoints get zero mass unless they coincide with the
    mode.
    """
    if lo == hi:
        return np.ones(1)
    x = np.arange(lo, hi + 1, dtype=np.float64)
    dens = np.where(
        x < mode,
        2 * (x - lo) / ((hi - lo) * max(mode - lo, 1e-300)),
        np.where(x == mode, 2.0 / (hi - lo), 2 * (hi - x) / ((hi - lo) * max(hi - mode, 1e-300))),
    )
    return dens / dens.sum()


# -- n-gram pool -------------------------------------------------------------


@dataclass
class NgramPool:
    by_length: Dict[int, List[Tokens]] = field(default_factory=dict)
    counts: Dict[int, int] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return any(self.by_length.values())

    def lengths(self) -> List[int]:
        return sorted(k for k, v in self.by_length.items() if v)

    def nearest_length(self, length: int) -> int:
        avail = self.lengths()
        if not avail:
            raise ValueError("n-gram pool is empty; cannot draw decoy variants")
        return min(avail, key=lambda k: (abs(k - length), k))


class _Reservoir:
    """Algorithm L reservoir over a stream of n-grams fed sentence by sentence."""

    def __init__(self, size: int, rng: np.random.Generator):
        self.size = size
        self.rng = rng
        self.items: List[Tokens] = []
        self.seen = 0
        self.w = 1.0
        self.next = -1

    def _u(self) -> float:
        return 1.0 - self.rng.random()  # (0, 1]

    def _advance(self):
        if self.w >= 1.0:
            self.next += 1
        else:
            self.next += int(math.floor(math.log(self._u()) / math.log1p(-self.w))) + 1

    def feed(self, tokens: Sequence[str], length: int):
        count = len(tokens) - length + 1
        if count <= 0:
            return
        if self.size <= 0:
            self.seen += count
            return
        base = self.seen
        pos = 0
        while pos < count and len(self.items) < self.size:
            self.items.append(tuple(tokens[pos:pos + length]))
            pos += 1
            if len(self.items) == self.size:
                self.w = math.exp(math.log(self._u()) / self.size)
                self.next = base + pos - 1
                self._advance()
        while len(self.items) == self.size and self.next < base + count:
            p = self.next - base
            self.items[int(self.rng.integers(self.size))] = tuple(tokens[p:p + length])
            self.w *= math.exp(math.log(self._u()) / self.size)
            self._advance()
        self.seen = base + count


def build_ngram_pool(
    corpus: Iterable[TokenizedSentence | Sequence[str]],
    max_len: int = 9,
    reservoir_size: int = 10000,
    seed: int = 0,
) -> NgramPool:
    """Uniform reservoir sample of the corpus n-grams for every length 1..max_len."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    rng = np.random.default_rng(seed)
    reservoirs = {k: _Reservoir(reservoir_size, rng) for k in range(1, max_len + 1)}
    for sent in corpus:
        tokens = sent.surface if isinstance(sent, TokenizedSentence) else tuple(sent)
        for k, res in reservoirs.items():
            if len(tokens) < k:
                break
            res.feed(tokens, k)
    return NgramPool(
        {k: r.items for k, r in reservoirs.items() if r.items},
        {k: r.seen for k, r in reservoirs.items() if r.seen},
    )


def save_pool(pool: NgramPool, path: str | Path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k in sorted(pool.counts):
            fh.write(f"#count\t{k}\t{pool.counts[k]}\n")
        for k in sorted(pool.by_length):
            for gram in pool.by_length[k]:
                fh.write(f"{k}\t{' '.join(gram)}\n")


def load_pool(path: str | Path) -> NgramPool:
    by_length: Dict[int, List[Tokens]] = {}
    counts: Dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if cols[0] == "#count" and len(cols) == 3:
                counts[int(cols[1])] = int(cols[2])
                continue
            if len(cols) != 2:
                raise ValueError(f"{path}:{lineno}: expected len<TAB>tokens")
            gram = tuple(normalize(cols[1]).split())
            if len(gram) != int(cols[0]):
                raise ValueError(f"{path}:{lineno}: length field does not match token count")
            by_length.setdefault(len(gram), []).append(gram)
    for k, grams in by_length.items():
        counts.setdefault(k, len(grams))
    return NgramPool(by_length, counts)


# -- sampling ----------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream; ``draw(k)`` is a pure function of ``(key, k)``."""

    key: int

    @classmethod
    def for_line(cls, seed: int, line_index: int) -> "RngStream":
        return cls(int(_kernels.stream_keys(seed, [line_index])[0]))

    def draw(self, counter: int) -> float:
        return float(_kernels.draws_at([self.key], [counter])[0])


class _DecoyPicker:
    def __init__(self, cfg: SamplerConfig, pool: Optional[NgramPool]):
        self.cfg = cfg
        self.pool = pool
        self.cdf = np.cumsum(triangular_pmf(cfg.tri_min, cfg.tri_max, cfg.tri_mode))
        self.cdf[-1] = 1.0
        self._warned: set = set()

    def triangular(self, u: float) -> int:
        return self.cfg.tri_min + int(np.searchsorted(self.cdf, u, side="right"))

    def pick(self, length: int, u: float) -> Tokens:
        pool = self.pool
        if pool is None or not pool:
            raise ValueError("n-gram pool is empty; cannot draw decoy variants")
        grams = pool.by_length.get(length)
        if not grams:
            alt = pool.nearest_length(length)
            if length not in self._warned:
                self._warned.add(length)
                log.warning("no %d-grams in pool; drawing %d-grams instead", length, alt)
            grams = pool.by_length[alt]
        return grams[min(int(u * len(grams)), len(grams) - 1)]


def _attach(
    true_variants: List[Tokens], draws: np.ndarray, picker: _DecoyPicker
) -> Tuple[Tokens, ...]:
    cfg = picker.cfg
    u_v, u_l, u_tri, u_pick, u_shuf = draws
    variants = list(true_variants)
    if u_v < cfg.v:
        length = len(variants[0]) if u_l < cfg.l else picker.triangular(u_tri)
        decoy = picker.pick(length, u_pick)
        if decoy not in variants:
            variants.append(decoy)
    if cfg.shuffle_variants and len(variants) == 2 and u_shuf < 0.5:
        variants.reverse()
    return tuple(variants)


def _variant_draws(keys: np.ndarray, ordinals: np.ndarray) -> np.ndarray:
    counters = VARIANT_BASE + DRAWS_PER_CONSTRAINT * ordinals[:, None] + np.arange(DRAWS_PER_CONSTRAINT)
    return _kernels.draws_at(np.asarray(keys, dtype=np.uint64)[:, None], counters)


def attach_variants(
    constraints: Sequence[ConstraintSpec],
    cfg: SamplerConfig,
    pool: Optional[NgramPool],
    rng_stream: RngStream,
) -> List[ConstraintSpec]:
    """Give each constraint a random decoy variant with probability ``cfg.v``.

    The decoy keeps the true constraint's length with probability ``cfg.l``;
    otherwise its length follows the discrete triangular distribution. The
    true variant stays first unless ``cfg.shuffle_variants`` is set.
    """
    if not constraints:
        return []
    picker = _DecoyPicker(cfg, pool)
    ords = np.arange(len(constraints))
    draws = _variant_draws(np.full(len(constraints), rng_stream.key, dtype=np.uint64), ords)
    out = []
    for c, d in zip(constraints, draws):
        out.append(ConstraintSpec(_attach(list(c.variants), d, picker), c.origin, c.mode, c.source_span))
    return out


def sample_batch(
    targets: Sequence[Tokens],
    line_indices: Sequence[int],
    cfg: SamplerConfig,
    pool: Optional[NgramPool] = None,
) -> List[List[ConstraintSpec]]:
    """Sample constraints (with decoys) for many target sentences at once."""
    if len(targets) != len(line_indices):
        raise ValueError("targets and line_indices differ in length")
    out: List[List[ConstraintSpec]] = [[] for _ in targets]
    if not targets:
        return out
    keys = _kernels.stream_keys(cfg.seed, np.asarray(line_indices, dtype=np.uint64))
    lengths = np.fromiter((len(t) for t in targets), dtype=np.int64, count=len(targets))
    sent, starts, ends = _kernels.sample_spans(lengths, keys, cfg.s, cfg.e, cfg.n)
    if sent.size == 0:
        return out
    # ordinal of each constraint within its sentence
    first = np.r_[True, sent[1:] != sent[:-1]]
    group_start = np.maximum.accumulate(np.where(first, np.arange(sent.size), 0))
    ordinals = np.arange(sent.size) - group_start
    need_variants = cfg.v > 0.0 or cfg.shuffle_variants
    draws = _variant_draws(keys[sent], ordinals) if need_variants else None
    picker = _DecoyPicker(cfg, pool)
    for k, (i, a, b) in enumerate(zip(sent.tolist(), starts.tolist(), ends.tolist())):
        span = targets[i][a:b]
        variants = _attach([span], draws[k], picker) if need_variants else (span,)
        out[i].append(ConstraintSpec(variants, Origin.SAMPLED))
    return out


def sample_constraints(
    pair: SentencePair,
    cfg: SamplerConfig,
    pool: Optional[NgramPool] = None,
    rng_stream: Optional[RngStream] = None,
) -> List[ConstraintSpec]:
    """Sample constraints for one pair; the stream must be ``(cfg.seed, pair.line_index)``."""
    expected = RngStream.for_line(cfg.seed, pair.line_index)
    if rng_stream is not None and rng_stream != expected:
        raise ValueError("rng_stream must be derived from (cfg.seed, pair.line_index)")
    return sample_batch([pair.target.surface], [pair.line_index], cfg, pool)[0]

"""End-to-end pipeline driver with per-stage latency accounting.

Dataflow: parse -> encode_text (per object and per distinct style) ->
encode_image (through the encoding cache) -> one mask per pair -> one
stylized frame per distinct style -> overlap resolution -> composite.
Per-pair and per-style work runs on a bounded worker pool; assembly is
ordinal-ordered, so output bytes are independent of scheduling.
"""

from __future__ import annotations

import json
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, fields
from pathlib import Path

from .backends import HttpBackend, MockBackend, ModelBackend, StylizedSet
from .backends.base import Embedding, ImageEncoding
from .compositor import (
    CompositePolicy,
    OverlapPolicy,
    StyleAssignment,
    UncoveredPolicy,
    composite,
    coverage_report,
)
from .enc_cache import CacheStats, EncodingCache
from .errors import ConfigError, EmptyMask, MissingArtifacts, StageError
from .evaluator import ScoreReport, patchwise_clip_score
from .images import ImageRGB, Mask
from .promptseg import Prompt, SegmentedPrompt, parse_prompt

STAGES = ("parse", "encode_text", "encode_image", "mask", "stylize", "composite")

MANIFEST_NAME = "manifest.json"
MANIFEST_FORMAT = "mosaic-run/1"


@dataclass(frozen=True)
class StageTiming:
    stage: str
    duration_ms: float
    count: int


class TimingCollector:
    """Thread-safe accumulation of per-stage wall-clock durations."""

    def __init__(self):
        self._lock = threading.Lock()
        self._totals = {stage: 0.0 for stage in STAGES}
        self._counts = {stage: 0 for stage in STAGES}

    def add(self, stage: str, seconds: float) -> None:
        with self._lock:
            self._totals[stage] += seconds
            self._counts[stage] += 1

    @contextmanager
    def timed(self, stage: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.add(stage, time.perf_counter() - start)

    def snapshot(self) -> list[StageTiming]:
        with self._lock:
            return [
                StageTiming(stage=s, duration_ms=self._totals[s] * 1000.0, count=self._counts[s])
                for s in STAGES
            ]


class InstrumentedBackend(ModelBackend):
    """Times every backend invocation under its pipeline stage name."""

    def __init__(self, inner: ModelBackend, collector: TimingCollector):
        self.inner = inner
        self.collector = collector

    def encode_text(self, text: str) -> Embedding:
        with self.collector.timed("encode_text"):
            return self.inner.encode_text(text)

    def encode_image(self, img: ImageRGB) -> ImageEncoding:
        with self.collector.timed("encode_image"):
            return self.inner.encode_image(img)

    def generate_mask(self, enc: ImageEncoding, object_text: str, text_emb: Embedding) -> Mask:
        with self.collector.timed("mask"):
            return self.inner.generate_mask(enc, object_text, text_emb)

    def stylize(self, img: ImageRGB, style_phrase: str, style_emb: Embedding) -> ImageRGB:
        with self.collector.timed("stylize"):
            return self.inner.stylize(img, style_phrase, style_emb)

    def embed_image(self, img: ImageRGB) -> Embedding:
        return self.inner.embed_image(img)

    def health(self) -> dict:
        return self.inner.health()


# --- configuration ---

_BOOL_WORDS = {"true": True, "yes": True, "1": True, "on": True,
               "false": False, "no": False, "0": False, "off": False}


def _coerce_bool(value: str) -> bool:
    try:
        return _BOOL_WORDS[value.lower()]
    except KeyError:
        raise ConfigError(f"expected a boolean, got {value!r}") from None


def _coerce_int(value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"expected an integer, got {value!r}") from None


def _coerce_float(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"expected a number, got {value!r}") from None


# config-file key -> (PipelineConfig field, coercer)
CONFIG_KEYS = {
    "image": ("image_path", str),
    "prompt": ("prompt", str),
    "backend": ("backend", str),
    "endpoint": ("endpoint", str),
    "overlap_policy": ("overlap", str),
    "uncovered": ("uncovered", str),
    "cache.capacity": ("cache_capacity", _coerce_int),
    "cache_capacity": ("cache_capacity", _coerce_int),
    "no_cache": ("no_cache", _coerce_bool),
    "seed": ("seed", _coerce_int),
    "out": ("out_dir", str),
    "timeout": ("timeout", _coerce_float),
    "workers": ("workers", _coerce_int),
    "on_empty_mask": ("on_empty_mask", str),
}


def load_config_file(path: str | Path) -> dict:
    """``key = value`` lines with ``#`` comments; unknown keys rejected."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        target, coerce = CONFIG_KEYS[key]
        values[target] = coerce(raw.strip())
    return values


@dataclass
class PipelineConfig:
    image_path: str = ""
    prompt: str = ""
    backend: str = "mock"
    endpoint: str | None = None
    overlap: str = OverlapPolicy.LAST_WINS.value
    uncovered: str = UncoveredPolicy.CONTENT.value
    cache_capacity: int = 8
    no_cache: bool = False
    seed: int = 0
    out_dir: str = "mosaic-out"
    timeout: float = 30.0
    workers: int = 4
    on_empty_mask: str = "skip"

    def validate(self) -> "PipelineConfig":
        if not self.image_path:
            raise ConfigError("an input image is required")
        if not self.prompt:
            raise ConfigError("a prompt is required")
        if self.backend not in ("mock", "http"):
            raise ConfigError(f"backend must be 'mock' or 'http', got {self.backend!r}")
        if self.backend == "http" and not self.endpoint:
            raise ConfigError("http backend needs an endpoint (flag, config, or MOSAIC_ENDPOINT)")
        if self.overlap not in tuple(p.value for p in OverlapPolicy):
            raise ConfigError(f"unknown overlap policy {self.overlap!r}")
        self.composite_policy()
        if self.cache_capacity < 1:
            raise ConfigError(f"cache_capacity must be >= 1, got {self.cache_capacity}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.timeout <= 0:
            raise ConfigError(f"timeout must be positive, got {self.timeout}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.on_empty_mask not in ("skip", "abort"):
            raise ConfigError(f"on_empty_mask must be 'skip' or 'abort', got {self.on_empty_mask!r}")
        return self

    def composite_policy(self) -> CompositePolicy:
        overlap = OverlapPolicy(self.overlap)
        if self.uncovered == UncoveredPolicy.CONTENT.value:
            return CompositePolicy(overlap=overlap)
        if self.uncovered.startswith("background:"):
            phrase = self.uncovered.partition(":")[2]
            if not phrase:
                raise ConfigError("background policy needs a style phrase: background:<style>")
            return CompositePolicy(overlap=overlap,
                                   uncovered=UncoveredPolicy.BACKGROUND_STYLE,
                                   background_style=phrase)
        raise ConfigError(f"uncovered policy must be 'content' or 'background:<style>', "
                          f"got {self.uncovered!r}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def build(cls, file_values: dict | None = None, **overrides) -> "PipelineConfig":
        """File values first, explicit (non-None) overrides on top."""
        cfg = cls()
        for source in (file_values or {}), overrides:
            for key, value in source.items():
                if value is None:
                    continue
                if key not in {f.name for f in fields(cls)}:
                    raise ConfigError(f"unknown config field {key!r}")
                setattr(cfg, key, value)
        return cfg.validate()


def build_backend(cfg: PipelineConfig) -> ModelBackend:
    if cfg.backend == "mock":
        return MockBackend()
    backend = HttpBackend(cfg.endpoint, timeout=cfg.timeout)
    backend.check_health()
    return backend


# --- pipeline run ---

@dataclass
class PipelineResult:
    pairs: SegmentedPrompt
    masks: list[Mask | None]
    skipped: list[int]
    stylized: StylizedSet
    composite: ImageRGB
    coverage: tuple[float, float]
    cache_stats: CacheStats | None
    timings: list[StageTiming]
    manifest: dict
    out_dir: Path | None = None


def _distinct_styles(pairs: SegmentedPrompt, policy: CompositePolicy) -> list[str]:
    styles = list(dict.fromkeys(pairs.styles))
    if policy.background_style and policy.background_style not in styles:
        styles.append(policy.background_style)
    return styles


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def run_pipeline(cfg: PipelineConfig, backend: ModelBackend | None = None,
                 cache: EncodingCache | None = None, collector: TimingCollector | None = None,
                 persist: bool = True) -> PipelineResult:
    """Execute the full dataflow; optionally persist artifacts + manifest.

    ``backend`` and ``cache`` are injectable so benchmarks and tests can
    share warm state across runs.
    """
    cfg.validate()
    policy = cfg.composite_policy()
    collector = collector or TimingCollector()
    with _stage("handshake"):
        raw = backend or build_backend(cfg)
    inst = InstrumentedBackend(raw, collector)
    if cache is None and not cfg.no_cache:
        cache = EncodingCache(cfg.cache_capacity)

    with _stage("load"):
        try:
            content = ImageRGB.load(cfg.image_path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read image {cfg.image_path}: {exc}") from exc

    with _stage("parse"), collector.timed("parse"):
        pairs = parse_prompt(Prompt(cfg.prompt))

    styles = _distinct_styles(pairs, policy)

    with _stage("encode_text"):
        obj_embs = [inst.encode_text(p.object_phrase) for p in pairs]
        sty_embs = {phrase: inst.encode_text(phrase) for phrase in styles}

    with _stage("encode_image"):
        if cache is not None:
            enc = cache.get_or_encode(content, inst)
        else:
            enc = inst.encode_image(content)

    masks: list[Mask | None] = [None] * len(pairs)
    skipped: list[int] = []
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = {
            i: pool.submit(inst.generate_mask, enc, pairs.pairs[i].object_phrase, obj_embs[i])
            for i in range(len(pairs))
        }
        for i, fut in futures.items():
            try:
                masks[i] = fut.result()
            except EmptyMask as exc:
                if cfg.on_empty_mask == "abort":
                    raise StageError("mask", exc) from exc
                skipped.append(i)
            except Exception as exc:
                raise StageError("mask", exc) from exc

        style_futures = {
            phrase: pool.submit(inst.stylize, content, phrase, sty_embs[phrase])
            for phrase in styles
        }
        frames: dict[str, ImageRGB] = {}
        for phrase, fut in style_futures.items():
            try:
                frames[phrase] = fut.result()
            except Exception as exc:
                raise StageError("stylize", exc) from exc

    stylized = StylizedSet(entries=tuple((phrase, frames[phrase]) for phrase in styles))

    with _stage("composite"), collector.timed("composite"):
        assignments = [
            StyleAssignment(mask=masks[i], styled=frames[pairs.pairs[i].style_phrase], ordinal=i)
            for i in range(len(pairs))
            if masks[i] is not None
        ]
        background = frames[policy.background_style] if policy.background_style else None
        output = composite(content, assignments, policy, background=background)
        live_masks = [m for m in masks if m is not None]
        coverage = coverage_report(live_masks)

    timings = collector.snapshot()
    cache_stats = cache.stats() if cache is not None else None
    manifest = _build_manifest(cfg, pairs, styles, skipped, coverage, cache_stats, timings)

    result = PipelineResult(pairs=pairs, masks=masks, skipped=sorted(skipped), stylized=stylized,
                            composite=output, coverage=coverage, cache_stats=cache_stats,
                            timings=timings, manifest=manifest)
    if persist:
        result.out_dir = _persist(cfg, result)
    return result


def _build_manifest(cfg: PipelineConfig, pairs: SegmentedPrompt, styles: list[str],
                    skipped: list[int], coverage: tuple[float, float],
                    cache_stats: CacheStats | None, timings: list[StageTiming]) -> dict:
    mask_paths = [
        None if i in skipped else f"masks/mask_{i:02d}.png" for i in range(len(pairs))
    ]
    return {
        "format": MANIFEST_FORMAT,
        "config": cfg.to_dict(),
        "prompt": cfg.prompt,
        "pairs": [[o, s] for o, s in pairs.phrases()],
        "seed": cfg.seed,
        "style_order": list(styles),
        "skipped": sorted(skipped),
        "artifacts": {
            "composite": "composite.png",
            "masks": mask_paths,
            "styles": {phrase: f"styles/style_{i:02d}.png" for i, phrase in enumerate(styles)},
        },
        "coverage": {"covered": coverage[0], "overlap": coverage[1]},
        "cache": None if cache_stats is None else {
            "hits": cache_stats.hits, "misses": cache_stats.misses,
            "evictions": cache_stats.evictions, "capacity": cache_stats.capacity,
        },
        "timings": [
            {"stage": t.stage, "duration_ms": t.duration_ms, "count": t.count} for t in timings
        ],
    }


def _persist(cfg: PipelineConfig, result: PipelineResult) -> Path:
    out = Path(cfg.out_dir)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    (out / "styles").mkdir(parents=True, exist_ok=True)
    result.composite.save(out / "composite.png")
    for i, mask in enumerate(result.masks):
        if mask is not None:
            mask.save(out / "masks" / f"mask_{i:02d}.png")
    for i, (phrase, frame) in enumerate(result.stylized.entries):
        frame.save(out / "styles" / f"style_{i:02d}.png")
    manifest_bytes = json.dumps(result.manifest, indent=2, sort_keys=True,
                                ensure_ascii=False).encode("utf-8")
    (out / MANIFEST_NAME).write_bytes(manifest_bytes)
    return out


def load_manifest(run_dir: str | Path) -> dict:
    path = Path(run_dir) / MANIFEST_NAME
    if not path.exists():
        raise MissingArtifacts(f"no {MANIFEST_NAME} in {run_dir}")
    return json.loads(path.read_text(encoding="utf-8"))


# --- benchmark ---

@dataclass(frozen=True)
class BenchRow:
    stage: str
    cold_ms: float
    cold_count: int
    warm_mean_ms: float | None
    warm_median_ms: float | None
    warm_count: int | None


@dataclass(frozen=True)
class BenchReport:
    iterations: int
    rows: tuple[BenchRow, ...]

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "rows": [
                {
                    "stage": r.stage, "cold_ms": r.cold_ms, "cold_count": r.cold_count,
                    "warm_mean_ms": r.warm_mean_ms, "warm_median_ms": r.warm_median_ms,
                    "warm_count": r.warm_count,
                }
                for r in self.rows
            ],
        }

    def to_table(self) -> str:
        header = f"{'stage':<14}{'cold ms':>10}{'cold n':>8}{'warm mean':>12}{'warm med':>12}{'warm n':>8}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            warm_mean = f"{r.warm_mean_ms:.3f}" if r.warm_mean_ms is not None else "-"
            warm_med = f"{r.warm_median_ms:.3f}" if r.warm_median_ms is not None else "-"
            warm_n = str(r.warm_count) if r.warm_count is not None else "-"
            lines.append(
                f"{r.stage:<14}{r.cold_ms:>10.3f}{r.cold_count:>8}{warm_mean:>12}{warm_med:>12}{warm_n:>8}"
            )
        return "\n".join(lines)


def run_bench(cfg: PipelineConfig, iterations: int) -> BenchReport:
    """Repeat the pipeline sharing one cache: iteration 1 is the cold pass,
    the rest exercise the warm cache. Artifacts persist once."""
    if iterations < 1:
        raise ConfigError(f"iterations must be >= 1, got {iterations}")
    cfg.validate()
    with _stage("handshake"):
        raw = build_backend(cfg)
    cache = None if cfg.no_cache else EncodingCache(cfg.cache_capacity)
    per_iter: list[list[StageTiming]] = []
    for i in range(iterations):
        collector = TimingCollector()
        run_pipeline(cfg, backend=raw, cache=cache, collector=collector, persist=(i == 0))
        per_iter.append(collector.snapshot())

    rows = []
    for s, stage in enumerate(STAGES):
        cold = per_iter[0][s]
        warm = [it[s] for it in per_iter[1:]]
        rows.append(BenchRow(
            stage=stage,
            cold_ms=cold.duration_ms,
            cold_count=cold.count,
            warm_mean_ms=statistics.fmean(t.duration_ms for t in warm) if warm else None,
            warm_median_ms=statistics.median(t.duration_ms for t in warm) if warm else None,
            warm_count=warm[0].count if warm else None,
        ))
    return BenchReport(iterations=iterations, rows=tuple(rows))


# --- evaluation ---

def evaluate_run(run_dir: str | Path, backend: ModelBackend, seed: int | None = None,
                 scale: float = 1.0) -> ScoreReport:
    """Score a prior run from its manifest.

    Skipped objects (null mask artifacts) are fed as all-zero masks so they
    stay in the report as skipped entries under their original ordinals.
    """
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    artifacts = manifest["artifacts"]
    composite_path = run_dir / artifacts["composite"]
    if not composite_path.exists():
        raise MissingArtifacts(f"composite artifact missing: {composite_path}")
    img = ImageRGB.load(composite_path)
    pairs = SegmentedPrompt.from_phrases((o, s) for o, s in manifest["pairs"])
    masks = []
    for rel in artifacts["masks"]:
        if rel is None:
            masks.append(Mask(width=img.width, height=img.height,
                              bits=bytes(img.width * img.height)))
            continue
        mask_path = run_dir / rel
        if not mask_path.exists():
            raise MissingArtifacts(f"mask artifact missing: {mask_path}")
        masks.append(Mask.load(mask_path))
    eval_seed = manifest["seed"] if seed is None else seed
    return patchwise_clip_score(img, pairs, masks, backend, backend,
                                seed=eval_seed, scale=scale)


def evaluate_explicit(image_path: str | Path, prompt: str, masks_dir: str | Path,
                      backend: ModelBackend, seed: int = 0, scale: float = 1.0) -> ScoreReport:
    """Score an arbitrary image against a prompt with masks from a directory.

    Mask PNGs are taken in sorted name order, one per parsed pair.
    """
    img = ImageRGB.load(image_path)
    pairs = parse_prompt(Prompt(prompt))
    mask_files = sorted(Path(masks_dir).glob("*.png"))
    if len(mask_files) != len(pairs):
        raise ConfigError(f"{len(mask_files)} mask files in {masks_dir} for {len(pairs)} pairs")
    masks = [Mask.load(p) for p in mask_files]
    return patchwise_clip_score(img, pairs, masks, backend, backend, seed=seed, scale=scale)

"""Synthesis of prompt/gold corpora from class and style lexicons.

Templates are literal prompt text with ``{obj}``, ``{sty}`` and ``{pos}``
slots. The i-th ``{obj}`` pairs with the i-th ``{sty}``; a ``{pos}`` slot
must directly follow ``{obj} `` and extends that object's phrase with a
position description. Each record carries its own 64-bit seed, so any
record can be regenerated in isolation.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BadLexicon, BadTemplate, ParseError
from .promptseg import SegmentedPrompt, parse_prompt

POSITIONS = (
    "on the left",
    "on the right",
    "at the top",
    "at the bottom",
    "near the center",
)

# Words that would collide with connectives or style markers if they
# appeared inside a lexicon phrase.
RESERVED_WORDS = frozenset({"and", "in", "as", "style", "styled", "like"})

_SLOT_RE = re.compile(r"\{(obj|sty|pos)\}")


@dataclass(frozen=True)
class Template:
    template_id: str
    text: str

    def __post_init__(self):
        slots = self.slots()
        n_obj = slots.count("obj")
        n_sty = slots.count("sty")
        if n_obj < 1:
            raise BadTemplate(f"{self.template_id}: template needs at least one {{obj}} slot")
        if n_obj != n_sty:
            raise BadTemplate(
                f"{self.template_id}: {n_obj} {{obj}} slots vs {n_sty} {{sty}} slots"
            )
        if self.text.count("{pos}") != self.text.count("{obj} {pos}"):
            raise BadTemplate(f"{self.template_id}: every {{pos}} must directly follow '{{obj}} '")

    def slots(self) -> list[str]:
        return _SLOT_RE.findall(self.text)


@dataclass(frozen=True)
class CorpusRecord:
    prompt_text: str
    gold: SegmentedPrompt
    template_id: str
    seed: int


def validate_lexicon(phrases: Sequence[str], what: str) -> tuple[str, ...]:
    """Reject phrases that could not survive a parse round-trip."""
    if not phrases:
        raise BadLexicon(f"{what} lexicon is empty")
    for p in phrases:
        if not p.strip():
            raise BadLexicon(f"blank {what} phrase")
        if re.search(r"[;,<>{}]", p):
            raise BadLexicon(f"{what} phrase {p!r} contains a forbidden character")
        words = {w.lower() for w in re.split(r"[\s-]+", p) if w}
        clash = words & RESERVED_WORDS
        if clash:
            raise BadLexicon(f"{what} phrase {p!r} contains reserved word(s) {sorted(clash)}")
    return tuple(phrases)


def load_lexicon(path: str | Path) -> tuple[str, ...]:
    """One phrase per line, UTF-8; ``#`` starts a comment line."""
    phrases = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            phrases.append(line)
    return tuple(phrases)


def load_templates(path: str | Path) -> tuple[Template, ...]:
    templates = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            templates.append(Template(template_id=f"t{len(templates):02d}", text=line))
    if not templates:
        raise BadTemplate(f"no templates in {path}")
    return tuple(templates)


def _data_path(name: str) -> Path:
    return Path(str(resources.files("mosaic").joinpath("data", name)))


def default_classes() -> tuple[str, ...]:
    return load_lexicon(_data_path("classes.txt"))


def default_styles() -> tuple[str, ...]:
    return load_lexicon(_data_path("styles.txt"))


def default_templates() -> tuple[Template, ...]:
    return load_templates(_data_path("templates.txt"))


def _expand(template: Template, rng: random.Random,
            classes: Sequence[str], styles: Sequence[str]) -> tuple[str, SegmentedPrompt]:
    """Fill slots left to right, drawing uniformly from the lexicons."""
    objects: list[str] = []
    style_list: list[str] = []

    def fill(m: re.Match) -> str:
        kind = m.group(1)
        if kind == "obj":
            objects.append(classes[rng.randrange(len(classes))])
            return objects[-1]
        if kind == "sty":
            style_list.append(styles[rng.randrange(len(styles))])
            return style_list[-1]
        pos = POSITIONS[rng.randrange(len(POSITIONS))]
        objects[-1] = f"{objects[-1]} {pos}"
        return pos

    prompt_text = _SLOT_RE.sub(fill, template.text)
    gold = SegmentedPrompt.from_phrases(zip(objects, style_list))
    return prompt_text, gold


def generate_corpus(classes: Sequence[str], styles: Sequence[str],
                    templates: Sequence[Template], count: int, seed: int) -> list[CorpusRecord]:
    """Deterministic corpus of ``count`` records.

    Guards each template by expanding it once and checking that the result
    parses back to its gold pairs, so a structurally valid template that the
    grammar cannot invert is rejected up front instead of poisoning records.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    classes = validate_lexicon(classes, "class")
    styles = validate_lexicon(styles, "style")
    if not templates:
        raise BadTemplate("no templates given")
    for template in templates:
        probe_text, probe_gold = _expand(template, random.Random(0), classes, styles)
        try:
            parsed = parse_prompt(probe_text).phrases()
        except ParseError as exc:
            raise BadTemplate(f"{template.template_id}: expansion does not parse: {exc}") from exc
        if parsed != probe_gold.phrases():
            raise BadTemplate(f"{template.template_id}: expansion does not parse back to its pairs")

    rng = random.Random(seed)
    records = []
    for _ in range(count):
        record_seed = rng.getrandbits(64)
        sub = random.Random(record_seed)
        template = templates[sub.randrange(len(templates))]
        prompt_text, gold = _expand(template, sub, classes, styles)
        records.append(CorpusRecord(prompt_text=prompt_text, gold=gold,
                                    template_id=template.template_id, seed=record_seed))
    return records


def write_corpus_jsonl(records: Iterable[CorpusRecord], path: str | Path) -> None:
    """One JSON object per line: prompt, pairs, template_id, seed."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({
                "prompt": rec.prompt_text,
                "pairs": [[o, s] for o, s in rec.gold.phrases()],
                "template_id": rec.template_id,
                "seed": rec.seed,
            }, ensure_ascii=False) + "\n")


def read_corpus_jsonl(path: str | Path) -> list[CorpusRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        records.append(CorpusRecord(
            prompt_text=obj["prompt"],
            gold=SegmentedPrompt.from_phrases((o, s) for o, s in obj["pairs"]),
            template_id=obj["template_id"],
            seed=obj["seed"],
        ))
    return records

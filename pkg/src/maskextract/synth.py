"""Deterministic templated corpus generation.

Passages are built from templates whose literal text plays the role of
backbone structure and whose slot fillers are the information content; the
filler character ranges become the gold answer spans. Identical
(templates, catalog, n, seed) always produce byte-identical corpora.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .corpus import AnnotatedPassage, AnswerSpan, Passage


class CatalogError(ValueError):
    """Malformed template/filler catalog."""


class SlotCoverageError(CatalogError):
    """A template references a slot the catalog does not supply."""


_SLOT_RE = re.compile(r"\{([A-Z][A-Z0-9_]*)\}")


@dataclass(frozen=True)
class Template:
    """A passage pattern: literal text interleaved with named slots.

    ``parts`` alternates ("lit", text) and ("slot", name) entries; two slots
    are never adjacent (there is always literal text between them).
    """

    id: str
    parts: tuple[tuple[str, str], ...]

    def __post_init__(self):
        kinds = [kind for kind, _ in self.parts]
        if "slot" not in kinds:
            raise CatalogError(f"template {self.id}: needs at least one slot")
        for (kind_a, val_a), (kind_b, _) in zip(self.parts, self.parts[1:]):
            if kind_a == "slot" and kind_b == "slot":
                raise CatalogError(f"template {self.id}: adjacent slots with no literal between")
            if kind_a == "lit" and not val_a:
                raise CatalogError(f"template {self.id}: empty literal part")

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(name for kind, name in self.parts if kind == "slot")

    @classmethod
    def from_pattern(cls, id: str, pattern: str) -> "Template":
        parts: list[tuple[str, str]] = []
        pos = 0
        for m in _SLOT_RE.finditer(pattern):
            if m.start() > pos:
                parts.append(("lit", pattern[pos : m.start()]))
            parts.append(("slot", m.group(1)))
            pos = m.end()
        if pos < len(pattern):
            parts.append(("lit", pattern[pos:]))
        return cls(id=id, parts=tuple(parts))

    def pattern(self) -> str:
        return "".join(text if kind == "lit" else "{" + text + "}" for kind, text in self.parts)


@dataclass(frozen=True)
class FillerEntry:
    slot: str
    text: str
    extra: bool = False  # True for fillers added beyond the seed passages


@dataclass(frozen=True)
class FillerCatalog:
    entries: tuple[FillerEntry, ...]

    def fillers(self, slot: str) -> tuple[str, ...]:
        return tuple(e.text for e in self.entries if e.slot == slot)

    @property
    def slots(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for e in self.entries:
            seen.setdefault(e.slot, None)
        return tuple(seen)

    def check_covers(self, templates: Sequence[Template]) -> None:
        for tpl in templates:
            for name in tpl.slot_names:
                count = len(self.fillers(name))
                if count == 0:
                    raise SlotCoverageError(f"template {tpl.id}: no fillers for slot {name}")
                if count < 2:
                    raise SlotCoverageError(f"template {tpl.id}: slot {name} needs at least 2 fillers")


def generate(
    templates: Sequence[Template],
    fillers: FillerCatalog,
    n: int,
    seed: int,
) -> list[AnnotatedPassage]:
    """Sample n passages uniformly over templates, fillers uniformly per slot.

    Each slot occurrence draws its filler independently. Gold spans are
    exactly the filler character ranges.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not templates:
        raise ValueError("need at least one template")
    fillers.check_covers(templates)

    rng = random.Random(seed)
    passages: list[AnnotatedPassage] = []
    for i in range(n):
        tpl = templates[rng.randrange(len(templates))]
        pieces: list[str] = []
        spans: list[AnswerSpan] = []
        pos = 0
        for kind, value in tpl.parts:
            if kind == "lit":
                pieces.append(value)
                pos += len(value)
            else:
                choice = rng.choice(fillers.fillers(value))
                pieces.append(choice)
                spans.append(AnswerSpan(pos, pos + len(choice), choice))
                pos += len(choice)
        text = "".join(pieces)
        pid = f"synth-{i:05d}-{tpl.id}"
        passages.append(AnnotatedPassage(Passage.from_text(pid, text), tuple(spans)))
    return passages


def parse_catalog(text: str, source: str = "<catalog>") -> tuple[list[Template], FillerCatalog]:
    """Parse the line-oriented catalog format.

    Recognized entries::

        template: <id>: <text with {SLOT} placeholders>
        slot: <SLOT>: <filler text>
        slot: <SLOT> [extra]: <filler text>

    ``[extra]`` marks fillers added beyond the seed passages.
    """
    templates: list[Template] = []
    entries: list[FillerEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("template:"):
            body = line[len("template:") :].strip()
            tid, sep, pattern = body.partition(":")
            if not sep or not tid.strip() or not pattern.strip():
                raise CatalogError(f"{source}:{lineno}: expected 'template: <id>: <text>'")
            templates.append(Template.from_pattern(tid.strip(), pattern.strip()))
        elif line.startswith("slot:"):
            body = line[len("slot:") :].strip()
            head, sep, filler = body.partition(":")
            if not sep or not filler.strip():
                raise CatalogError(f"{source}:{lineno}: expected 'slot: <NAME>[ [extra]]: <text>'")
            head = head.strip()
            extra = False
            if head.endswith("[extra]"):
                extra = True
                head = head[: -len("[extra]")].strip()
            if not re.fullmatch(r"[A-Z][A-Z0-9_]*", head):
                raise CatalogError(f"{source}:{lineno}: bad slot name {head!r}")
            entries.append(FillerEntry(slot=head, text=filler.strip(), extra=extra))
        else:
            raise CatalogError(f"{source}:{lineno}: unrecognized line {line!r}")
    return templates, FillerCatalog(tuple(entries))


def load_catalog(path: str | Path) -> tuple[list[Template], FillerCatalog]:
    path = Path(path)
    return parse_catalog(path.read_text(encoding="utf-8"), source=str(path))


def write_catalog(templates: Sequence[Template], fillers: FillerCatalog, path: str | Path) -> None:
    lines = [f"template: {tpl.id}: {tpl.pattern()}" for tpl in templates]
    lines += [
        f"slot: {e.slot} [extra]: {e.text}" if e.extra else f"slot: {e.slot}: {e.text}"
        for e in fillers.entries
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def default_cooking_templates() -> tuple[list[Template], FillerCatalog]:
    """The shipped cooking catalog (see data/cooking_catalog.txt)."""
    text = resources.files("maskextract.data").joinpath("cooking_catalog.txt").read_text("utf-8")
    templates, catalog = parse_catalog(text, source="cooking_catalog.txt")
    catalog.check_covers(templates)
    return templates, catalog

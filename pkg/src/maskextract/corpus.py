"""Passage loading, word tokenization, span/label alignment, and corpus stats.

Two on-disk formats are understood:

* SQuAD v1.1 JSON (read only): ``data -> paragraphs -> context`` plus
  ``qas -> answers`` with ``answer_start``/``text``.
* the annotation jsonl format (read/write): one JSON record per line,
  ``{"id": str, "context": str, "answers": [{"text", "char_start", "char_end"}]}``
  with half-open Unicode code-point offsets.

All offsets everywhere in this package are half-open code-point ranges.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .util import write_jsonl, read_jsonl


class CorpusError(Exception):
    """Base class for corpus-level failures."""


class CorpusFormatError(CorpusError):
    """The file as a whole cannot be parsed (names the offending path)."""


class EmptyTextError(CorpusError):
    """Text with no word tokens where at least one is required."""


class EmptyCorpusError(CorpusError):
    """An operation that needs passages received none."""


_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize_words(text: str) -> tuple[tuple[str, ...], tuple[tuple[int, int], ...]]:
    """Split text into word tokens with exact character offsets.

    Alphanumeric runs are words; every other non-space character is its own
    token, so punctuation never sticks to a word. The offsets round-trip:
    ``text[start:end]`` recovers each token.
    """
    tokens: list[str] = []
    offsets: list[tuple[int, int]] = []
    for m in _TOKEN_RE.finditer(text):
        tokens.append(m.group())
        offsets.append((m.start(), m.end()))
    if not tokens:
        raise EmptyTextError("text contains no word tokens")
    return tuple(tokens), tuple(offsets)


@dataclass(frozen=True)
class Passage:
    """A context passage with its word tokenization.

    ``word_offsets[i]`` is the half-open character range of ``word_tokens[i]``
    in ``text``; ranges are strictly increasing and non-overlapping.
    """

    id: str
    text: str
    word_tokens: tuple[str, ...]
    word_offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.word_tokens) != len(self.word_offsets) or not self.word_tokens:
            raise ValueError(f"passage {self.id}: tokens and offsets must align and be non-empty")
        prev_end = -1
        for tok, (start, end) in zip(self.word_tokens, self.word_offsets):
            if not (0 <= start < end <= len(self.text)):
                raise ValueError(f"passage {self.id}: offset ({start},{end}) out of bounds")
            if start < prev_end:
                raise ValueError(f"passage {self.id}: overlapping word offsets")
            if self.text[start:end] != tok:
                raise ValueError(f"passage {self.id}: offset ({start},{end}) does not recover {tok!r}")
            prev_end = end

    @classmethod
    def from_text(cls, id: str, text: str) -> "Passage":
        tokens, offsets = tokenize_words(text)
        return cls(id=id, text=text, word_tokens=tokens, word_offsets=offsets)


@dataclass(frozen=True)
class AnswerSpan:
    """A gold answer as a half-open character range plus its surface text."""

    char_start: int
    char_end: int
    answer_text: str


@dataclass(frozen=True)
class AnnotatedPassage:
    """A passage plus zero or more gold answer spans (spans may overlap)."""

    passage: Passage
    spans: tuple[AnswerSpan, ...]

    def __post_init__(self):
        text = self.passage.text
        for span in self.spans:
            if not (0 <= span.char_start < span.char_end <= len(text)):
                raise ValueError(
                    f"passage {self.passage.id}: span ({span.char_start},{span.char_end}) out of bounds"
                )
            if text[span.char_start : span.char_end] != span.answer_text:
                raise ValueError(
                    f"passage {self.passage.id}: span text mismatch at ({span.char_start},{span.char_end})"
                )


@dataclass(frozen=True)
class TokenLabelSeq:
    """Per-word-token binary answer labels (1 = answer token)."""

    passage_id: str
    labels: tuple[int, ...]


@dataclass(frozen=True)
class CorpusStats:
    passage_count: int
    avg_passage_length: float
    answer_context_ratio: float


@dataclass(frozen=True)
class RejectedRecord:
    """One discarded answer record and why it was discarded."""

    passage_id: str
    reason: str
    detail: str = ""


@dataclass
class LoadReport:
    """Loader output: the passages that survived plus per-record rejects."""

    passages: list[AnnotatedPassage] = field(default_factory=list)
    rejects: list[RejectedRecord] = field(default_factory=list)


def _validated_spans(
    passage_id: str,
    context: str,
    raw_spans: Iterable[tuple[int, int, str]],
    rejects: list[RejectedRecord],
) -> tuple[AnswerSpan, ...]:
    """Keep well-formed spans, dedup by (start, end), reject the rest."""
    seen: set[tuple[int, int]] = set()
    spans: list[AnswerSpan] = []
    for start, end, text in raw_spans:
        if not (0 <= start < end <= len(context)):
            rejects.append(RejectedRecord(passage_id, "span out of bounds", f"({start},{end})"))
            continue
        if context[start:end] != text:
            rejects.append(
                RejectedRecord(
                    passage_id,
                    "span text mismatch",
                    f"({start},{end}) expected {text!r} found {context[start:end]!r}",
                )
            )
            continue
        if (start, end) in seen:
            continue
        seen.add((start, end))
        spans.append(AnswerSpan(start, end, text))
    spans.sort(key=lambda s: (s.char_start, s.char_end))
    return tuple(spans)


def load_squad(path: str | Path) -> LoadReport:
    """Load a SQuAD v1.1 style JSON file.

    One :class:`AnnotatedPassage` per unique paragraph context (duplicate
    contexts are merged). Answer spans come from ``answer_start`` with
    ``char_end = answer_start + len(text)`` and are deduplicated by range.
    Answers whose text does not match the context substring are rejected
    per record; the passage is still loaded with its remaining spans.
    Question text is ignored.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        articles = doc["data"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorpusFormatError(f"{path}: not a SQuAD v1.1 JSON file ({exc})") from exc

    report = LoadReport()
    by_context: dict[str, list[tuple[int, int, str]]] = {}
    order: list[str] = []
    try:
        for article in articles:
            for para in article["paragraphs"]:
                context = para["context"]
                if context not in by_context:
                    by_context[context] = []
                    order.append(context)
                for qa in para["qas"]:
                    for ans in qa["answers"]:
                        start = int(ans["answer_start"])
                        text = ans["text"]
                        by_context[context].append((start, start + len(text), text))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusFormatError(f"{path}: malformed SQuAD record ({exc})") from exc

    for i, context in enumerate(order):
        pid = f"squad-{i:05d}"
        spans = _validated_spans(pid, context, by_context[context], report.rejects)
        report.passages.append(AnnotatedPassage(Passage.from_text(pid, context), spans))
    return report


def load_exhaustive(path: str | Path) -> LoadReport:
    """Load the annotation jsonl format.

    Each record yields one passage; spans failing bounds or text checks are
    rejected individually (reasons "span out of bounds" / "span text
    mismatch") and the passage keeps the rest. Records missing required
    fields are rejected whole.
    """
    path = Path(path)
    report = LoadReport()
    try:
        records = list(read_jsonl(path))
    except (OSError, ValueError) as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc

    for n, rec in enumerate(records):
        try:
            pid = str(rec["id"])
            context = rec["context"]
            answers = rec["answers"]
            raw = [(int(a["char_start"]), int(a["char_end"]), a["text"]) for a in answers]
        except (KeyError, TypeError, ValueError) as exc:
            report.rejects.append(
                RejectedRecord(str(rec.get("id", f"record-{n}")), "malformed record", str(exc))
            )
            continue
        spans = _validated_spans(pid, context, raw, report.rejects)
        report.passages.append(AnnotatedPassage(Passage.from_text(pid, context), spans))
    return report


def write_exhaustive(passages: Sequence[AnnotatedPassage], path: str | Path) -> None:
    """Write passages in the annotation jsonl format (UTF-8, one per line)."""
    write_jsonl(
        path,
        (
            {
                "id": ap.passage.id,
                "context": ap.passage.text,
                "answers": [
                    {"text": s.answer_text, "char_start": s.char_start, "char_end": s.char_end}
                    for s in ap.spans
                ],
            }
            for ap in passages
        ),
    )


def spans_to_labels(ap: AnnotatedPassage) -> TokenLabelSeq:
    """Project gold spans onto word tokens.

    A token is labeled 1 iff its character range overlaps any gold span by
    at least one character; overlapping spans union naturally.
    """
    labels = [0] * len(ap.passage.word_tokens)
    for span in ap.spans:
        for i, (start, end) in enumerate(ap.passage.word_offsets):
            if start < span.char_end and span.char_start < end:
                labels[i] = 1
    return TokenLabelSeq(ap.passage.id, tuple(labels))


def corpus_stats(corpus: Sequence[AnnotatedPassage]) -> CorpusStats:
    """Count passages, mean word-token length, and the answer/context ratio.

    The ratio is micro-averaged over tokens: (sum of positive labels) /
    (sum of tokens), not a per-passage mean.
    """
    if not corpus:
        raise EmptyCorpusError("corpus_stats needs at least one passage")
    total_tokens = 0
    positive_tokens = 0
    for ap in corpus:
        labels = spans_to_labels(ap).labels
        total_tokens += len(labels)
        positive_tokens += sum(labels)
    return CorpusStats(
        passage_count=len(corpus),
        avg_passage_length=total_tokens / len(corpus),
        answer_context_ratio=positive_tokens / total_tokens,
    )


def stats_report_text(stats: CorpusStats) -> str:
    """Flat key-value rendering for the stats report file."""
    return (
        f"passage_count = {stats.passage_count}\n"
        f"avg_passage_length = {stats.avg_passage_length:.4f}\n"
        f"answer_context_ratio = {stats.answer_context_ratio:.6f}\n"
    )

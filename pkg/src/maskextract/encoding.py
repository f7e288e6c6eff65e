"""Vocabulary and subword encoding for the neural modules.

The built-in vocabulary is word-level (one subword per word token, built
from a training corpus), but every consumer works through the
``subword_to_word`` map, so many-to-one subword tokenizations plug in
unchanged. Special positions (sequence delimiters, padding) map to word
index -1 and are never maskable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import torch

from .corpus import Passage

PAD, UNK, BOS, EOS, MASK = 0, 1, 2, 3, 4
SPECIAL_TOKENS = ("<pad>", "<unk>", "<s>", "</s>", "<mask>")


@dataclass(frozen=True)
class EncoderConfig:
    """Transformer encoder shape shared by the masker and reconstructor."""

    vocab_size: int
    num_layers: int = 2
    hidden_size: int = 64
    num_heads: int = 4
    max_input_length: int = 512
    pretrained_source: str | None = None

    def __post_init__(self):
        if self.hidden_size % self.num_heads != 0:
            raise ValueError("hidden_size must be divisible by num_heads")
        if self.max_input_length < 8:
            raise ValueError("max_input_length must be >= 8")
        if self.vocab_size <= len(SPECIAL_TOKENS):
            raise ValueError("vocab_size must exceed the special-token count")

    @classmethod
    def tiny(cls, vocab_size: int, max_input_length: int = 512) -> "EncoderConfig":
        """Desk-scale default: 2 layers, hidden 64, 4 heads."""
        return cls(vocab_size=vocab_size, num_layers=2, hidden_size=64, num_heads=4,
                   max_input_length=max_input_length)

    @classmethod
    def full(cls, vocab_size: int, pretrained_source: str | None = None) -> "EncoderConfig":
        """Full-scale shape (12 layers, hidden 768, 12 heads, max length 512).

        Meant to be paired with a supplied pretrained checkpoint; training it
        from scratch at desk scale is not useful.
        """
        return cls(vocab_size=vocab_size, num_layers=12, hidden_size=768, num_heads=12,
                   max_input_length=512, pretrained_source=pretrained_source)


class Vocab:
    """Word-level vocabulary with reserved special tokens at ids 0..4."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[: len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            tokens = list(SPECIAL_TOKENS) + [t for t in tokens if t not in SPECIAL_TOKENS]
        self.tokens: list[str] = list(tokens)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, word: str) -> int:
        return self.index.get(word, UNK)

    @classmethod
    def from_passages(cls, passages: Iterable[Passage], max_size: int | None = None) -> "Vocab":
        counts: dict[str, int] = {}
        for p in passages:
            for tok in p.word_tokens:
                counts[tok] = counts.get(tok, 0) + 1
        ordered = sorted(counts, key=lambda t: (-counts[t], t))
        if max_size is not None:
            ordered = ordered[: max(0, max_size - len(SPECIAL_TOKENS))]
        return cls(list(SPECIAL_TOKENS) + ordered)


@dataclass
class SubwordEncoding:
    """A passage rendered as model input ids.

    ``subword_to_word[i]`` is the word-token index feeding position i, or -1
    for special positions. ``attention_mask`` is all True here; padding only
    appears after batch collation.
    """

    passage_id: str
    subword_ids: torch.Tensor          # long, [L]
    subword_to_word: tuple[int, ...]   # len L, -1 at special positions
    attention_mask: torch.Tensor       # bool, [L]
    special_mask: torch.Tensor         # bool, [L]
    truncated: bool = False
    unk_count: int = 0

    def __len__(self) -> int:
        return int(self.subword_ids.shape[0])


def encode_subwords(passage: Passage, vocab: Vocab, config: EncoderConfig) -> SubwordEncoding:
    """Encode a passage as <s> tokens </s>, truncating at max_input_length.

    Words the vocabulary cannot represent become the unknown token and are
    counted in ``unk_count``. Truncation drops trailing words (the sequence
    delimiters always survive) and sets ``truncated``.
    """
    max_words = config.max_input_length - 2
    words = passage.word_tokens
    truncated = len(words) > max_words
    kept = words[:max_words]

    ids = [BOS]
    word_map = [-1]
    unk_count = 0
    for wi, word in enumerate(kept):
        tid = vocab.encode(word)
        if tid == UNK:
            unk_count += 1
        ids.append(tid)
        word_map.append(wi)
    ids.append(EOS)
    word_map.append(-1)

    n = len(ids)
    special = torch.zeros(n, dtype=torch.bool)
    special[0] = True
    special[-1] = True
    return SubwordEncoding(
        passage_id=passage.id,
        subword_ids=torch.tensor(ids, dtype=torch.long),
        subword_to_word=tuple(word_map),
        attention_mask=torch.ones(n, dtype=torch.bool),
        special_mask=special,
        truncated=truncated,
        unk_count=unk_count,
    )


@dataclass
class EncodingBatch:
    """Padded stack of encodings. PAD positions count as special and invalid."""

    ids: torch.Tensor         # long, [B, L]
    attention: torch.Tensor   # bool, [B, L], False at padding
    special: torch.Tensor     # bool, [B, L], True at delimiters and padding
    encodings: list[SubwordEncoding] = field(default_factory=list)

    @property
    def nonspecial(self) -> torch.Tensor:
        """Positions that carry passage content (loss-bearing)."""
        return self.attention & ~self.special


def collate(encodings: Sequence[SubwordEncoding]) -> EncodingBatch:
    if not encodings:
        raise ValueError("cannot collate an empty batch")
    max_len = max(len(e) for e in encodings)
    b = len(encodings)
    ids = torch.full((b, max_len), PAD, dtype=torch.long)
    attention = torch.zeros((b, max_len), dtype=torch.bool)
    special = torch.ones((b, max_len), dtype=torch.bool)
    for i, enc in enumerate(encodings):
        n = len(enc)
        ids[i, :n] = enc.subword_ids
        attention[i, :n] = enc.attention_mask
        special[i, :n] = enc.special_mask
    return EncodingBatch(ids=ids, attention=attention, special=special, encodings=list(encodings))

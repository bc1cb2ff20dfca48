"""Unlabeled attachment score, per sentence, per corpus and per dependent POS tag."""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence

from mbrdep.core import aligned


def matches(pred: Sequence[int], gold: Sequence[int]) -> int:
    if len(pred) != len(gold):
        raise ValueError(f"length mismatch: {len(pred)} predicted heads vs {len(gold)} gold heads")
    return sum(1 for p, g in zip(pred, gold) if p == g)


def sentence_uas(pred: Sequence[int], gold: Sequence[int]) -> float:
    return matches(pred, gold) / len(gold)


def uas_counts(pred, gold) -> tuple[int, int]:
    """(matched heads, total words) over aligned corpora."""
    pred_heads, gold_heads = aligned(pred, gold)
    hit = sum(matches(p, g) for p, g in zip(pred_heads, gold_heads))
    return hit, sum(len(g) for g in gold_heads)


def corpus_uas(pred, gold) -> float:
    """Micro-averaged UAS: matched heads over all words, not a mean of sentence scores."""
    hit, total = uas_counts(pred, gold)
    return hit / total if total else 0.0


def uas_by_pos(pred, gold) -> dict[str, tuple[float, int]]:
    """Micro UAS and word count for each POS tag of the dependent, as tagged in ``gold``.

    ``gold`` must be a CorpusFile (it supplies the tags). Untagged words fall
    under the literal tag ``_``.
    """
    pred_heads, _ = aligned(pred, gold)
    hits: dict[str, int] = defaultdict(int)
    support: dict[str, int] = defaultdict(int)
    for p, (sentence, g) in zip(pred_heads, gold.sentences):
        for tok, ph, gh in zip(sentence.tokens, p, g):
            support[tok.pos] += 1
            hits[tok.pos] += ph == gh
    return {pos: (hits[pos] / support[pos], support[pos]) for pos in sorted(support)}

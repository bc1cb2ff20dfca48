"""Synthetic gold trees and noisy individuals for controlled ensemble experiments."""

from __future__ import annotations

import random
from typing import Sequence

from mbrdep.core import HeadVector


def random_projective_tree(n: int, rng: random.Random) -> HeadVector:
    heads = [0] * n

    def forest(b: int, e: int, parent: int) -> None:
        while b < e:
            m = rng.randint(b + 1, e)
            root = rng.randint(b, m - 1)
            heads[root - 1] = parent
            forest(b, root, root)
            forest(root + 1, m, root)
            b = m

    root = rng.randint(1, n)
    forest(1, root, root)
    forest(root + 1, n + 1, root)
    return tuple(heads)


def gold_corpus(n_sentences: int, rng: random.Random, min_len: int = 5, max_len: int = 15) -> list[HeadVector]:
    return [random_projective_tree(rng.randint(min_len, max_len), rng) for _ in range(n_sentences)]


def _descendants(heads: Sequence[int], word: int) -> set[int]:
    out = {word}
    changed = True
    while changed:
        changed = False
        for j, h in enumerate(heads, start=1):
            if h in out and j not in out:
                out.add(j)
                changed = True
    return out


def corrupt(heads: Sequence[int], error_rate: float, rng: random.Random) -> HeadVector:
    """Reattach each word with probability ``error_rate`` to a different head, keeping a tree.

    The new head is drawn uniformly among positions (ROOT included) that are
    neither the word's current head nor inside its own subtree, so results
    may be non-projective or multi-root but never cyclic.
    """
    out = list(heads)
    n = len(out)
    for j in range(1, n + 1):
        if rng.random() >= error_rate:
            continue
        banned = _descendants(out, j) | {out[j - 1]}
        options = [h for h in range(n + 1) if h not in banned]
        if options:
            out[j - 1] = rng.choice(options)
    return tuple(out)


def noisy_individual(gold: Sequence[Sequence[int]], error_rate: float, rng: random.Random) -> list[HeadVector]:
    return [corrupt(g, error_rate, rng) for g in gold]

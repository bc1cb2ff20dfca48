"""Ensemble diversity measures over per-word head decisions.

Every word of every sentence in scope is one sample. Society entropy looks
only at which heads the individuals pick and needs no gold parse; the other
measures only see whether each individual got each word right.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from mbrdep.core import aligned

METRICS = ("society-entropy", "disagreement", "kw-variance", "fleiss-kappa", "kuncheva", "pcdm")
FLEISS_FORMS = ("as-printed", "classic")


class UndefinedMetricError(ValueError):
    """The measure has a zero denominator on this input."""


@dataclass(frozen=True)
class DiversityConfig:
    metric: str = "society-entropy"
    log_base: float = math.e
    fleiss_form: str = "as-printed"

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValueError(f"unknown diversity metric {self.metric!r}; expected one of {METRICS}")
        if not self.log_base > 1:
            raise ValueError(f"log_base must be > 1, got {self.log_base}")
        if self.fleiss_form not in FLEISS_FORMS:
            raise ValueError(f"unknown Fleiss form {self.fleiss_form!r}; expected one of {FLEISS_FORMS}")

    @property
    def needs_gold(self) -> bool:
        return self.metric != "society-entropy"


def head_matrix(selected) -> np.ndarray:
    """K x N matrix of heads, N = all words of all sentences pooled."""
    lists = aligned(*selected)
    if not lists:
        raise ValueError("no individuals selected")
    return np.array([[h for sent in parses for h in sent] for parses in lists], dtype=np.int64).reshape(len(lists), -1)


def correct_matrix(selected, gold) -> np.ndarray:
    """K x N boolean matrix: did individual k get word j's head right."""
    heads = head_matrix([gold, *selected])
    return heads[1:] == heads[0]


def society_distribution(heads_at_j: Iterable[int]) -> dict[int, Fraction]:
    """Fraction of individuals choosing each head for one word."""
    counts = Counter(heads_at_j)
    total = sum(counts.values())
    if not total:
        raise ValueError("society distribution of an empty selection")
    return {a: Fraction(c, total) for a, c in sorted(counts.items())}


def word_entropies(heads: np.ndarray) -> np.ndarray:
    """Natural-log entropy of the society distribution of each column of a K x N head matrix."""
    k = heads.shape[0]
    # same[i, j] = how many individuals agree with individual i on word j
    same = (heads[:, None, :] == heads[None, :, :]).sum(axis=1)
    # sum_a (c_a/K) log(K/c_a) written per individual; each term >= 0, exactly 0 on unanimity
    return np.log(k / same).sum(axis=0) / k


def _entropy(heads: np.ndarray, log_base: float) -> float:
    k, n = heads.shape
    if n == 0:
        raise ValueError("no words in scope")
    value = math.fsum(word_entropies(heads)) / n / math.log(log_base)
    # the mean of values each <= log K can overshoot by an ulp
    return min(value, math.log(k) / math.log(log_base))


def society_entropy(selected, log_base: float = math.e) -> float:
    """Average entropy of the per-word head distribution over all pooled words."""
    return _entropy(head_matrix(selected), log_base)


def society_entropy_by_sentence(selected, log_base: float = math.e) -> list[float]:
    lists = aligned(*selected)
    return [
        _entropy(np.array([parses[i] for parses in lists], dtype=np.int64), log_base)
        for i in range(len(lists[0]))
    ]


def _tallies(correct: np.ndarray) -> tuple[np.ndarray, np.ndarray, int, int]:
    k, n = correct.shape
    if k == 0:
        raise ValueError("no individuals selected")
    if n == 0:
        raise ValueError("no words in scope")
    c = correct.sum(axis=0).astype(np.int64)
    return c, k - c, k, n


def _disagreement(correct: np.ndarray) -> float:
    _, _, k, n = _tallies(correct)
    xor = correct[:, None, :] ^ correct[None, :, :]
    return int(xor.sum()) / (n * k * k)


def _kw_variance(correct: np.ndarray) -> float:
    c, w, k, n = _tallies(correct)
    return int((c * w).sum()) / (n * k * k)


def _fleiss_kappa(correct: np.ndarray, form: str = "as-printed") -> float:
    c, w, k, n = _tallies(correct)
    p_bar = Fraction(int(c.sum()), n * k)
    if p_bar in (0, 1):
        raise UndefinedMetricError(f"Fleiss' kappa undefined: mean accuracy is {p_bar}")
    if k == 1:
        raise UndefinedMetricError("Fleiss' kappa undefined for a single individual")
    cw = int((c * w).sum())
    spread = float(p_bar * (1 - p_bar))
    if form == "as-printed":
        return cw / (n * k * (1 - k) * spread)
    if form == "classic":
        return 1 - cw / (n * k * (k - 1) * spread)
    raise ValueError(f"unknown Fleiss form {form!r}")


def _kuncheva(correct: np.ndarray) -> float:
    c, w, k, n = _tallies(correct)
    denom = n * (k - math.ceil(k / 2))
    if denom == 0:
        raise UndefinedMetricError("Kuncheva's diversity needs at least two individuals")
    return int(np.minimum(c, w).sum()) / denom


def _pcdm(correct: np.ndarray) -> float:
    c, _, k, n = _tallies(correct)
    # 0.1 <= c/k <= 0.9, in integers
    diverse = (10 * c >= k) & (10 * c <= 9 * k)
    return int(diverse.sum()) / n


def disagreement(selected, gold) -> float:
    """Mean ordered-pair disagreement (self-pairs included), in [0, 1/2]."""
    return _disagreement(correct_matrix(selected, gold))


def kw_variance(selected, gold) -> float:
    return _kw_variance(correct_matrix(selected, gold))


def fleiss_kappa(selected, gold, form: str = "as-printed") -> float:
    """Fleiss' kappa over correct/incorrect votes.

    ``as-printed`` keeps a ``(1 - K)`` factor in the denominator, which makes
    values negative; ``classic`` is the textbook ``1 - observed/expected``.
    """
    return _fleiss_kappa(correct_matrix(selected, gold), form)


def kuncheva_diversity(selected, gold) -> float:
    return _kuncheva(correct_matrix(selected, gold))


def pcdm(selected, gold) -> float:
    """Share of words that between 10% and 90% of the individuals (inclusive) get right."""
    return _pcdm(correct_matrix(selected, gold))


def from_matrices(heads: np.ndarray, correct: np.ndarray | None, config: DiversityConfig) -> float:
    """Configured diversity of precomputed K x N head / correctness matrices.

    A single individual has no diversity: every metric returns 0 for K = 1.
    """
    if heads.shape[0] == 1:
        return 0.0
    if config.metric == "society-entropy":
        return _entropy(heads, config.log_base)
    if correct is None:
        raise ValueError(f"metric {config.metric!r} needs gold parses")
    if config.metric == "disagreement":
        return _disagreement(correct)
    if config.metric == "kw-variance":
        return _kw_variance(correct)
    if config.metric == "fleiss-kappa":
        return _fleiss_kappa(correct, config.fleiss_form)
    if config.metric == "kuncheva":
        return _kuncheva(correct)
    return _pcdm(correct)


def diversity(selected: Sequence, gold=None, config: DiversityConfig | None = None) -> float:
    config = config or DiversityConfig()
    heads = head_matrix(selected)
    correct = None
    if gold is not None:
        correct = correct_matrix(selected, gold)
    return from_matrices(heads, correct, config)

"""UAS-objective MBR aggregation.

The ensemble parse of a sentence is the projective single-root tree that
maximizes the summed (weighted) number of individuals agreeing with each of
its attachments. Votes are kept as exact integers: rational weights are
scaled by the least common multiple of their denominators, which keeps the
argmax unchanged and makes ties exact.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from mbrdep.core import HeadVector, aligned, as_fraction

OBJECTIVES = ("uas", "f1")


class DecodeStats:
    """Counts decoder work in this process; used to compare selection strategies."""

    def __init__(self) -> None:
        self.reset()

    def reset(self) -> None:
        self.sentences = 0
        self.ensembles = 0


stats = DecodeStats()


@dataclass(frozen=True)
class VoteMatrix:
    """Weighted head votes of one sentence.

    ``counts[a, j]`` is the vote mass for head ``a`` of word ``j`` times
    ``scale``; column 0 is unused so that word positions index directly.
    """

    n: int
    counts: np.ndarray
    scale: int = 1

    def vote(self, head: int, word: int) -> Fraction:
        return Fraction(int(self.counts[head, word]), self.scale)

    @property
    def votes(self) -> list[list[Fraction]]:
        """The (n+1) x (n+1) table of exact votes, row = head, column = word."""
        return [[self.vote(a, j) for j in range(self.n + 1)] for a in range(self.n + 1)]

    def score(self, heads: Sequence[int]) -> Fraction:
        if len(heads) != self.n:
            raise ValueError(f"parse of length {len(heads)} scored against {self.n}-word votes")
        total = self.counts[np.asarray(heads, dtype=np.intp), np.arange(1, self.n + 1)].sum()
        return Fraction(int(total), self.scale)


def integer_weights(weights: Sequence) -> tuple[list[int], int]:
    """Scale non-negative rational weights to integers sharing one denominator."""
    fr = [as_fraction(w) for w in weights]
    if any(w < 0 for w in fr):
        raise ValueError("weights must be non-negative")
    if not any(w > 0 for w in fr):
        raise ValueError("at least one weight must be positive")
    scale = math.lcm(*(w.denominator for w in fr))
    return [int(w * scale) for w in fr], scale


def build_vote_matrix(parses: Sequence[Sequence[int]], weights: Sequence | None = None) -> VoteMatrix:
    if not parses:
        raise ValueError("no parses to vote with")
    if weights is None:
        weights = [1] * len(parses)
    if len(weights) != len(parses):
        raise ValueError(f"{len(weights)} weights for {len(parses)} parses")
    n = len(parses[0])
    for p in parses:
        if len(p) != n:
            raise ValueError(f"parse lengths differ: {len(p)} vs {n}")
    if n == 0:
        raise ValueError("empty sentence")
    iw, scale = integer_weights(weights)
    dtype = np.int64 if sum(iw) * n < 2**62 else object
    counts = np.zeros((n + 1, n + 1), dtype=dtype)
    cols = np.arange(1, n + 1)
    for p, w in zip(parses, iw):
        if w:
            counts[np.asarray(p, dtype=np.intp), cols] += w
    return VoteMatrix(n, counts, scale)


def eisner_decode(v: VoteMatrix) -> HeadVector:
    """Highest-scoring projective tree with exactly one ROOT dependent, in O(n^3).

    Ties go to the smallest split point and, at the top, to the leftmost
    ROOT dependent, so the output is fully deterministic.
    """
    n = v.n
    if n < 1:
        raise ValueError("cannot decode an empty sentence")
    stats.sentences += 1
    if n == 1:
        return (0,)

    # word-only chart over 0-based positions; S[h, d] scores arc h -> d
    S = v.counts[1:, 1:]
    root = v.counts[0, 1:]
    dtype = v.counts.dtype
    CL = np.zeros((n, n), dtype=dtype)  # complete, head at right end
    CR = np.zeros((n, n), dtype=dtype)  # complete, head at left end
    IL = np.zeros((n, n), dtype=dtype)  # incomplete, arc t -> s
    IR = np.zeros((n, n), dtype=dtype)  # incomplete, arc s -> t
    bI = np.zeros((n, n), dtype=np.intp)
    bCL = np.zeros((n, n), dtype=np.intp)
    bCR = np.zeros((n, n), dtype=np.intp)

    for k in range(1, n):
        s = np.arange(n - k)
        t = s + k
        rows = np.arange(n - k)
        sc, tc = s[:, None], t[:, None]

        r = sc + np.arange(k)[None, :]  # s .. t-1
        vals = CR[sc, r] + CL[r + 1, tc]
        a = np.argmax(vals, axis=1)
        best = vals[rows, a]
        IR[s, t] = best + S[s, t]
        IL[s, t] = best + S[t, s]
        bI[s, t] = s + a

        r = sc + 1 + np.arange(k)[None, :]  # s+1 .. t
        vals = IR[sc, r] + CR[r, tc]
        a = np.argmax(vals, axis=1)
        CR[s, t] = vals[rows, a]
        bCR[s, t] = s + 1 + a

        r = sc + np.arange(k)[None, :]  # s .. t-1
        vals = CL[sc, r] + IL[r, tc]
        a = np.argmax(vals, axis=1)
        CL[s, t] = vals[rows, a]
        bCL[s, t] = s + a

    top = CL[0, :] + CR[:, n - 1] + root
    r0 = int(np.argmax(top))

    heads = [0] * n
    stack = [("CL", 0, r0), ("CR", r0, n - 1)]
    while stack:
        kind, s, t = stack.pop()
        if s == t:
            continue
        if kind == "CR":
            r = int(bCR[s, t])
            stack += [("IR", s, r), ("CR", r, t)]
        elif kind == "CL":
            r = int(bCL[s, t])
            stack += [("CL", s, r), ("IL", r, t)]
        else:
            if kind == "IR":
                heads[t] = s + 1
            else:
                heads[s] = t + 1
            r = int(bI[s, t])
            stack += [("CR", s, r), ("CL", r + 1, t)]
    heads[r0] = 0
    return tuple(heads)


def decode_sentence(parses: Sequence[Sequence[int]], weights: Sequence | None = None, objective: str = "uas") -> HeadVector:
    if objective == "uas":
        return eisner_decode(build_vote_matrix(parses, weights))
    if objective == "f1":
        from mbrdep.dpst import build_hit_counts, dpst_to_heads, f1_aggregate

        stats.sentences += 1
        return dpst_to_heads(f1_aggregate(build_hit_counts(parses, weights), len(parses[0])))
    raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")


def _decode_job(job):
    return decode_sentence(*job)


def aggregate_heads(outputs, weights: Sequence | None = None, objective: str = "uas", jobs: int = 1) -> list[HeadVector]:
    """Ensemble parse of every sentence; ``outputs`` are aligned parse-likes.

    When ``weights`` is None each individual's own ``weight`` attribute is
    used (1 for plain parse lists).
    """
    if not outputs:
        raise ValueError("need at least one individual")
    if weights is None:
        weights = [getattr(o, "weight", 1) for o in outputs]
    if len(weights) != len(outputs):
        raise ValueError(f"{len(weights)} weights for {len(outputs)} individuals")
    integer_weights(weights)  # fail early on bad weights
    per_individual = aligned(*outputs)
    jobs_in = [(list(sent), list(weights), objective) for sent in zip(*per_individual)]
    stats.ensembles += 1
    if jobs > 1 and len(jobs_in) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_decode_job, jobs_in, chunksize=max(1, len(jobs_in) // (4 * jobs))))
    return [_decode_job(j) for j in jobs_in]


def aggregate_corpus(outputs, weights: Sequence | None = None, objective: str = "uas", template=None, jobs: int = 1):
    """Aggregate aligned individuals into a CorpusFile.

    Sentence text and columns come from ``template`` if given, else from the
    first individual when it is a CorpusFile, else placeholders.
    """
    from mbrdep.conllu import CorpusFile

    heads = aggregate_heads(outputs, weights, objective, jobs)
    if template is None and isinstance(outputs[0], CorpusFile):
        template = outputs[0]
    if template is None:
        return CorpusFile.from_heads(heads, source="<ensemble>")
    return template.with_heads(heads, source="<ensemble>")


def weights_from_validation(outputs, gold, digits: int = 3) -> list[Fraction]:
    """Validation UAS of each individual, rounded to ``digits`` decimals (half-even)."""
    from mbrdep.uas import uas_counts

    out = []
    for o in outputs:
        hit, total = uas_counts(o, gold)
        out.append(Fraction(round(Fraction(hit, total) * 10**digits), 10**digits))
    return out

"""Dependency phrases, phrasal F1, and F1-objective aggregation.

A dependency phrase is a word together with all of its descendants. For a
projective tree each phrase is a contiguous span, and the phrases nest into
a tree (a DPST) where every node owns exactly one head word that is not
covered by any of its children. Spans are half-open: ``Span(b, e)`` covers
words ``b .. e-1``.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

from mbrdep.core import HeadVector, StructureError, aligned, as_fraction, is_well_formed, validate, yields

logger = logging.getLogger(__name__)


class Span(NamedTuple):
    begin: int
    end: int

    def __len__(self) -> int:  # type: ignore[override]
        return self.end - self.begin


@dataclass(frozen=True)
class DPST:
    """A node of a dependency-based phrase-structure tree; the root node stands for the tree."""

    span: Span
    head: int
    children: tuple[DPST, ...] = ()

    def nodes(self) -> Iterator[DPST]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    @property
    def n(self) -> int:
        return self.span.end - self.span.begin


HitCountTable = dict  # Span -> non-negative weight


def heads_to_dpst(parse: Sequence[int]) -> DPST:
    problems = validate(parse, len(parse))
    if problems:
        raise StructureError(f"cannot build a DPST from a {problems[0].kind} parse: {problems[0].detail}")
    n = len(parse)
    spans = yields(parse)
    children: list[list[int]] = [[] for _ in range(n + 1)]
    for j, h in enumerate(parse, start=1):
        children[h].append(j)

    def build(w: int) -> DPST:
        lo, hi, _ = spans[w - 1]
        return DPST(Span(lo, hi + 1), w, tuple(build(c) for c in children[w]))

    return build(children[0][0])


def check_dpst(tree: DPST) -> None:
    """Raise StructureError if ``tree`` breaks a DPST invariant."""
    if tree.span.begin != 1:
        raise StructureError(f"root span must start at 1, got {tree.span}")
    count = 0
    for node in tree.nodes():
        count += 1
        b, e = node.span
        if not b <= node.head < e:
            raise StructureError(f"head {node.head} outside its span {node.span}")
        # children plus the head word must tile the span left to right
        pos = b
        pieces = sorted([(c.span.begin, c.span.end) for c in node.children] + [(node.head, node.head + 1)])
        if [c.span for c in node.children] != sorted(c.span for c in node.children):
            raise StructureError(f"children of {node.span} are not ordered")
        for pb, pe in pieces:
            if pb != pos or pe <= pb:
                raise StructureError(f"children of {node.span} do not partition it around head {node.head}")
            pos = pe
        if pos != e:
            raise StructureError(f"children of {node.span} do not cover it")
    if count != tree.n:
        raise StructureError(f"{count} nodes for {tree.n} words")


def dpst_to_heads(tree: DPST) -> HeadVector:
    check_dpst(tree)
    heads = [0] * tree.n
    for node in tree.nodes():
        for c in node.children:
            heads[c.head - 1] = node.head
    return tuple(heads)


def extract_phrases(tree: DPST) -> set[Span]:
    return {node.span for node in tree.nodes()}


def _as_dpst(x) -> DPST:
    return x if isinstance(x, DPST) else heads_to_dpst(x)


def sentence_f1(a, b) -> float:
    """Phrasal F1 of two DPSTs (or parses convertible to them) over the same sentence."""
    a, b = _as_dpst(a), _as_dpst(b)
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n} words")
    ca, cb = extract_phrases(a), extract_phrases(b)
    return 2 * len(ca & cb) / (len(ca) + len(cb))


def corpus_f1(pred, gold) -> float:
    """Pooled phrasal F1; sentences where either side is not projective single-root are skipped."""
    pred_heads, gold_heads = aligned(pred, gold)
    overlap = total = 0
    for i, (p, g) in enumerate(zip(pred_heads, gold_heads), start=1):
        if not (is_well_formed(p) and is_well_formed(g)):
            logger.warning("sentence %d: skipped in F1, parse is not projective single-root", i)
            continue
        cp, cg = extract_phrases(heads_to_dpst(p)), extract_phrases(heads_to_dpst(g))
        overlap += len(cp & cg)
        total += len(cp) + len(cg)
    return 2 * overlap / total if total else 0.0


def build_hit_counts(parses: Sequence[Sequence[int]], weights: Sequence | None = None) -> HitCountTable:
    if weights is None:
        weights = [1] * len(parses)
    if len(weights) != len(parses):
        raise ValueError(f"{len(weights)} weights for {len(parses)} parses")
    h: dict[Span, Fraction] = defaultdict(Fraction)
    used = 0
    for k, (p, w) in enumerate(zip(parses, weights)):
        if not is_well_formed(p):
            logger.warning("individual %d skipped from F1 voting: parse is not projective single-root", k)
            continue
        used += 1
        w = as_fraction(w)
        for span in extract_phrases(heads_to_dpst(p)):
            h[span] += w
    if not used:
        raise ValueError("no individual has a projective single-root parse to vote with")
    return dict(h)


def hit_score(h: HitCountTable, tree: DPST) -> Fraction:
    return sum((as_fraction(h.get(s, 0)) for s in extract_phrases(tree)), Fraction(0))


def f1_aggregate(h: HitCountTable, n: int) -> DPST:
    """DPST over ``n`` words maximizing the total hit count of its phrases.

    ``best[b][e]`` is the best forest over ``b:e`` (one tree or several
    adjacent ones, the latter via a placeholder split); a node over ``b:e``
    with head ``j`` owns forests ``b:j`` and ``j+1:e`` as children. The full
    span must be a real node so the result has a single root. Ties prefer the
    smallest split and a real node over a placeholder.
    """
    if n < 1:
        raise ValueError("cannot aggregate an empty sentence")
    fr = {s: as_fraction(v) for s, v in h.items()}
    scale = math.lcm(*(v.denominator for v in fr.values())) if fr else 1
    hits = [[0] * (n + 2) for _ in range(n + 2)]
    for (b, e), v in fr.items():
        if not 1 <= b < e <= n + 1:
            raise ValueError(f"span {(b, e)} outside a {n}-word sentence")
        hits[b][e] = int(v * scale)

    best = [[0] * (n + 2) for _ in range(n + 2)]
    back: list[list[tuple[bool, int]]] = [[(True, 0)] * (n + 2) for _ in range(n + 2)]
    for width in range(1, n + 1):
        for b in range(1, n + 2 - width):
            e = b + width
            row_b = best[b]
            incl, incl_j = None, b
            for j in range(b, e):
                v = row_b[j] + best[j + 1][e]
                if incl is None or v > incl:
                    incl, incl_j = v, j
            incl += hits[b][e]
            excl, excl_j = None, 0
            if not (b == 1 and e == n + 1):
                for j in range(b + 1, e):
                    v = row_b[j] + best[j][e]
                    if excl is None or v > excl:
                        excl, excl_j = v, j
            if excl is None or incl >= excl:
                best[b][e], back[b][e] = incl, (True, incl_j)
            else:
                best[b][e], back[b][e] = excl, (False, excl_j)

    def forest(b: int, e: int) -> list[DPST]:
        if b == e:
            return []
        is_node, j = back[b][e]
        if is_node:
            return [DPST(Span(b, e), j, tuple(forest(b, j) + forest(j + 1, e)))]
        return forest(b, j) + forest(j, e)

    (root,) = forest(1, n + 1)
    return root

"""Sentences, dependency parses and their structural checks.

A parse is a plain tuple of head indices, one per word, where ``heads[j - 1]``
is the head of word ``j`` and ``0`` stands for the virtual ROOT.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

HeadVector = tuple[int, ...]


class StructureError(ValueError):
    """A head vector is not a tree (wrong length, self-loop, bad index, or cycle)."""


class AlignmentError(ValueError):
    """Corpora that should describe the same sentences do not."""


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: str = "_"
    deprel: str = "_"
    deps: str = "_"
    misc: str = "_"

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")

    @property
    def pos(self) -> str:
        """UPOS when present, otherwise XPOS (``_`` if neither)."""
        return self.upos if self.upos != "_" else self.xpos


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError(f"sentence {self.id!r} has no tokens")
        for expected, tok in enumerate(self.tokens, start=1):
            if tok.index != expected:
                raise ValueError(
                    f"sentence {self.id!r}: token indices must be consecutive from 1, "
                    f"found {tok.index} at position {expected}"
                )

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_forms(cls, id: str, forms: Iterable[str], pos: Iterable[str] | None = None) -> Sentence:
        forms = list(forms)
        tags = list(pos) if pos is not None else ["_"] * len(forms)
        return cls(id, tuple(Token(i, f, upos=t) for i, (f, t) in enumerate(zip(forms, tags), start=1)))


@dataclass(frozen=True)
class ParserOutput:
    """One ensemble individual: a parse for every sentence, in corpus order."""

    name: str
    parses: Mapping[str, HeadVector]
    weight: Fraction = field(default=Fraction(1))

    def __post_init__(self) -> None:
        object.__setattr__(self, "weight", as_fraction(self.weight))
        if self.weight < 0:
            raise ValueError(f"{self.name}: weight must be non-negative, got {self.weight}")
        object.__setattr__(self, "parses", {k: tuple(v) for k, v in self.parses.items()})
        for sid, heads in self.parses.items():
            try:
                check_tree(heads)
            except StructureError as exc:
                raise StructureError(f"{self.name}, sentence {sid}: {exc}") from None

    def head_vectors(self) -> list[HeadVector]:
        return list(self.parses.values())

    @classmethod
    def from_heads(cls, name: str, parses: Sequence[Sequence[int]], weight=1) -> ParserOutput:
        """Build an individual from a plain list of parses, ids ``"1"``, ``"2"``, ..."""
        return cls(name, {str(i): tuple(h) for i, h in enumerate(parses, start=1)}, weight)


def head_vectors(x) -> list[HeadVector]:
    """Per-sentence parses of anything parse-like (ParserOutput, CorpusFile, list of parses)."""
    if hasattr(x, "head_vectors"):
        return x.head_vectors()
    return [tuple(h) for h in x]


def aligned(*corpora) -> list[list[HeadVector]]:
    """Parse lists of several corpora, checked to have matching sentence counts and lengths."""
    lists = [head_vectors(c) for c in corpora]
    if not lists:
        return lists
    ref = lists[0]
    for k, other in enumerate(lists[1:], start=1):
        if len(other) != len(ref):
            raise AlignmentError(f"corpus {k} has {len(other)} sentences, corpus 0 has {len(ref)}")
        for i, (a, b) in enumerate(zip(ref, other), start=1):
            if len(a) != len(b):
                raise AlignmentError(f"sentence {i}: corpus {k} has {len(b)} words, corpus 0 has {len(a)}")
    return lists


def as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, float):
        # floats come from user input like 0.667; keep their decimal meaning
        return Fraction(repr(w))
    return Fraction(w)


class Violation(NamedTuple):
    kind: str
    detail: str


def check_tree(heads: Sequence[int], n: int | None = None) -> None:
    """Raise StructureError unless ``heads`` is a tree over ROOT (multi-root allowed)."""
    for v in _tree_violations(heads, n):
        raise StructureError(v.detail)


def _tree_violations(heads: Sequence[int], n: int | None) -> list[Violation]:
    out: list[Violation] = []
    size = len(heads)
    if n is not None and size != n:
        out.append(Violation("length", f"parse has {size} heads for {n} tokens"))
    if size == 0:
        out.append(Violation("length", "empty parse"))
        return out
    bad = False
    for j, h in enumerate(heads, start=1):
        if h == j:
            out.append(Violation("self-loop", f"word {j} is its own head"))
            bad = True
        elif not 0 <= h <= size:
            out.append(Violation("head-range", f"word {j} has head {h} outside 0..{size}"))
            bad = True
    if bad:
        return out
    # 0 = unvisited, 1 = on current path, 2 = reaches ROOT
    state = [0] * (size + 1)
    state[0] = 2
    reported: set[frozenset[int]] = set()
    for start in range(1, size + 1):
        path = []
        j = start
        while state[j] == 0:
            state[j] = 1
            path.append(j)
            j = heads[j - 1]
        if state[j] == 1:
            cycle = frozenset(path[path.index(j):])
            if cycle not in reported:
                reported.add(cycle)
                members = "->".join(str(w) for w in path[path.index(j):] + [j])
                out.append(Violation("cycle", f"cycle {members}"))
        for w in path:
            state[w] = 2
    return out


def yields(heads: Sequence[int]) -> list[tuple[int, int, int]]:
    """(leftmost, rightmost, size) of every word's descendant set, word itself included."""
    check_tree(heads)
    n = len(heads)
    lo = list(range(n + 1))
    hi = list(range(n + 1))
    size = [1] * (n + 1)
    for j in range(1, n + 1):
        h = heads[j - 1]
        while h != 0:
            lo[h] = min(lo[h], j)
            hi[h] = max(hi[h], j)
            size[h] += 1
            h = heads[h - 1]
    return [(lo[j], hi[j], size[j]) for j in range(1, n + 1)]


def is_projective(sentence_len: int, parse: Sequence[int]) -> bool:
    """True iff every word's yield is a contiguous interval of positions."""
    check_tree(parse, sentence_len)
    return all(b - a + 1 == s for a, b, s in yields(parse))


def is_single_root(parse: Sequence[int]) -> bool:
    check_tree(parse)
    return sum(1 for h in parse if h == 0) == 1


def validate(parse: Sequence[int], sentence: Sentence | int) -> list[Violation]:
    """Every defect of ``parse`` against ``sentence``; empty means projective single-root tree."""
    n = sentence if isinstance(sentence, int) else len(sentence)
    report = _tree_violations(parse, n)
    if report:
        return report
    roots = sum(1 for h in parse if h == 0)
    if roots > 1:
        report.append(Violation("multi-root", f"{roots} words attach to ROOT"))
    if not all(b - a + 1 == s for a, b, s in yields(parse)):
        report.append(Violation("non-projective", "some word has a non-contiguous yield"))
    return report


def is_well_formed(parse: Sequence[int]) -> bool:
    """Projective and single-root: the output space of both decoders."""
    return not validate(parse, len(parse))

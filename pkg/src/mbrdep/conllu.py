"""Reading and writing the CoNLL-U subset used as the toolkit's interchange format.

Only ID, FORM, UPOS/XPOS and HEAD carry meaning here; every other column is
kept verbatim so that ``write_corpus(read_corpus(f))`` reproduces a canonical
file byte for byte.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, NamedTuple, Sequence

from mbrdep.core import AlignmentError, HeadVector, ParserOutput, Sentence, StructureError, Token, validate

logger = logging.getLogger(__name__)

N_COLUMNS = 10


class ConlluError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class Entry(NamedTuple):
    sentence: Sentence
    heads: HeadVector


@dataclass(frozen=True)
class CorpusFile:
    sentences: tuple[Entry, ...]
    source: str = "<memory>"

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def head_vectors(self) -> list[HeadVector]:
        return [e.heads for e in self.sentences]

    @property
    def n_words(self) -> int:
        return sum(len(e.heads) for e in self.sentences)

    def to_output(self, name: str | None = None, weight=1) -> ParserOutput:
        return ParserOutput(
            name if name is not None else Path(self.source).stem,
            {e.sentence.id: e.heads for e in self.sentences},
            weight,
        )

    def with_heads(self, parses: Sequence[Sequence[int]], source: str = "<memory>") -> CorpusFile:
        """Same sentences with new parses; DEPREL and DEPS are blanked since they no longer apply."""
        if len(parses) != len(self.sentences):
            raise AlignmentError(f"{len(parses)} parses for {len(self.sentences)} sentences")
        entries = []
        for e, heads in zip(self.sentences, parses):
            if len(heads) != len(e.heads):
                raise AlignmentError(
                    f"sentence {e.sentence.id}: {len(heads)} heads for {len(e.heads)} tokens"
                )
            tokens = tuple(_replace(t, deprel="_", deps="_") for t in e.sentence.tokens)
            entries.append(Entry(Sentence(e.sentence.id, tokens, e.sentence.comments), tuple(heads)))
        return CorpusFile(tuple(entries), source)

    @classmethod
    def from_heads(cls, parses: Sequence[Sequence[int]], source: str = "<memory>") -> CorpusFile:
        """A corpus with placeholder forms, handy when only the trees matter."""
        entries = []
        for i, heads in enumerate(parses, start=1):
            sent = Sentence.from_forms(str(i), [f"w{j}" for j in range(1, len(heads) + 1)])
            entries.append(Entry(sent, tuple(heads)))
        return cls(tuple(entries), source)


def _replace(tok: Token, **changes) -> Token:
    fields = {k: getattr(tok, k) for k in Token.__dataclass_fields__}
    fields.update(changes)
    return Token(**fields)


def read_corpus(stream: IO[str] | Iterable[str], strict: bool = False, source: str | None = None) -> CorpusFile:
    if source is None:
        source = getattr(stream, "name", "<stream>")
    entries: list[Entry] = []
    comments: list[str] = []
    rows: list[tuple[int, list[str]]] = []
    start_line = 0

    def finish() -> None:
        if not rows:
            if comments:
                raise ConlluError("comment block without tokens", start_line, source)
            return
        entries.append(_build_entry(rows, comments, len(entries) + 1, source))

    lineno = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            finish()
            comments, rows = [], []
            continue
        if not comments and not rows:
            start_line = lineno
        if line.startswith("#"):
            if rows:
                raise ConlluError("comment line inside a sentence", lineno, source)
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != N_COLUMNS:
            raise ConlluError(f"expected {N_COLUMNS} tab-separated columns, found {len(cols)}", lineno, source)
        if "-" in cols[0] or "." in cols[0]:
            if strict:
                raise ConlluError(f"multi-word or empty-node ID {cols[0]!r} not supported", lineno, source)
            logger.warning("%s:%d: skipping multi-word/empty-node line %r", source, lineno, cols[0])
            continue
        rows.append((lineno, cols))
    finish()
    return CorpusFile(tuple(entries), source)


def _build_entry(rows, comments, position: int, source: str) -> Entry:
    tokens = []
    heads = []
    n = len(rows)
    for expected, (lineno, cols) in enumerate(rows, start=1):
        try:
            idx = int(cols[0])
        except ValueError:
            raise ConlluError(f"token ID {cols[0]!r} is not an integer", lineno, source) from None
        if idx != expected:
            problem = "duplicate" if idx < expected else "missing"
            raise ConlluError(f"{problem} token ID: expected {expected}, found {idx}", lineno, source)
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluError(f"HEAD {cols[6]!r} is not an integer", lineno, source) from None
        if not 0 <= head <= n:
            raise ConlluError(f"HEAD {head} out of range 0..{n}", lineno, source)
        form, lemma, upos, xpos, feats, _, deprel, deps, misc = cols[1:]
        tokens.append(Token(idx, form, lemma, upos, xpos, feats, deprel, deps, misc))
        heads.append(head)

    sent_id = str(position)
    for c in comments:
        body = c[1:].strip()
        if body.startswith("sent_id") and "=" in body:
            key, _, value = body.partition("=")
            if key.strip() == "sent_id":
                sent_id = value.strip()
                break

    first_line = rows[0][0]
    problems = validate(heads, n)
    fatal = [v for v in problems if v.kind not in ("multi-root", "non-projective")]
    if fatal:
        raise ConlluError(f"sentence {sent_id}: {fatal[0].detail}", first_line, source)
    for v in problems:
        logger.warning("%s:%d: sentence %s is %s", source, first_line, sent_id, v.kind)
    return Entry(Sentence(sent_id, tuple(tokens), tuple(comments)), tuple(heads))


def write_corpus(corpus: CorpusFile, stream: IO[str]) -> None:
    for sentence, heads in corpus.sentences:
        for c in sentence.comments:
            stream.write(c + "\n")
        for tok, head in zip(sentence.tokens, heads):
            cols = (
                str(tok.index), tok.form, tok.lemma, tok.upos, tok.xpos, tok.feats,
                str(head), tok.deprel, tok.deps, tok.misc,
            )
            stream.write("\t".join(c if c != "" else "_" for c in cols) + "\n")
        stream.write("\n")


def load(path: str | Path, strict: bool = False) -> CorpusFile:
    with open(path, encoding="utf-8") as fh:
        return read_corpus(fh, strict=strict, source=str(path))


def save(corpus: CorpusFile, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_corpus(corpus, fh)


@dataclass(frozen=True)
class AlignmentReport:
    ok: bool
    message: str = ""
    sentence: int | None = None  # 1-based position of the first mismatch
    warnings: tuple[str, ...] = ()


def check_alignment(outputs: Sequence[CorpusFile]) -> AlignmentReport:
    if not outputs:
        raise ValueError("check_alignment needs at least one corpus")
    ref = outputs[0]
    warnings = []
    for other in outputs[1:]:
        if len(other) != len(ref):
            return AlignmentReport(
                False,
                f"{other.source} has {len(other)} sentences, {ref.source} has {len(ref)}",
            )
    for i, entries in enumerate(zip(*(o.sentences for o in outputs)), start=1):
        first = entries[0].sentence
        for corpus, (sent, _) in zip(outputs[1:], entries[1:]):
            if len(sent) != len(first):
                return AlignmentReport(
                    False,
                    f"sentence {i}: {corpus.source} has {len(sent)} tokens, {ref.source} has {len(first)}",
                    sentence=i,
                    warnings=tuple(warnings),
                )
            if [t.form for t in sent.tokens] != [t.form for t in first.tokens]:
                warnings.append(f"sentence {i}: word forms differ between {ref.source} and {corpus.source}")
    return AlignmentReport(True, warnings=tuple(warnings))


def require_aligned(outputs: Sequence[CorpusFile]) -> None:
    report = check_alignment(outputs)
    for w in report.warnings:
        logger.warning(w)
    if not report.ok:
        raise AlignmentError(report.message)


__all__ = [
    "AlignmentError",
    "AlignmentReport",
    "ConlluError",
    "CorpusFile",
    "Entry",
    "StructureError",
    "check_alignment",
    "load",
    "read_corpus",
    "require_aligned",
    "save",
    "write_corpus",
]

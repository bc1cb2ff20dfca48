"""Exhaustive reference implementations for checking the decoders on short sentences.

Everything here is exponential in sentence length and guarded accordingly.
``selftest`` runs the decoder-vs-enumeration comparisons on random cases.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from mbrdep.core import HeadVector, is_well_formed

MAX_ENUM_LEN = 8
MAX_F1_LEN = 6


def _forests(b: int, e: int, parent: int) -> Iterator[dict[int, int]]:
    """All sequences of adjacent projective subtrees tiling words b..e-1, each root under ``parent``."""
    if b == e:
        yield {}
        return
    for m in range(b + 1, e + 1):  # first subtree covers b..m-1
        for root in range(b, m):
            for left in _forests(b, root, root):
                for right in _forests(root + 1, m, root):
                    for rest in _forests(m, e, parent):
                        tree = {root: parent}
                        tree.update(left)
                        tree.update(right)
                        tree.update(rest)
                        yield tree


def enumerate_projective_parses(n: int) -> list[HeadVector]:
    """Every projective tree over ``n`` words with a single ROOT dependent."""
    if not 1 <= n <= MAX_ENUM_LEN:
        raise ValueError(f"enumeration only supported for 1 <= n <= {MAX_ENUM_LEN}, got {n}")
    out = []
    for root in range(1, n + 1):
        for left in _forests(1, root, root):
            for right in _forests(root + 1, n + 1, root):
                heads = {root: 0, **left, **right}
                out.append(tuple(heads[j] for j in range(1, n + 1)))
    return out


def brute_force_uas_aggregate(parses: Sequence[Sequence[int]], weights: Sequence | None = None) -> tuple[HeadVector, Fraction]:
    from mbrdep.mbr import build_vote_matrix

    votes = build_vote_matrix(parses, weights)
    best, best_score = None, None
    for cand in enumerate_projective_parses(votes.n):
        s = votes.score(cand)
        if best_score is None or s > best_score:
            best, best_score = cand, s
    return best, best_score


def brute_force_f1_aggregate(h, n: int):
    from mbrdep.dpst import heads_to_dpst, hit_score

    if not 1 <= n <= MAX_F1_LEN:
        raise ValueError(f"F1 enumeration only supported for 1 <= n <= {MAX_F1_LEN}, got {n}")
    best, best_score = None, None
    for cand in enumerate_projective_parses(n):
        tree = heads_to_dpst(cand)
        s = hit_score(h, tree)
        if best_score is None or s > best_score:
            best, best_score = tree, s
    return best, best_score


def random_parse(n: int, rng: random.Random) -> HeadVector:
    """A random tree over ``n`` words; may be non-projective or multi-root."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = [0] * n
    placed = [0]
    for w in order:
        heads[w - 1] = rng.choice(placed)
        placed.append(w)
    return tuple(heads)


def random_case(rng: random.Random, max_len: int, max_k: int = 5, projective: bool = False):
    """(parses, weights) for one random aggregation problem."""
    n = rng.randint(1, max_len)
    k = rng.randint(1, max_k)
    pool = enumerate_projective_parses(n) if projective else None
    parses = [rng.choice(pool) if pool else random_parse(n, rng) for _ in range(k)]
    weights = [rng.randint(1, 3) for _ in range(k)]
    return parses, weights


def selftest(max_len: int = 6, cases: int = 200, seed: int = 0) -> list[tuple[str, bool, str]]:
    """Run the oracle comparisons; returns (property, passed, detail) rows."""
    from mbrdep.dpst import build_hit_counts, dpst_to_heads, f1_aggregate, heads_to_dpst, hit_score
    from mbrdep.mbr import build_vote_matrix, eisner_decode

    rng = random.Random(seed)
    rows = []

    def run(name: str, check: Callable[[], str | None]) -> None:
        try:
            failure = check()
        except Exception as exc:  # a crash is a failed property, reported not raised
            failure = f"{type(exc).__name__}: {exc}"
        rows.append((name, failure is None, failure or "ok"))

    def counts():
        for n, expected in ((1, 1), (2, 2), (3, 7)):
            got = len(enumerate_projective_parses(n))
            if got != expected:
                return f"n={n}: {got} parses, expected {expected}"
        return None

    def uas_optimality():
        for i in range(cases):
            parses, weights = random_case(rng, min(max_len, 7))
            votes = build_vote_matrix(parses, weights)
            got = votes.score(eisner_decode(votes))
            _, want = brute_force_uas_aggregate(parses, weights)
            if got != want:
                return f"case {i}: decoder score {got}, optimum {want}"
        return None

    def f1_optimality():
        for i in range(cases):
            parses, weights = random_case(rng, min(max_len, MAX_F1_LEN), projective=True)
            h = build_hit_counts(parses, weights)
            n = len(parses[0])
            got = hit_score(h, f1_aggregate(h, n))
            _, want = brute_force_f1_aggregate(h, n)
            if got != want:
                return f"case {i}: DP score {got}, optimum {want}"
        return None

    def roundtrip():
        for n in range(1, min(max_len, 7) + 1):
            for p in enumerate_projective_parses(n):
                if dpst_to_heads(heads_to_dpst(p)) != p:
                    return f"round-trip failed for {p}"
        return None

    def outputs_well_formed():
        for i in range(cases):
            parses, weights = random_case(rng, min(max_len, 7))
            out = eisner_decode(build_vote_matrix(parses, weights))
            if not is_well_formed(out):
                return f"case {i}: decoder produced {out}"
        return None

    run("enumeration counts n=1..3", counts)
    run("uas decoder optimality", uas_optimality)
    run("f1 decoder optimality", f1_optimality)
    run("heads <-> DPST round-trip", roundtrip)
    run("decoder outputs projective single-root", outputs_well_formed)
    return rows

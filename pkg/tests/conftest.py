import functools
import itertools
import random

import pytest
from hypothesis import strategies as st


def descendant_set(heads, word):
    """Independent yield computation: depth-first search over the children lists."""
    children = {j: [] for j in range(len(heads) + 1)}
    for d, h in enumerate(heads, start=1):
        children[h].append(d)
    seen, stack = set(), [word]
    while stack:
        w = stack.pop()
        seen.add(w)
        stack.extend(children[w])
    return seen


def is_tree(heads):
    n = len(heads)
    for j in range(1, n + 1):
        seen = set()
        w = j
        while w != 0:
            if w in seen or heads[w - 1] == w:
                return False
            seen.add(w)
            w = heads[w - 1]
    return True


def brute_projective(heads):
    return all(
        max(s) - min(s) + 1 == len(s)
        for s in (descendant_set(heads, j) for j in range(1, len(heads) + 1))
    )


@functools.lru_cache(maxsize=None)
def all_well_formed(n):
    """Every projective single-root tree on n words, by filtering all (n+1)^n head assignments."""
    out = []
    for h in itertools.product(range(n + 1), repeat=n):
        if any(h[j] == j + 1 for j in range(n)):
            continue
        if is_tree(h) and h.count(0) == 1 and brute_projective(h):
            out.append(h)
    return tuple(out)


@st.composite
def trees(draw, min_n=1, max_n=8):
    """Random (possibly non-projective, multi-root) trees."""
    n = draw(st.integers(min_n, max_n))
    order = draw(st.permutations(list(range(1, n + 1))))
    heads = [0] * n
    placed = [0]
    for w in order:
        heads[w - 1] = draw(st.sampled_from(placed))
        placed.append(w)
    return tuple(heads)


@pytest.fixture
def rng():
    return random.Random(1234)

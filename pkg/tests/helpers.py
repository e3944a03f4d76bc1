"""Shared corpus access and generators for the test suites."""

from __future__ import annotations

import random
from functools import lru_cache

from sessio.lastn.config import load_program
from sessio.lastn.parser import parse_term
from sessio.source import corpus_files, load_process
from hypothesis import strategies as st

from sessio.types import END, Const, ParT, Plus, Tensor, Var, With, depth

DEADLOCKING_LASTN = {"crossed", "self_wait", "ring"}


@lru_cache(maxsize=None)
def process_corpus() -> tuple:
    """Every bundled process file as ``Source`` records."""
    return tuple(load_process(f) for f in corpus_files("examples") + corpus_files("ap"))


@lru_cache(maxsize=None)
def lastn_corpus() -> tuple:
    """``(stem, configuration, type)`` for every bundled LAST^n program."""
    out = []
    for f in corpus_files("lastn"):
        c, t = load_program(parse_term(f.read_text(encoding="utf-8")))
        out.append((f.stem, c, t))
    return tuple(out)


PRIORITIES = (None, Const(0), Const(1), Const(3), Var("pi"), Var("rho"))
LABELS = ("l", "m", "r")


def random_type(rng: random.Random, depth: int):
    """A session type of exactly ``depth`` nested connectives."""
    if depth == 0:
        return END
    pri = rng.choice(PRIORITIES)
    kind = rng.randrange(4)
    if kind < 2:
        deep, shallow = random_type(rng, depth - 1), random_type(rng, rng.randrange(depth))
        a, b = (deep, shallow) if rng.random() < 0.5 else (shallow, deep)
        return (Tensor, ParT)[kind](a, b, pri)
    labels = rng.sample(LABELS, rng.randint(1, len(LABELS)))
    deep_at = rng.randrange(len(labels))
    branches = tuple((l, random_type(rng, depth - 1 if k == deep_at else rng.randrange(depth)))
                     for k, l in enumerate(labels))
    return (Plus, With)[kind - 2](branches, pri)


def enumerated_types(count: int, max_depth: int = 4, seed: int = 0) -> list:
    """``count`` distinct types spread evenly over depths ``0..max_depth``."""
    rng = random.Random(seed)
    out, seen = [], set()
    depth = 0
    while len(out) < count:
        t = random_type(rng, depth)
        if t not in seen:
            seen.add(t)
            out.append(t)
        depth = (depth + 1) % (max_depth + 1) or 1
    return out


priorities = st.sampled_from(PRIORITIES)


def session_types(max_depth: int = 4):
    """Hypothesis strategy for session types of bounded depth."""
    def extend(children):
        branches = st.dictionaries(st.sampled_from(LABELS), children, min_size=1, max_size=3).map(
            lambda d: tuple(sorted(d.items())))
        return st.one_of(
            st.builds(Tensor, children, children, priorities),
            st.builds(ParT, children, children, priorities),
            st.builds(Plus, branches, priorities),
            st.builds(With, branches, priorities),
        )
    return st.recursive(st.just(END), extend, max_leaves=max_depth * 2).filter(
        lambda t: depth(t) <= max_depth)


@lru_cache(maxsize=None)
def soundness(stem: str):
    """Cached joint-exploration report for one LAST^n corpus program."""
    from sessio.translation import check_soundness

    (c,) = [c for s, c, _ in lastn_corpus() if s == stem]
    return check_soundness(c)


def channel_bound(c) -> int:
    """Most channels alive in any configuration reachable from ``c``."""
    from sessio.lastn.config import explore_config

    return max(len(d.channels) for d in explore_config(c).graph)

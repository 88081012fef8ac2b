"""Brute-force oracles used across the test modules.

Everything here works on plain Python sets with itertools, deliberately
avoiding the bit-mask machinery of the package under test, so the two
can disagree when one of them is wrong.
"""

from __future__ import annotations

from itertools import combinations

from weakform import Environment, mk_environment


def brute_language(env: Environment) -> list[tuple[int, ...]]:
    """Every subset of vocabulary indices with a nonempty joint truth set."""
    progs = [set(p.states()) for p in env.programs]
    universe = set(range(env.state_count))
    out = []
    for r in range(len(progs) + 1):
        for combo in combinations(range(len(progs)), r):
            inter = set(universe)
            for j in combo:
                inter &= progs[j]
            if inter:
                out.append(tuple(combo))
    out.sort(key=lambda t: (len(t), t))
    return out


def brute_truth_set(env: Environment, x) -> set[int]:
    inter = set(range(env.state_count))
    for j in x:
        inter &= set(env.programs[j].states())
    return inter


def brute_extension(env: Environment, x) -> set[tuple[int, ...]]:
    xs = set(x)
    return {y for y in brute_language(env) if xs <= set(y)}


def brute_extension_of_set(env: Environment, xs) -> set[tuple[int, ...]]:
    out: set[tuple[int, ...]] = set()
    for x in xs:
        out |= brute_extension(env, x)
    return out


def all_environments(max_states: int, max_vocab: int, min_vocab: int = 0):
    """Every environment with <= max_states states and <= max_vocab
    distinct programs, vocabulary drawn from the full powerset."""
    for n in range(1, max_states + 1):
        programs = [
            tuple(s for s in range(n) if (mask >> s) & 1)
            for mask in range(1 << n)
        ]
        for size in range(min_vocab, min(max_vocab, len(programs)) + 1):
            for combo in combinations(programs, size):
                yield mk_environment(n, combo)

"""Proxies, policy learning and the generalization order.

A proxy is a deterministic 0/1 relation on statements used to pick one
correct policy out of many.  The built-in proxies are weakness (compare
extension sizes), simplicity (fewer member programs ranks higher), fixed
random relations, and explicit tables.  The generalization order ranks
statements by how often they are a correct policy for a task drawn
uniformly from the task space; sample efficiency scores a proxy by how
well its verdicts match that order over all ordered statement pairs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from random import Random
from typing import Callable, Iterable

from .core import (
    DEFAULT_GUARDS,
    Environment,
    Guards,
    Statement,
    encode_statement,
    extension_size,
    require_statement,
)
from .errors import (
    AmbiguousMaximum,
    EmptyTaskSpace,
    NoCorrectPolicy,
    UnknownProxy,
)
from .tasks import Task, correct_policies, is_correct_policy, task_space

__all__ = [
    "GeneralizationEstimate",
    "GeneralizationTable",
    "Proxy",
    "estimate_generalization_probability",
    "evaluate_generalization",
    "gen_cmp",
    "generalization_probability",
    "generalization_table",
    "learn",
    "proxy_by_name",
    "random_proxy",
    "sample_efficiency",
    "simplicity_cmp",
    "simplicity_proxy",
    "table_proxy",
    "weakness_cmp",
    "weakness_proxy",
]


def _stmt_order(x: Statement) -> tuple[int, Statement]:
    return (len(x), x)


# --- comparators ----------------------------------------------------------------

def weakness_cmp(env: Environment, l1: Iterable[int], l2: Iterable[int],
                 guards: Guards = DEFAULT_GUARDS) -> bool:
    """True iff ``l1`` has the strictly smaller extension."""
    a = extension_size(env, require_statement(env, l1), guards)
    b = extension_size(env, require_statement(env, l2), guards)
    return a < b


def simplicity_cmp(l1: Iterable[int], l2: Iterable[int]) -> bool:
    """True iff ``l1`` has strictly more member programs than ``l2``.

    Fewer constraints count as simpler, so maximising this relation
    selects the shortest statement.  A form-based baseline, nothing more.
    """
    return len(tuple(l1)) > len(tuple(l2))


@dataclass(frozen=True)
class Proxy:
    """A named deterministic 0/1 relation on statements."""

    name: str
    relation: Callable[[Environment, Statement, Statement], bool]

    def holds(self, env: Environment, l1: Statement, l2: Statement) -> bool:
        return bool(self.relation(env, l1, l2))

    def __repr__(self) -> str:
        return f"Proxy({self.name})"


def weakness_proxy() -> Proxy:
    return Proxy("weakness", lambda env, a, b: weakness_cmp(env, a, b))


def simplicity_proxy() -> Proxy:
    return Proxy("simplicity", lambda env, a, b: simplicity_cmp(a, b))


def random_proxy(seed: int) -> Proxy:
    """A fixed random relation: the same pair always gets the same bit.

    Bits come from a hash of (seed, pair), so the relation is stable
    across runs, platforms and environments.
    """

    def rel(env: Environment, l1: Statement, l2: Statement) -> bool:
        key = f"{seed}|{encode_statement(l1)}|{encode_statement(l2)}"
        return hashlib.sha256(key.encode("utf-8")).digest()[0] & 1 == 1

    return Proxy(f"random:{seed}", rel)


def table_proxy(name: str, true_pairs: Iterable[tuple[Iterable[int], Iterable[int]]]) -> Proxy:
    """A relation given extensionally: listed ordered pairs are 1."""
    table = frozenset(
        (tuple(sorted(a)), tuple(sorted(b))) for a, b in true_pairs
    )

    def rel(env: Environment, l1: Statement, l2: Statement) -> bool:
        return (tuple(l1), tuple(l2)) in table

    return Proxy(name, rel)


def proxy_by_name(name: str, base_dir: str | Path | None = None) -> Proxy:
    """Resolve weakness | simplicity | random:<seed> | table:<path>."""
    if name == "weakness":
        return weakness_proxy()
    if name == "simplicity":
        return simplicity_proxy()
    if name.startswith("random:"):
        try:
            return random_proxy(int(name.split(":", 1)[1]))
        except ValueError:
            raise UnknownProxy(f"bad random proxy seed in {name!r}") from None
    if name.startswith("table:"):
        path = Path(name.split(":", 1)[1])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            return table_proxy(f"table:{path.name}", doc["true_pairs"])
        except (OSError, KeyError, ValueError, TypeError) as exc:
            raise UnknownProxy(f"cannot load proxy table {path}: {exc}") from None
    raise UnknownProxy(f"unknown proxy {name!r}")


# --- the generalization order -------------------------------------------------------

@dataclass(frozen=True)
class GeneralizationTable:
    """For every statement: in how many tasks it is a correct policy.

    The denominator is the total task count, shared by all rows; all
    arithmetic is exact.
    """

    env: Environment
    include_empty_outputs: bool
    statements: tuple[Statement, ...]
    numerators: tuple[int, ...]
    denominator: int

    def numerator(self, l: Iterable[int]) -> int:
        idx = self.statements.index(tuple(sorted(set(l))))
        return self.numerators[idx]

    def probability(self, l: Iterable[int]) -> Fraction:
        if self.denominator == 0:
            raise EmptyTaskSpace("no tasks exist, generalization is undefined")
        return Fraction(self.numerator(l), self.denominator)

    def csv_rows(self) -> list[tuple[str, int, int]]:
        return [
            (encode_statement(s), n, self.denominator)
            for s, n in zip(self.statements, self.numerators)
        ]

    def to_csv(self) -> str:
        lines = ["statement,numerator,denominator"]
        for statement, numerator, denominator in self.csv_rows():
            lines.append(f'"{statement}",{numerator},{denominator}')
        return "\n".join(lines) + "\n"


@lru_cache(maxsize=None)
def _table_cached(env: Environment, guards: Guards, include_empty_outputs: bool) -> GeneralizationTable:
    space = task_space(env, guards, include_empty_outputs)
    lang = space.language
    ext_masks = space.ext_masks
    union = space._union
    n = len(lang)
    numerators = [0] * n
    # a statement is a correct policy for exactly one output set per
    # input set (the intersection of the two extensions), and for none
    # when that intersection is not an admissible output set
    for imask in range(1, (1 << n) - 1):
        emask = union[imask]
        for j in range(n):
            inter = emask & ext_masks[j]
            if inter == emask:
                continue
            if not include_empty_outputs and inter == 0:
                continue
            numerators[j] += 1
    return GeneralizationTable(
        env, include_empty_outputs, lang, tuple(numerators), space.total_count
    )


def generalization_table(
    env: Environment,
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> GeneralizationTable:
    return _table_cached(env, guards, include_empty_outputs)


def generalization_probability(
    env: Environment,
    l: Iterable[int],
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> Fraction:
    """Exact probability that ``l`` is a correct policy of a task drawn
    uniformly from the task space."""
    x = require_statement(env, l)
    return generalization_table(env, guards, include_empty_outputs).probability(x)


def gen_cmp(
    env: Environment,
    l1: Iterable[int],
    l2: Iterable[int],
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> bool:
    """True iff ``l1`` generalizes strictly less probably than ``l2``."""
    table = generalization_table(env, guards, include_empty_outputs)
    a = require_statement(env, l1)
    b = require_statement(env, l2)
    # same denominator, so the numerators decide
    return table.numerator(a) < table.numerator(b)


@dataclass(frozen=True)
class GeneralizationEstimate:
    """Monte Carlo estimate of a generalization probability."""

    statement: Statement
    successes: int
    samples: int
    seed: int

    @property
    def estimate(self) -> Fraction:
        return Fraction(self.successes, self.samples)

    def stderr(self) -> float:
        p = self.successes / self.samples
        return (p * (1.0 - p) / self.samples) ** 0.5

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        p = self.successes / self.samples
        half = z * self.stderr()
        return (max(0.0, p - half), min(1.0, p + half))


def estimate_generalization_probability(
    env: Environment,
    l: Iterable[int],
    samples: int,
    seed: int,
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> GeneralizationEstimate:
    """Estimate by uniform task sampling; reported with its sample count
    and seed so the binomial error is reconstructible."""
    x = require_statement(env, l)
    space = task_space(env, guards, include_empty_outputs)
    if space.total_count == 0:
        raise EmptyTaskSpace("no tasks exist, generalization is undefined")
    pmask = 0
    for idx, s in enumerate(space.language):
        if s == x:
            pmask = space.ext_masks[idx]
            break
    rng = Random(seed)
    hits = 0
    for _ in range(samples):
        imask, omask = space.sample_index(rng.randrange(space.total_count))
        if space._union[imask] & pmask == omask:
            hits += 1
    return GeneralizationEstimate(x, hits, samples, seed)


# --- sample efficiency -----------------------------------------------------------------

def sample_efficiency(
    env: Environment,
    a: Proxy,
    b: Proxy,
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> int:
    """Error of proxy ``a`` minus error of proxy ``b`` against the
    generalization order, summed over all ordered statement pairs.

    Negative means ``a`` is the more sample-efficient proxy.
    """
    table = generalization_table(env, guards, include_empty_outputs)
    if table.denominator == 0:
        raise EmptyTaskSpace("no tasks exist, sample efficiency is undefined")
    lang = table.statements
    nums = table.numerators
    total = 0
    for i, l1 in enumerate(lang):
        for j, l2 in enumerate(lang):
            g = 1 if nums[i] < nums[j] else 0
            ea = 1 if a.holds(env, l1, l2) else 0
            eb = 1 if b.holds(env, l1, l2) else 0
            total += abs(g - ea) - abs(g - eb)
    return total


# --- learning ------------------------------------------------------------------------------

def learn(
    child: Task,
    proxy: Proxy,
    guards: Guards = DEFAULT_GUARDS,
    tie_break: bool = True,
) -> Statement:
    """The proxy-maximal correct policy of the child task.

    Maximal means no other correct policy ranks above it.  Ties break to
    the canonically smallest statement; with tie-breaking disabled, ties
    raise.  A cyclic relation leaves no maximal element, in which case
    the tie set is the whole policy set.
    """
    pols = correct_policies(child, guards)
    if not pols.members:
        raise NoCorrectPolicy("the task has no correct policy")
    env = child.env
    members = pols.members
    maximal = [
        p for p in members
        if not any(proxy.holds(env, p, q) for q in members)
    ]
    if not maximal:
        maximal = list(members)
    if len(maximal) > 1 and not tie_break:
        raise AmbiguousMaximum(
            f"{len(maximal)} policies are proxy-maximal under {proxy.name}"
        )
    return min(maximal, key=_stmt_order)


def evaluate_generalization(pi: Iterable[int], parent: Task) -> bool:
    """True iff the statement is a correct policy of the parent task."""
    return is_correct_policy(parent, pi)

"""Finite environments and their statement algebra.

States are the integers ``0 .. state_count-1``.  A *program* is a set of
states, stored as a bit mask; it is "true" exactly in its member states.
A *vocabulary* is an ordered tuple of distinct programs.  A *statement*
is a set of vocabulary indices whose programs share at least one state
(the empty statement is admitted and is true everywhere).  The set of
all statements of an environment is its *language*.  The *extension* of
a statement x is the set of statements that contain x; its size is the
"weakness" of x and is computed both by explicit enumeration and by
inclusion-exclusion over the truth set, so the two paths can be checked
against each other.

All values are immutable after construction and every operation is a
pure function of its arguments; results are cached per environment.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator

from .errors import (
    DuplicateProgram,
    IndexOutOfRange,
    NotAStatement,
    StateOutOfRange,
    StateSpaceTooLarge,
    TruthSetTooLarge,
    VocabularyTooLarge,
)

__all__ = [
    "DEFAULT_GUARDS",
    "HARD_GUARD_LIMITS",
    "Environment",
    "ExtensionSet",
    "Guards",
    "Program",
    "Statement",
    "VocabularyReorderedWarning",
    "canon_statement",
    "encode_statement",
    "encode_statement_set",
    "enumerate_language",
    "environment_to_dict",
    "env_hash",
    "equivalent",
    "extension",
    "extension_of_set",
    "extension_size",
    "full_powerset_vocabulary",
    "is_completion",
    "is_statement",
    "language_size",
    "load_environment",
    "mk_environment",
    "save_environment",
    "truth_set",
]

#: A statement is a sorted tuple of vocabulary indices.
Statement = tuple[int, ...]


class VocabularyReorderedWarning(UserWarning):
    """Emitted when a loaded vocabulary had to be put in canonical order."""


@dataclass(frozen=True)
class Guards:
    """Thresholds above which combinatorial operations refuse to run.

    Exceeding a guard raises, it never truncates silently.
    """

    max_vocabulary: int = 24      # 2^|v| language enumeration
    max_truth_set: int = 24       # 2^|truth set| inclusion-exclusion terms
    max_task_language: int = 16   # 2^|L_v| task-space paths
    max_powerset_states: int = 4  # full-powerset vocabulary construction


DEFAULT_GUARDS = Guards()

#: Hard ceilings a configuration may not raise guards beyond.
HARD_GUARD_LIMITS = Guards(
    max_vocabulary=30,
    max_truth_set=30,
    max_task_language=20,
    max_powerset_states=5,
)


@dataclass(frozen=True)
class Program:
    """A declarative program: the set of states in which it is true."""

    mask: int
    width: int

    def __contains__(self, state: int) -> bool:
        return 0 <= state < self.width and (self.mask >> state) & 1 == 1

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def states(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.width) if (self.mask >> i) & 1)

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        # canonical program order: cardinality first, then the state
        # list compared lexicographically
        return (self.size, self.states())

    def __repr__(self) -> str:
        return "Program({%s})" % ",".join(str(s) for s in self.states())


@dataclass(frozen=True)
class Environment:
    """A finite state space together with a canonically ordered vocabulary."""

    state_count: int
    programs: tuple[Program, ...]

    @property
    def vocabulary_size(self) -> int:
        return len(self.programs)

    @property
    def all_states_mask(self) -> int:
        return (1 << self.state_count) - 1

    def program_sets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(p.states() for p in self.programs)

    def __repr__(self) -> str:
        progs = ",".join(repr(p) for p in self.programs)
        return f"Environment(states={self.state_count}, vocabulary=[{progs}])"


def _mask_of(states: Iterable[int], state_count: int) -> int:
    mask = 0
    for s in states:
        if not isinstance(s, int) or isinstance(s, bool) or not 0 <= s < state_count:
            raise StateOutOfRange(
                f"state {s!r} outside [0, {state_count})"
            )
        mask |= 1 << s
    return mask


def mk_environment(state_count: int, programs: Iterable[Iterable[int]]) -> Environment:
    """Validate and canonicalise an environment.

    Programs are reordered into canonical order (cardinality, then state
    list); two identical programs are an error, not a silent merge.
    """
    if not isinstance(state_count, int) or state_count < 1:
        raise StateOutOfRange(f"state_count must be >= 1, got {state_count!r}")
    masks = [_mask_of(p, state_count) for p in programs]
    seen: set[int] = set()
    for m in masks:
        if m in seen:
            dup = Program(m, state_count)
            raise DuplicateProgram(f"program {dup!r} appears twice")
        seen.add(m)
    canonical = sorted((Program(m, state_count) for m in masks), key=Program.sort_key)
    return Environment(state_count, tuple(canonical))


# --- serialisation -----------------------------------------------------------

def environment_to_dict(env: Environment) -> dict:
    return {
        "states": env.state_count,
        "vocabulary": [list(p.states()) for p in env.programs],
    }


def env_hash(env: Environment) -> str:
    """Stable 12-hex-digit fingerprint of the canonical environment."""
    blob = json.dumps(environment_to_dict(env), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def load_environment(source: str | Path | dict) -> Environment:
    """Load ``{"states": n, "vocabulary": [[state...], ...]}`` JSON.

    Warns if the stored program order differs from canonical order.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    if not isinstance(doc, dict) or "states" not in doc or "vocabulary" not in doc:
        raise StateOutOfRange("environment document needs 'states' and 'vocabulary'")
    env = mk_environment(doc["states"], doc["vocabulary"])
    loaded = [tuple(sorted(p)) for p in doc["vocabulary"]]
    if loaded != list(env.program_sets()):
        warnings.warn(
            "vocabulary was reordered into canonical order on load",
            VocabularyReorderedWarning,
            stacklevel=2,
        )
    return env


def save_environment(env: Environment, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(environment_to_dict(env), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- statements ---------------------------------------------------------------

def canon_statement(env: Environment, indices: Iterable[int]) -> Statement:
    """Sort, deduplicate and range-check a statement encoding."""
    out = sorted(set(indices))
    for j in out:
        if not isinstance(j, int) or isinstance(j, bool) or not 0 <= j < env.vocabulary_size:
            raise IndexOutOfRange(
                f"index {j!r} outside [0, {env.vocabulary_size})"
            )
    return tuple(out)


def encode_statement(x: Iterable[int]) -> str:
    return "{%s}" % ",".join(str(j) for j in x)


def encode_statement_set(xs: Iterable[Statement]) -> str:
    ordered = sorted(xs, key=lambda s: (len(s), s))
    return "{%s}" % ",".join(encode_statement(s) for s in ordered)


def _truth_mask(env: Environment, x: Statement) -> int:
    # empty intersection convention: the empty statement is true in
    # every state
    mask = env.all_states_mask
    for j in x:
        mask &= env.programs[j].mask
    return mask


def truth_set(env: Environment, l: Iterable[int]) -> frozenset[int]:
    """States in which every member program of ``l`` is true."""
    x = canon_statement(env, l)
    mask = _truth_mask(env, x)
    return frozenset(i for i in range(env.state_count) if (mask >> i) & 1)


def is_statement(env: Environment, candidate: Iterable[int]) -> bool:
    """True iff the candidate's joint truth set is nonempty."""
    x = canon_statement(env, candidate)
    return _truth_mask(env, x) != 0


def require_statement(env: Environment, candidate: Iterable[int]) -> Statement:
    x = canon_statement(env, candidate)
    if _truth_mask(env, x) == 0:
        raise NotAStatement(f"{encode_statement(x)} has an empty truth set")
    return x


def is_completion(y: Iterable[int], x: Iterable[int]) -> bool:
    """True iff statement ``y`` contains statement ``x``."""
    return set(x) <= set(y)


# --- language enumeration ------------------------------------------------------

def _statement_order(x: Statement) -> tuple[int, Statement]:
    return (len(x), x)


def _enumerate_statements(env: Environment) -> tuple[Statement, ...]:
    # depth-first over vocabulary indices; adding a program can only
    # shrink the truth set, so empty intersections prune whole branches
    nv = env.vocabulary_size
    masks = [p.mask for p in env.programs]
    found: list[Statement] = []

    def walk(prefix: tuple[int, ...], truth: int, start: int) -> None:
        found.append(prefix)
        for j in range(start, nv):
            t = truth & masks[j]
            if t:
                walk(prefix + (j,), t, j + 1)

    walk((), env.all_states_mask, 0)
    found.sort(key=_statement_order)
    return tuple(found)


@lru_cache(maxsize=None)
def _language_cached(env: Environment) -> tuple[Statement, ...]:
    return _enumerate_statements(env)


def enumerate_language(env: Environment, guards: Guards = DEFAULT_GUARDS) -> tuple[Statement, ...]:
    """All statements of the environment, in canonical order.

    Canonical order is by statement size, then lexicographically on the
    index tuple; the result is identical across runs and platforms.
    """
    if env.vocabulary_size > guards.max_vocabulary:
        raise VocabularyTooLarge(
            f"|v| = {env.vocabulary_size} exceeds guard {guards.max_vocabulary}"
        )
    return _language_cached(env)


def language_size(env: Environment, guards: Guards = DEFAULT_GUARDS) -> int:
    """|L_v| without materialising the language (counts via inclusion-exclusion)."""
    return extension_size(env, (), guards)


# --- extensions ----------------------------------------------------------------

class ExtensionSet:
    """An immutable set of statements in canonical order."""

    __slots__ = ("members", "_as_set")

    def __init__(self, members: Iterable[Statement]):
        object.__setattr__(self, "members", tuple(sorted(set(members), key=_statement_order)))
        object.__setattr__(self, "_as_set", frozenset(self.members))

    def __setattr__(self, name, value):  # immutability, mirrors the frozen dataclasses
        raise AttributeError("ExtensionSet is immutable")

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Statement]:
        return iter(self.members)

    def __contains__(self, item) -> bool:
        return item in self._as_set

    def as_set(self) -> frozenset[Statement]:
        return self._as_set

    def __eq__(self, other) -> bool:
        if isinstance(other, ExtensionSet):
            return self._as_set == other._as_set
        if isinstance(other, (set, frozenset)):
            return self._as_set == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._as_set)

    def __repr__(self) -> str:
        return f"ExtensionSet({encode_statement_set(self.members)})"


def _completions(env: Environment, x: Statement) -> list[Statement]:
    nv = env.vocabulary_size
    masks = [p.mask for p in env.programs]
    in_x = set(x)
    addable = [j for j in range(nv) if j not in in_x]
    out: list[Statement] = []

    def walk(extra: tuple[int, ...], truth: int, start: int) -> None:
        out.append(tuple(sorted(x + extra)))
        for pos in range(start, len(addable)):
            j = addable[pos]
            t = truth & masks[j]
            if t:
                walk(extra + (j,), t, pos + 1)

    walk((), _truth_mask(env, x), 0)
    return out


def extension(env: Environment, x: Iterable[int]) -> ExtensionSet:
    """All statements that contain ``x`` (including ``x`` itself)."""
    xs = require_statement(env, x)
    return ExtensionSet(_completions(env, xs))


@lru_cache(maxsize=None)
def _ie_extension_size(env: Environment, x: Statement, max_truth_set: int) -> int:
    truth = _truth_mask(env, x)
    states = [i for i in range(env.state_count) if (truth >> i) & 1]
    if len(states) > max_truth_set:
        raise TruthSetTooLarge(
            f"|truth set| = {len(states)} exceeds guard {max_truth_set}"
        )
    # for each state, the vocabulary programs containing it, minus the
    # members of x themselves
    x_bits = 0
    for j in x:
        x_bits |= 1 << j
    containing = []
    for s in states:
        bits = 0
        for j, p in enumerate(env.programs):
            if (p.mask >> s) & 1:
                bits |= 1 << j
        containing.append(bits & ~x_bits)

    # alternating sum over nonempty subsets S of the truth set: each
    # term counts the completions whose added programs all contain S
    total = 0

    def walk(acc: int, depth: int, sign: int) -> None:
        nonlocal total
        for i in range(depth, len(states)):
            cur = acc & containing[i]
            total += sign * (1 << cur.bit_count())
            walk(cur, i + 1, -sign)

    walk((1 << env.vocabulary_size) - 1, 0, 1)
    return total


def extension_size(env: Environment, x: Iterable[int], guards: Guards = DEFAULT_GUARDS) -> int:
    """|extension(x)| by inclusion-exclusion, without enumerating it.

    Must agree exactly with ``len(extension(env, x))``; the test suite
    sweeps both paths against each other.
    """
    xs = require_statement(env, x)
    return _ie_extension_size(env, xs, guards.max_truth_set)


def extension_of_set(env: Environment, xs: Iterable[Iterable[int]]) -> ExtensionSet:
    """Union of the extensions of every statement in ``xs``."""
    members: set[Statement] = set()
    for x in xs:
        s = require_statement(env, x)
        members.update(_completions(env, s))
    return ExtensionSet(members)


def equivalent(env: Environment, x: Iterable[int], y: Iterable[int]) -> bool:
    """True iff the two statements have identical extensions."""
    ex = extension(env, x)
    ey = extension(env, y)
    return ex == ey


# --- full powerset vocabulary ----------------------------------------------------

def full_powerset_vocabulary(state_count: int, guards: Guards = DEFAULT_GUARDS) -> Environment:
    """The environment whose vocabulary is every program over the states."""
    if not isinstance(state_count, int) or state_count < 1:
        raise StateOutOfRange(f"state_count must be >= 1, got {state_count!r}")
    if state_count > guards.max_powerset_states:
        raise StateSpaceTooLarge(
            f"|states| = {state_count} exceeds guard {guards.max_powerset_states}"
        )
    programs = [
        [s for s in range(state_count) if (mask >> s) & 1]
        for mask in range(1 << state_count)
    ]
    return mk_environment(state_count, programs)

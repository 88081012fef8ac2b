"""Tasks over a finite language: validity, policies, inference and the
task space.

A task pairs a set of input statements with a set of designated correct
outputs drawn from (but never equal to) the inputs' extension.  The task
space of an environment is every such pair; it is counted in closed form
(one power-of-two term per input set) and enumerated explicitly, and the
two must agree.  Sampling is exactly uniform: a single random index into
the counted space is decoded back into a task.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from random import Random
from typing import Iterable, Iterator

from .core import (
    DEFAULT_GUARDS,
    Environment,
    ExtensionSet,
    Guards,
    Statement,
    canon_statement,
    encode_statement,
    encode_statement_set,
    enumerate_language,
    environment_to_dict,
    load_environment,
    require_statement,
)
from .errors import (
    EmptyInputs,
    EmptyTaskSpace,
    EnvironmentMismatch,
    InputNotInTask,
    InputsNotStrictSubset,
    NoOutput,
    OutputsNotInExtension,
    OutputsNotStrict,
    TaskSpaceTooLarge,
)

__all__ = [
    "PolicySet",
    "Task",
    "TaskSpace",
    "correct_policies",
    "count_tasks",
    "enumerate_tasks",
    "hierarchy_level",
    "infer",
    "is_child",
    "is_correct_policy",
    "load_task",
    "mk_task",
    "outputs",
    "sample_task",
    "task_space",
    "task_to_dict",
]

#: hierarchy_level walks the full up-set of a task; refuse beyond this
#: many tasks in the space.
MAX_HIERARCHY_TASKS = 1 << 20


def _stmt_order(x: Statement) -> tuple[int, Statement]:
    return (len(x), x)


@dataclass(frozen=True)
class Task:
    """Inputs, correct outputs, and the cached input extension."""

    env: Environment
    inputs: tuple[Statement, ...]
    outputs_correct: tuple[Statement, ...]
    extension: ExtensionSet = field(compare=False, repr=False)

    @property
    def input_set(self) -> frozenset[Statement]:
        return frozenset(self.inputs)

    @property
    def output_set(self) -> frozenset[Statement]:
        return frozenset(self.outputs_correct)

    def key(self) -> tuple[tuple[Statement, ...], tuple[Statement, ...]]:
        return (self.inputs, self.outputs_correct)

    def encode(self) -> str:
        return "I=%s;O=%s" % (
            encode_statement_set(self.inputs),
            encode_statement_set(self.outputs_correct),
        )

    def __repr__(self) -> str:
        return f"Task({self.encode()})"


def _canon_statement_tuple(env: Environment, xs: Iterable[Iterable[int]]) -> tuple[Statement, ...]:
    out = {require_statement(env, x) for x in xs}
    return tuple(sorted(out, key=_stmt_order))


def mk_task(
    env: Environment,
    inputs: Iterable[Iterable[int]],
    outputs: Iterable[Iterable[int]],
    guards: Guards = DEFAULT_GUARDS,
) -> Task:
    """Validate a task: nonempty inputs below the whole language, and
    outputs a strict subset of the inputs' extension."""
    ins = _canon_statement_tuple(env, inputs)
    outs = _canon_statement_tuple(env, outputs)
    if not ins:
        raise EmptyInputs("a task needs at least one input statement")
    lang = enumerate_language(env, guards)
    if len(ins) >= len(lang):
        raise InputsNotStrictSubset("inputs cover the whole language")
    ext = _extension_of(env, ins)
    ext_set = ext.as_set()
    for o in outs:
        if o not in ext_set:
            raise OutputsNotInExtension(
                f"{encode_statement(o)} completes none of the inputs"
            )
    if len(outs) == ext.size:
        raise OutputsNotStrict("outputs equal the whole input extension")
    return Task(env, ins, outs, ext)


def _extension_of(env: Environment, statements: Iterable[Statement]) -> ExtensionSet:
    from .core import extension_of_set

    return extension_of_set(env, statements)


def outputs(task: Task) -> ExtensionSet:
    """The extension of the task's inputs: everything it could emit."""
    return task.extension


# --- serialisation -----------------------------------------------------------

def task_to_dict(task: Task, inline_env: bool = True) -> dict:
    doc = {
        "inputs": [list(x) for x in task.inputs],
        "outputs": [list(x) for x in task.outputs_correct],
    }
    if inline_env:
        doc["env"] = environment_to_dict(task.env)
    return doc


def load_task(source: str | Path | dict, env: Environment | None = None) -> Task:
    """Load ``{"env": ..., "inputs": [...], "outputs": [...]}`` JSON and
    re-validate against the environment."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    if env is None:
        env = load_environment(doc["env"])
    return mk_task(env, doc["inputs"], doc["outputs"])


# --- policies and inference ----------------------------------------------------

def is_correct_policy(task: Task, pi: Iterable[int]) -> bool:
    """True iff completing inputs under ``pi`` lands exactly on the
    correct outputs."""
    p = require_statement(task.env, pi)
    ps = set(p)
    got = {y for y in task.extension if ps <= set(y)}
    return got == task.output_set


@dataclass(frozen=True)
class PolicySet:
    """All correct policies of one task, in canonical order."""

    task: Task
    members: tuple[Statement, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Statement]:
        return iter(self.members)

    def __contains__(self, item) -> bool:
        return item in self.members


def correct_policies(task: Task, guards: Guards = DEFAULT_GUARDS) -> PolicySet:
    lang = enumerate_language(task.env, guards)
    members = tuple(pi for pi in lang if is_correct_policy(task, pi))
    return PolicySet(task, members)


def infer(task: Task, pi: Iterable[int], input_stmt: Iterable[int], seed: int) -> tuple[Statement, bool]:
    """Complete one input under a policy.

    The output is drawn uniformly (seeded) from the completions shared
    by the input and the policy; the flag reports membership in the
    task's correct outputs.
    """
    env = task.env
    p = require_statement(env, pi)
    x = canon_statement(env, input_stmt)
    if x not in task.input_set:
        raise InputNotInTask(f"{encode_statement(x)} is not an input of this task")
    merged = tuple(sorted(set(x) | set(p)))
    from .core import extension, is_statement

    if not is_statement(env, merged):
        raise NoOutput(
            f"policy {encode_statement(p)} admits no completion of {encode_statement(x)}"
        )
    # completions of the merged statement are exactly the completions
    # shared by the input and the policy
    choices = extension(env, merged).members
    out = choices[Random(seed).randrange(len(choices))]
    return out, out in task.output_set


# --- the generational hierarchy ---------------------------------------------------

def is_child(alpha: Task, omega: Task) -> bool:
    """Strictly fewer inputs, no new outputs."""
    if alpha.env != omega.env:
        raise EnvironmentMismatch("tasks live in different environments")
    return alpha.input_set < omega.input_set and alpha.output_set <= omega.output_set


# --- the task space -----------------------------------------------------------------

class TaskSpace:
    """Counted, enumerable, uniformly sampleable space of all tasks.

    Input sets are indexed as bit masks over the canonical language;
    for each the extension union is looked up in a subset table built
    once.  ``include_empty_outputs`` keeps or drops tasks whose correct
    output set is empty (kept by default).
    """

    def __init__(
        self,
        env: Environment,
        guards: Guards = DEFAULT_GUARDS,
        include_empty_outputs: bool = True,
    ):
        self.env = env
        self.include_empty_outputs = include_empty_outputs
        self.language = enumerate_language(env, guards)
        n = len(self.language)
        if n > guards.max_task_language:
            raise TaskSpaceTooLarge(
                f"|L_v| = {n} exceeds guard {guards.max_task_language}"
            )
        self._index = {s: i for i, s in enumerate(self.language)}
        from .core import extension

        # extension of each statement as a bit mask over language indices
        ext_masks = []
        for s in self.language:
            m = 0
            for y in extension(env, s):
                m |= 1 << self._index[y]
            ext_masks.append(m)
        self.ext_masks = tuple(ext_masks)
        self.ext_sizes = tuple(m.bit_count() for m in ext_masks)

        # union of member extensions for every subset of the language
        union = [0] * (1 << n)
        for mask in range(1, 1 << n):
            low = mask & -mask
            union[mask] = union[mask ^ low] | ext_masks[low.bit_length() - 1]
        self._union = union

        full = (1 << n) - 1
        self._min_outputs = 0 if include_empty_outputs else 1
        total = 0
        for mask in range(1, full):
            total += self._weight(union[mask].bit_count())
        self.total_count = total
        self._cum: list[int] | None = None
        self._masks_in_order: list[int] | None = None
        self._levels: dict[tuple[int, int], int] = {}

    def _weight(self, ext_size: int) -> int:
        # number of admissible output sets below an extension of that size
        w = (1 << ext_size) - 1 - self._min_outputs
        return w if w > 0 else 0

    # -- decoding helpers ------------------------------------------------

    def _statements_of(self, mask: int) -> tuple[Statement, ...]:
        return tuple(self.language[i] for i in _bit_indices(mask))

    def _task_from_masks(self, imask: int, omask: int) -> Task:
        emask = self._union[imask]
        ext = ExtensionSet(self._statements_of(emask))
        return Task(
            self.env,
            self._statements_of(imask),
            self._statements_of(omask),
            ext,
        )

    def task_key_from_masks(self, imask: int, omask: int) -> tuple[int, int]:
        return (imask, omask)

    # -- enumeration -------------------------------------------------------

    def _input_masks_in_order(self) -> Iterator[int]:
        n = len(self.language)
        for size in range(1, n):
            for combo in combinations(range(n), size):
                mask = 0
                for i in combo:
                    mask |= 1 << i
                yield mask

    def tasks(self) -> Iterator[Task]:
        """Every task exactly once: input sets by size then encoding,
        output sets likewise within each input set."""
        env = self.env
        for imask in self._input_masks_in_order():
            # everything but the output set is shared across one input set
            inputs = self._statements_of(imask)
            ext_statements = self._statements_of(self._union[imask])
            ext = ExtensionSet(ext_statements)
            k = len(ext_statements)
            for r in range(self._min_outputs, k):
                for combo in combinations(ext_statements, r):
                    yield Task(env, inputs, combo, ext)

    def __iter__(self) -> Iterator[Task]:
        return self.tasks()

    # -- exact uniform sampling ----------------------------------------------

    def _sampling_tables(self) -> tuple[list[int], list[int]]:
        if self._cum is None:
            masks: list[int] = []
            cum: list[int] = []
            running = 0
            for imask in self._input_masks_in_order():
                w = self._weight(self._union[imask].bit_count())
                if w:
                    running += w
                    masks.append(imask)
                    cum.append(running)
            self._masks_in_order = masks
            self._cum = cum
        return self._masks_in_order, self._cum

    def sample_index(self, index: int) -> tuple[int, int]:
        """Decode a flat index in [0, total_count) into task masks."""
        masks, cum = self._sampling_tables()
        pos = bisect_right(cum, index)
        imask = masks[pos]
        offset = index - (cum[pos - 1] if pos else 0)
        ordinal = offset + self._min_outputs  # skip the empty output set if excluded
        ext_indices = list(_bit_indices(self._union[imask]))
        omask = 0
        for bit, i in enumerate(ext_indices):
            if (ordinal >> bit) & 1:
                omask |= 1 << i
        return imask, omask

    def sample(self, seed: int) -> Task:
        if self.total_count == 0:
            raise EmptyTaskSpace("this environment admits no task")
        imask, omask = self.sample_index(Random(seed).randrange(self.total_count))
        return self._task_from_masks(imask, omask)

    def sample_many(self, seed: int, count: int) -> Iterator[Task]:
        if self.total_count == 0:
            raise EmptyTaskSpace("this environment admits no task")
        rng = Random(seed)
        for _ in range(count):
            imask, omask = self.sample_index(rng.randrange(self.total_count))
            yield self._task_from_masks(imask, omask)

    # -- hierarchy levels --------------------------------------------------------

    def level(self, task: Task) -> int:
        """Length of the longest strictly ascending chain of parents."""
        if task.env != self.env:
            raise EnvironmentMismatch("task belongs to a different environment")
        if self.total_count > MAX_HIERARCHY_TASKS:
            raise TaskSpaceTooLarge(
                f"|task space| = {self.total_count} exceeds {MAX_HIERARCHY_TASKS}"
            )
        imask = self._mask_of_statements(task.inputs)
        omask = self._mask_of_statements(task.outputs_correct)
        return self._level(imask, omask)

    def _mask_of_statements(self, statements: Iterable[Statement]) -> int:
        mask = 0
        for s in statements:
            mask |= 1 << self._index[s]
        return mask

    def _level(self, imask: int, omask: int) -> int:
        key = (imask, omask)
        memo = self._levels
        if key in memo:
            return memo[key]
        n = len(self.language)
        full = (1 << n) - 1
        best = 0
        free = full & ~imask
        # parents grow the input set strictly; outputs may grow within
        # the parent's extension
        sub = free
        while sub:
            imask2 = imask | sub
            if imask2 != full:
                emask2 = self._union[imask2]
                grow = emask2 & ~omask
                osub = grow
                while True:
                    omask2 = omask | osub
                    if omask2 != emask2 and (self.include_empty_outputs or omask2):
                        cand = 1 + self._level(imask2, omask2)
                        if cand > best:
                            best = cand
                    if osub == 0:
                        break
                    osub = (osub - 1) & grow
            sub = (sub - 1) & free
        memo[key] = best
        return best


def _bit_indices(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@lru_cache(maxsize=None)
def _space_cached(env: Environment, guards: Guards, include_empty_outputs: bool) -> TaskSpace:
    return TaskSpace(env, guards, include_empty_outputs)


def task_space(
    env: Environment,
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> TaskSpace:
    return _space_cached(env, guards, include_empty_outputs)


def count_tasks(
    env: Environment,
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> int:
    """Exact size of the task space (one power-of-two term per input set)."""
    return task_space(env, guards, include_empty_outputs).total_count


def enumerate_tasks(
    env: Environment,
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> Iterator[Task]:
    """Stream every task exactly once, in canonical order."""
    return task_space(env, guards, include_empty_outputs).tasks()


def sample_task(
    env: Environment,
    seed: int,
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
) -> Task:
    """Draw one task exactly uniformly from the task space."""
    return task_space(env, guards, include_empty_outputs).sample(seed)


def hierarchy_level(task: Task, space: TaskSpace) -> int:
    """Largest number of strictly ascending parent steps above the task.

    A child sits strictly lower than each of its parents, so its level
    exceeds theirs.
    """
    return space.level(task)

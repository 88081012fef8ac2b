"""Task utility and vocabulary comparison.

The utility of a task is the weakness of its weakest correct policy
minus the number of its correct outputs: how much room the vocabulary
leaves for weak (permissive) policies.  A task posed over the full
powerset vocabulary can be restricted to any sub-vocabulary by keeping
exactly the statements still expressible there; comparing utilities and
generalization probabilities across such restrictions is what the
verification reports in this module do.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .core import (
    DEFAULT_GUARDS,
    Environment,
    Guards,
    Program,
    Statement,
    encode_statement,
    env_hash,
    extension_size,
    mk_environment,
)
from .errors import (
    EmptyInstantiation,
    InvalidVocabulary,
    NoCorrectPolicy,
    StateSpaceTooLarge,
    WeakformError,
)
from .learning import generalization_table
from .tasks import Task, correct_policies, mk_task

__all__ = [
    "BoundReport",
    "MaximalityReport",
    "UninstantiatedTask",
    "UtilityReport",
    "all_vocabularies",
    "compare_vocabularies",
    "encode_vocabulary",
    "instantiate",
    "mk_uninstantiated",
    "restriction_is_strict_child",
    "utility",
    "verify_upper_bound",
    "verify_utility_maximal_at_P",
    "weakest_correct_policy",
]

#: Sweeping every sub-vocabulary costs 2^(2^states) instantiations.
MAX_SWEEP_STATES = 3


def _stmt_order(x: Statement) -> tuple[int, Statement]:
    return (len(x), x)


# --- utility ---------------------------------------------------------------------

def utility(task: Task, guards: Guards = DEFAULT_GUARDS) -> int:
    """Extension size of the weakest correct policy, minus the number of
    correct outputs.  Undefined (raises) when no correct policy exists."""
    pols = correct_policies(task, guards)
    if not pols.members:
        raise NoCorrectPolicy("utility is undefined without a correct policy")
    best = max(extension_size(task.env, p, guards) for p in pols.members)
    return best - len(task.outputs_correct)


def weakest_correct_policy(task: Task, guards: Guards = DEFAULT_GUARDS) -> tuple[Statement, int]:
    """The weakest correct policy and its extension size; ties go to the
    canonically smallest statement."""
    pols = correct_policies(task, guards)
    if not pols.members:
        raise NoCorrectPolicy("the task has no correct policy")
    sizes = {p: extension_size(task.env, p, guards) for p in pols.members}
    best = max(sizes.values())
    pick = min((p for p in pols.members if sizes[p] == best), key=_stmt_order)
    return pick, best


# --- uninstantiated tasks -----------------------------------------------------------

@dataclass(frozen=True)
class UninstantiatedTask:
    """A task over the full powerset vocabulary, awaiting a vocabulary."""

    base: Task

    @property
    def env(self) -> Environment:
        return self.base.env

    def __repr__(self) -> str:
        return f"UninstantiatedTask({self.base.encode()})"


def mk_uninstantiated(base: Task) -> UninstantiatedTask:
    n = base.env.state_count
    if base.env.vocabulary_size != (1 << n):
        raise InvalidVocabulary(
            "the base task must be posed over the full powerset vocabulary"
        )
    return UninstantiatedTask(base)


def _program_masks(env: Environment) -> tuple[int, ...]:
    return tuple(p.mask for p in env.programs)


def _normalise_vocabulary(
    rho: UninstantiatedTask, v_prime: Iterable
) -> tuple[tuple[int, ...], ...]:
    """Accept state-set iterables or Program values; reject anything not
    drawn from the base vocabulary."""
    base_sets = set(rho.env.program_sets())
    out = []
    for p in v_prime:
        states = tuple(sorted(p.states() if isinstance(p, Program) else p))
        if states not in base_sets:
            raise InvalidVocabulary(
                f"program {{{','.join(map(str, states))}}} is not in the base vocabulary"
            )
        out.append(states)
    return tuple(out)


def instantiate(
    rho: UninstantiatedTask,
    v_prime: Iterable,
    guards: Guards = DEFAULT_GUARDS,
) -> Task:
    """Restrict the base task to a sub-vocabulary.

    Keeps exactly the inputs and correct outputs whose programs are all
    still present, drops outputs that no longer complete any surviving
    input, and re-validates the result as a task of the new environment.
    Restriction by the full vocabulary is the identity.
    """
    sets = _normalise_vocabulary(rho, v_prime)
    env2 = mk_environment(rho.env.state_count, sets)
    kept = {p.states(): j for j, p in enumerate(env2.programs)}
    base_sets = rho.env.program_sets()

    def remap(statement: Statement) -> Statement | None:
        members = [base_sets[j] for j in statement]
        if any(m not in kept for m in members):
            return None
        return tuple(sorted(kept[m] for m in members))

    inputs = sorted(
        {m for m in (remap(i) for i in rho.base.inputs) if m is not None},
        key=_stmt_order,
    )
    if not inputs:
        raise EmptyInstantiation("no input statement survives this vocabulary")
    survivors = {m for m in (remap(o) for o in rho.base.outputs_correct) if m is not None}
    input_sets = [set(i) for i in inputs]
    outs = [o for o in survivors if any(i <= set(o) for i in input_sets)]
    return mk_task(env2, inputs, outs, guards)


def restriction_is_strict_child(rho: UninstantiatedTask, restricted: Task) -> bool:
    """Whether the restriction relates to its base as a strict child
    (strictly fewer inputs, no new outputs), compared program-wise."""

    def family(env: Environment, statements: Sequence[Statement]) -> frozenset:
        return frozenset(
            frozenset(env.programs[j].mask for j in s) for s in statements
        )

    ia = family(restricted.env, restricted.inputs)
    iw = family(rho.env, rho.base.inputs)
    oa = family(restricted.env, restricted.outputs_correct)
    ow = family(rho.env, rho.base.outputs_correct)
    return ia < iw and oa <= ow


# --- candidate vocabularies -----------------------------------------------------------

def encode_vocabulary(programs: Iterable) -> str:
    parts = []
    for p in programs:
        states = p.states() if isinstance(p, Program) else tuple(sorted(p))
        parts.append("{%s}" % ",".join(map(str, states)))
    return "[%s]" % ",".join(parts)


def all_vocabularies(env: Environment) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Every subset of the environment's vocabulary, smallest first."""
    sets = env.program_sets()
    for size in range(len(sets) + 1):
        for combo in combinations(sets, size):
            yield combo


# --- reports ---------------------------------------------------------------------------

def _fraction_str(f: Fraction | None) -> str:
    if f is None:
        return ""
    return f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True)
class VocabularyRow:
    """One candidate vocabulary's outcome in a utility comparison."""

    index: int
    vocabulary: str
    language_size: int | None
    utility: int | None
    witness_policy: str | None
    witness_extension_size: int | None
    strict_child: bool | None
    error: str | None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "vocabulary": self.vocabulary,
            "language_size": self.language_size,
            "utility": self.utility,
            "witness_policy": self.witness_policy,
            "witness_extension_size": self.witness_extension_size,
            "strict_child": self.strict_child,
            "error": self.error,
        }


def _report_header(rho: UninstantiatedTask, guards: Guards, seeds: Sequence[int]) -> dict:
    from . import __version__

    return {
        "environment_hash": env_hash(rho.env),
        "states": rho.env.state_count,
        "base_task": rho.base.encode(),
        "guards": {
            "max_vocabulary": guards.max_vocabulary,
            "max_truth_set": guards.max_truth_set,
            "max_task_language": guards.max_task_language,
            "max_powerset_states": guards.max_powerset_states,
        },
        "seeds": list(seeds),
        "version": __version__,
    }


def _aligned(rows: list[tuple], header: tuple) -> str:
    table = [tuple(str(c) for c in header)] + [tuple(str(c) for c in r) for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for r, row in enumerate(table):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


@dataclass(frozen=True)
class UtilityReport:
    header: dict
    rows: tuple[VocabularyRow, ...]

    def to_json(self) -> str:
        doc = dict(self.header)
        doc["rows"] = [r.to_dict() for r in self.rows]
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_text(self) -> str:
        cols = ("index", "vocabulary", "|L|", "utility", "witness", "|E|", "strict_child", "error")
        body = [
            (
                r.index,
                r.vocabulary,
                "" if r.language_size is None else r.language_size,
                "" if r.utility is None else r.utility,
                r.witness_policy or "",
                "" if r.witness_extension_size is None else r.witness_extension_size,
                "" if r.strict_child is None else r.strict_child,
                r.error or "",
            )
            for r in self.rows
        ]
        head = "\n".join(f"{k}: {v}" for k, v in sorted(self.header.items()))
        return head + "\n\n" + _aligned(body, cols)


def compare_vocabularies(
    rho: UninstantiatedTask,
    candidates: Sequence[Iterable],
    guards: Guards = DEFAULT_GUARDS,
    seeds: Sequence[int] = (),
) -> UtilityReport:
    """One row per candidate vocabulary; per-row failures are recorded,
    never raised."""
    header = _report_header(rho, guards, seeds)
    header["candidates"] = [encode_vocabulary(c) for c in candidates]
    rows = []
    for idx, cand in enumerate(candidates):
        encoded = encode_vocabulary(cand)
        try:
            restricted = instantiate(rho, cand, guards)
            from .core import enumerate_language

            lang = enumerate_language(restricted.env, guards)
            pi, size = weakest_correct_policy(restricted, guards)
            rows.append(
                VocabularyRow(
                    idx,
                    encoded,
                    len(lang),
                    size - len(restricted.outputs_correct),
                    encode_statement(pi),
                    size,
                    restriction_is_strict_child(rho, restricted),
                    None,
                )
            )
        except WeakformError as exc:
            rows.append(
                VocabularyRow(idx, encoded, None, None, None, None, None, type(exc).__name__)
            )
    return UtilityReport(header, tuple(rows))


@dataclass(frozen=True)
class CandidatePolicy:
    """A (vocabulary, policy) pair with its generalization probability."""

    candidate_index: int
    vocabulary: str
    policy: str
    extension_size: int
    probability: Fraction

    def to_dict(self) -> dict:
        return {
            "candidate_index": self.candidate_index,
            "vocabulary": self.vocabulary,
            "policy": self.policy,
            "extension_size": self.extension_size,
            "probability": _fraction_str(self.probability),
        }


@dataclass(frozen=True)
class BoundReport:
    """Outcome of the max-utility-then-max-weakness selection recipe."""

    header: dict
    outcome: str                      # "attained" | "not_attained" | "no_candidate"
    selected: CandidatePolicy | None
    best: CandidatePolicy | None
    ranking: tuple[CandidatePolicy, ...]
    utility_rows: tuple[VocabularyRow, ...]

    @property
    def attained(self) -> bool | None:
        if self.outcome == "no_candidate":
            return None
        return self.outcome == "attained"

    def to_json(self) -> str:
        doc = dict(self.header)
        doc["outcome"] = self.outcome
        doc["selected"] = self.selected.to_dict() if self.selected else None
        doc["best"] = self.best.to_dict() if self.best else None
        doc["ranking"] = [c.to_dict() for c in self.ranking]
        doc["utility_rows"] = [r.to_dict() for r in self.utility_rows]
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_text(self) -> str:
        head = "\n".join(f"{k}: {v}" for k, v in sorted(self.header.items()))
        parts = [head, "", f"outcome: {self.outcome}"]
        if self.selected:
            parts.append(
                f"selected: {self.selected.vocabulary} {self.selected.policy} "
                f"p={_fraction_str(self.selected.probability)}"
            )
        if self.best:
            parts.append(
                f"best:     {self.best.vocabulary} {self.best.policy} "
                f"p={_fraction_str(self.best.probability)}"
            )
        body = [
            (c.candidate_index, c.vocabulary, c.policy, c.extension_size, _fraction_str(c.probability))
            for c in self.ranking
        ]
        parts.append("")
        parts.append(_aligned(body, ("index", "vocabulary", "policy", "|E|", "probability")))
        return "\n".join(parts)


def verify_upper_bound(
    rho: UninstantiatedTask,
    candidates: Sequence[Iterable],
    guards: Guards = DEFAULT_GUARDS,
    include_empty_outputs: bool = True,
    seeds: Sequence[int] = (),
) -> BoundReport:
    """Select the candidate maximising utility, then its weakest correct
    policy, and check that pair attains the best generalization
    probability over every instantiable (vocabulary, policy) pair."""
    report = compare_vocabularies(rho, candidates, guards, seeds)
    pairs: list[CandidatePolicy] = []
    for idx, cand in enumerate(candidates):
        try:
            restricted = instantiate(rho, cand, guards)
            pols = correct_policies(restricted, guards)
            if not pols.members:
                continue
            table = generalization_table(restricted.env, guards, include_empty_outputs)
            for pi in pols.members:
                pairs.append(
                    CandidatePolicy(
                        idx,
                        encode_vocabulary(cand),
                        encode_statement(pi),
                        extension_size(restricted.env, pi, guards),
                        table.probability(pi),
                    )
                )
        except WeakformError:
            continue

    with_pairs = {p.candidate_index for p in pairs}
    defined = [
        r for r in report.rows if r.utility is not None and r.index in with_pairs
    ]
    header = _report_header(rho, guards, seeds)
    header["candidates"] = [encode_vocabulary(c) for c in candidates]
    if not defined or not pairs:
        return BoundReport(header, "no_candidate", None, None, (), report.rows)

    best_utility = max(r.utility for r in defined)
    chosen = next(r for r in defined if r.utility == best_utility)
    selected = next(
        p
        for p in pairs
        if p.candidate_index == chosen.index and p.policy == chosen.witness_policy
    )
    ranking = tuple(
        sorted(
            pairs,
            key=lambda p: (-p.probability, p.candidate_index, (len(p.policy), p.policy)),
        )
    )
    best = ranking[0]
    outcome = "attained" if selected.probability == best.probability else "not_attained"
    return BoundReport(header, outcome, selected, best, ranking, report.rows)


@dataclass(frozen=True)
class MaximalityReport:
    """Whether the full vocabulary maximises utility for one base task."""

    header: dict
    holds: bool
    utility_at_full: int | None
    witness: VocabularyRow | None
    rows: tuple[VocabularyRow, ...]

    def to_json(self) -> str:
        doc = dict(self.header)
        doc["holds"] = self.holds
        doc["utility_at_full"] = self.utility_at_full
        doc["witness"] = self.witness.to_dict() if self.witness else None
        doc["rows"] = [r.to_dict() for r in self.rows]
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_text(self) -> str:
        head = "\n".join(f"{k}: {v}" for k, v in sorted(self.header.items()))
        parts = [
            head,
            "",
            f"holds: {self.holds}",
            f"utility_at_full: {self.utility_at_full}",
        ]
        if self.witness:
            parts.append(
                f"beaten_by: {self.witness.vocabulary} utility={self.witness.utility}"
            )
        body = [
            (
                r.index,
                r.vocabulary,
                "" if r.utility is None else r.utility,
                r.error or "",
            )
            for r in self.rows
        ]
        parts.append("")
        parts.append(_aligned(body, ("index", "vocabulary", "utility", "error")))
        return "\n".join(parts)


def verify_utility_maximal_at_P(
    rho: UninstantiatedTask,
    guards: Guards = DEFAULT_GUARDS,
    seeds: Sequence[int] = (),
) -> MaximalityReport:
    """Sweep every sub-vocabulary and check none beats the full one.

    A candidate with defined utility while the full vocabulary has none
    counts as a violation and is returned as the witness.
    """
    n = rho.env.state_count
    if n > MAX_SWEEP_STATES:
        raise StateSpaceTooLarge(
            f"sweeping all vocabularies needs 2^(2^{n}) candidates; refuse beyond "
            f"{MAX_SWEEP_STATES} states"
        )
    candidates = list(all_vocabularies(rho.env))
    report = compare_vocabularies(rho, candidates, guards, seeds)
    full_row = report.rows[-1]  # the full vocabulary is the last subset
    defined = [r for r in report.rows if r.utility is not None]
    if full_row.utility is None:
        if defined:
            worst = max(defined, key=lambda r: (r.utility, -r.index))
            return MaximalityReport(report.header, False, None, worst, report.rows)
        return MaximalityReport(report.header, True, None, None, report.rows)
    violators = [r for r in defined if r.utility > full_row.utility]
    if violators:
        worst = max(violators, key=lambda r: (r.utility, -r.index))
        return MaximalityReport(report.header, False, full_row.utility, worst, report.rows)
    return MaximalityReport(report.header, True, full_row.utility, None, report.rows)

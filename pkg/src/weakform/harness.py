"""Experiment execution and report emission.

Every experiment turns into a list of flat string-valued rows under one
fixed header.  Rows are fully determined by the configuration and its
seeds; the wall-clock column stays empty unless timing is explicitly
requested, so that a rerun is byte-identical.  Reports are written
atomically (temp file, then rename) as CSV or as a JSON array of
objects with the same field names and values.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from random import Random

from . import __version__
from .bounds import (
    all_vocabularies,
    mk_uninstantiated,
    utility,
    verify_upper_bound,
)
from .config import ExperimentConfig
from .core import (
    Environment,
    Guards,
    encode_statement,
    env_hash,
    enumerate_language,
    extension_size,
    mk_environment,
)
from .errors import (
    EmptyReport,
    IoError,
    NoCorrectPolicy,
    WeakformError,
)
from .learning import (
    estimate_generalization_probability,
    evaluate_generalization,
    generalization_table,
    learn,
    proxy_by_name,
    sample_efficiency,
)
from .tasks import Task, enumerate_tasks, mk_task, task_space

__all__ = ["CSV_FIELDS", "run_experiment", "write_report"]

#: The fixed report header.  `value` carries the experiment-specific
#: number (exact rationals as "num/den"), `note` carries markers and
#: per-row error names.
CSV_FIELDS = (
    "experiment",
    "config_hash",
    "env_hash",
    "states",
    "vocab_size",
    "language_size",
    "task_count",
    "task_id",
    "proxy",
    "policy",
    "extension_size",
    "generalized",
    "utility",
    "value",
    "note",
    "seed",
    "wall_ms",
    "guards",
    "version",
)


def _guards_str(g: Guards) -> str:
    return (
        f"v{g.max_vocabulary};t{g.max_truth_set};"
        f"l{g.max_task_language};p{g.max_powerset_states}"
    )


def _env_of(config: ExperimentConfig) -> Environment:
    return mk_environment(
        config.environment["states"], config.environment["vocabulary"]
    )


class _RowFactory:
    """Fills the constant columns of every row of one run."""

    def __init__(self, config: ExperimentConfig, env: Environment):
        self.base = {name: "" for name in CSV_FIELDS}
        self.base["experiment"] = config.experiment
        self.base["config_hash"] = config.config_hash()
        self.base["env_hash"] = env_hash(env)
        self.base["states"] = str(env.state_count)
        self.base["vocab_size"] = str(env.vocabulary_size)
        self.base["guards"] = _guards_str(config.guards)
        self.base["version"] = __version__

    def row(self, **fields) -> dict[str, str]:
        out = dict(self.base)
        for key, value in fields.items():
            if key not in out:
                raise KeyError(f"unknown report field {key!r}")
            out[key] = "" if value is None else str(value)
        return out


def _bool_str(flag: bool) -> str:
    return "true" if flag else "false"


# --- the learn experiment -----------------------------------------------------------

def _derive_trial_seed(seed: int, trial: int) -> int:
    return seed * 1_000_003 + trial


def _derive_child(task: Task, rng: Random, child_input_count: int | None) -> Task:
    """Deterministically carve a strict child out of a sampled parent.

    Inputs are a random strict subset; outputs are the parent's outputs
    that still complete a kept input.  If the trimmed outputs fill the
    whole child extension, the canonically last one is dropped to keep
    the child a valid task.
    """
    k = child_input_count if child_input_count is not None else len(task.inputs) - 1
    k = max(1, min(k, len(task.inputs) - 1))
    kept = sorted(rng.sample(range(len(task.inputs)), k))
    inputs = [task.inputs[i] for i in kept]
    input_sets = [set(i) for i in inputs]
    outs = [
        o for o in task.outputs_correct if any(i <= set(o) for i in input_sets)
    ]
    from .core import extension_of_set

    ext = extension_of_set(task.env, inputs)
    if len(outs) == ext.size:
        outs = outs[:-1]
    return mk_task(task.env, inputs, outs)


def _learn_unit(config: ExperimentConfig, seed: int, trial: int) -> list[dict[str, str]]:
    env = _env_of(config)
    factory = _RowFactory(config, env)
    space = task_space(env, config.guards, config.include_empty_outputs)
    lang_size = len(space.language)
    rng = Random(_derive_trial_seed(seed, trial))

    parent = None
    for _ in range(10000):
        candidate = space.sample_index(rng.randrange(space.total_count))
        imask, omask = candidate
        if imask.bit_count() >= 2:
            parent = space._task_from_masks(imask, omask)
            break
    common = dict(
        language_size=lang_size,
        task_count=space.total_count,
        seed=f"{seed}.{trial}",
    )
    if parent is None:
        return [factory.row(note="NoUsableParent", **common)]

    child = _derive_child(parent, rng, config.child_input_count)
    task_id = f"parent:{parent.encode()};child:{child.encode()}"
    rows = []
    for name in config.proxies:
        proxy = proxy_by_name(name)
        try:
            pi = learn(child, proxy, config.guards)
        except NoCorrectPolicy:
            rows.append(
                factory.row(task_id=task_id, proxy=name, note="NoCorrectPolicy", **common)
            )
            continue
        try:
            eps = str(utility(child, config.guards))
        except NoCorrectPolicy:
            eps = ""
        rows.append(
            factory.row(
                task_id=task_id,
                proxy=name,
                policy=encode_statement(pi),
                extension_size=extension_size(env, pi, config.guards),
                generalized=_bool_str(evaluate_generalization(pi, parent)),
                utility=eps,
                **common,
            )
        )
    return rows


def _learn_unit_star(args) -> list[dict[str, str]]:
    return _learn_unit(*args)


# --- experiment dispatch ---------------------------------------------------------------

def run_experiment(
    config: ExperimentConfig,
    jobs: int = 1,
    timing: bool = False,
) -> list[dict[str, str]]:
    """Execute the configured experiment and return its report rows."""
    t0 = time.monotonic()
    env = _env_of(config)
    factory = _RowFactory(config, env)
    kind = config.experiment

    if kind == "enumerate":
        rows = _run_enumerate(config, env, factory)
    elif kind == "learn":
        rows = _run_learn(config, jobs)
    elif kind == "compare-proxies":
        rows = _run_compare(config, env, factory)
    elif kind == "utility":
        rows = _run_utility(config, env, factory)
    elif kind == "verify-bound":
        rows = _run_verify_bound(config, env, factory)
    elif kind == "sample-gen":
        rows = _run_sample_gen(config, env, factory)
    else:  # config validation makes this unreachable
        raise WeakformError(f"unknown experiment {kind!r}")

    if timing:
        wall = str(int((time.monotonic() - t0) * 1000))
        for row in rows:
            row["wall_ms"] = wall
    return rows


def _run_enumerate(config, env, factory) -> list[dict[str, str]]:
    lang = enumerate_language(env, config.guards)
    space = task_space(env, config.guards, config.include_empty_outputs)
    return [
        factory.row(
            language_size=len(lang),
            task_count=space.total_count,
            policy=encode_statement(statement),
            extension_size=extension_size(env, statement, config.guards),
        )
        for statement in lang
    ]


def _run_learn(config, jobs) -> list[dict[str, str]]:
    units = [(config, seed, trial) for seed in config.seeds for trial in range(config.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_learn_unit_star, units))
    else:
        chunks = [_learn_unit_star(u) for u in units]
    return [row for chunk in chunks for row in chunk]


def _run_compare(config, env, factory) -> list[dict[str, str]]:
    lang = enumerate_language(env, config.guards)
    space = task_space(env, config.guards, config.include_empty_outputs)
    proxies = [proxy_by_name(name) for name in config.proxies]
    rows = []
    for a in proxies:
        for b in proxies:
            if a.name == b.name:
                continue
            value = sample_efficiency(
                env, a, b, config.guards, config.include_empty_outputs
            )
            rows.append(
                factory.row(
                    language_size=len(lang),
                    task_count=space.total_count,
                    proxy=f"{a.name}|{b.name}",
                    value=value,
                    note="more_efficient" if value < 0 else (
                        "tie" if value == 0 else "less_efficient"
                    ),
                )
            )
    return rows


def _run_utility(config, env, factory) -> list[dict[str, str]]:
    lang = enumerate_language(env, config.guards)
    rows = []
    if config.task is not None:
        tasks = [mk_task(env, config.task["inputs"], config.task["outputs"], config.guards)]
    else:
        tasks = enumerate_tasks(env, config.guards, config.include_empty_outputs)
    for task in tasks:
        try:
            rows.append(
                factory.row(
                    language_size=len(lang),
                    task_id=task.encode(),
                    utility=utility(task, config.guards),
                )
            )
        except NoCorrectPolicy:
            rows.append(
                factory.row(
                    language_size=len(lang),
                    task_id=task.encode(),
                    note="NoCorrectPolicy",
                )
            )
    return rows


def _run_verify_bound(config, env, factory) -> list[dict[str, str]]:
    rho = mk_uninstantiated(
        mk_task(env, config.rho["inputs"], config.rho["outputs"], config.guards)
    )
    if config.candidates == "all":
        candidates = list(all_vocabularies(env))
    else:
        candidates = [list(v) for v in config.candidates]
    report = verify_upper_bound(
        rho, candidates, config.guards, config.include_empty_outputs
    )
    rows = [
        factory.row(
            task_id=rho.base.encode(),
            note=f"outcome={report.outcome}",
            value="" if report.selected is None else (
                f"{report.selected.probability.numerator}/"
                f"{report.selected.probability.denominator}"
            ),
            policy="" if report.selected is None else report.selected.policy,
            proxy="" if report.selected is None else report.selected.vocabulary,
        )
    ]
    for rank, pair in enumerate(report.ranking):
        rows.append(
            factory.row(
                task_id=pair.vocabulary,
                policy=pair.policy,
                extension_size=pair.extension_size,
                value=f"{pair.probability.numerator}/{pair.probability.denominator}",
                note=f"rank={rank}",
            )
        )
    return rows


def _run_sample_gen(config, env, factory) -> list[dict[str, str]]:
    lang = enumerate_language(env, config.guards)
    table = generalization_table(env, config.guards, config.include_empty_outputs)
    rows = []
    for seed in config.seeds:
        for statement in lang:
            exact = table.probability(statement)
            est = estimate_generalization_probability(
                env,
                statement,
                config.samples,
                seed,
                config.guards,
                config.include_empty_outputs,
            )
            rows.append(
                factory.row(
                    language_size=len(lang),
                    task_count=table.denominator,
                    policy=encode_statement(statement),
                    extension_size=extension_size(env, statement, config.guards),
                    value=f"{exact.numerator}/{exact.denominator}",
                    note=f"est={est.successes}/{est.samples}",
                    seed=seed,
                )
            )
    return rows


# --- report writing ------------------------------------------------------------------------

def _render_csv(rows: list[dict[str, str]]) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _render_json(rows: list[dict[str, str]]) -> str:
    return json.dumps(rows, indent=2) + "\n"


def render_report(rows: list[dict[str, str]], format: str) -> str:
    if not rows:
        raise EmptyReport("refusing to write a report with no rows")
    if format == "csv":
        return _render_csv(rows)
    if format == "json":
        return _render_json(rows)
    raise WeakformError(f"unknown report format {format!r}")


def write_report(rows: list[dict[str, str]], path: str | Path, format: str = "csv") -> None:
    """Atomically write the rows; no partial file survives a failure."""
    text = render_report(rows, format)
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=str(path.parent) or ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write report to {path}: {exc}") from exc

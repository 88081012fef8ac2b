"""Experiment configuration documents.

Configs are JSON.  Parsing applies every default explicitly, so the
parsed object always lists the effective value of every field; its
canonical serialisation round-trips byte-identically and is what the
config hash covers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .core import (
    DEFAULT_GUARDS,
    HARD_GUARD_LIMITS,
    Guards,
    environment_to_dict,
    full_powerset_vocabulary,
    load_environment,
    mk_environment,
)
from .errors import GuardConflict, ParseError
from .learning import proxy_by_name

__all__ = [
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "config_from_dict",
    "parse_config",
]

EXPERIMENT_KINDS = (
    "enumerate",
    "learn",
    "compare-proxies",
    "utility",
    "verify-bound",
    "sample-gen",
)

_TOP_LEVEL_KEYS = {
    "experiment",
    "environment",
    "proxies",
    "seeds",
    "trials",
    "child_input_count",
    "include_empty_outputs",
    "candidates",
    "rho",
    "task",
    "samples",
    "guards",
    "output",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment: no silent defaults remain."""

    experiment: str
    environment: dict            # inline canonical {"states": ..., "vocabulary": [...]}
    proxies: tuple[str, ...]
    seeds: tuple[int, ...]
    trials: int
    child_input_count: int | None
    include_empty_outputs: bool
    candidates: Any              # "all" or tuple of vocabularies (tuples of state tuples)
    rho: dict | None             # {"inputs": [...], "outputs": [...]}
    task: dict | None
    samples: int
    guards: Guards
    output_path: str | None
    output_format: str

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "environment": self.environment,
            "proxies": list(self.proxies),
            "seeds": list(self.seeds),
            "trials": self.trials,
            "child_input_count": self.child_input_count,
            "include_empty_outputs": self.include_empty_outputs,
            "candidates": (
                self.candidates
                if isinstance(self.candidates, str)
                else [[list(p) for p in vocab] for vocab in self.candidates]
            ),
            "rho": self.rho,
            "task": self.task,
            "samples": self.samples,
            "guards": {
                "max_vocabulary": self.guards.max_vocabulary,
                "max_truth_set": self.guards.max_truth_set,
                "max_task_language": self.guards.max_task_language,
                "max_powerset_states": self.guards.max_powerset_states,
            },
            "output": {"path": self.output_path, "format": self.output_format},
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        # the destination does not define the experiment, so the hash
        # ignores the output section
        doc = {k: v for k, v in self.to_dict().items() if k != "output"}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]

    def with_overrides(
        self,
        seeds: tuple[int, ...] | None = None,
        output_path: str | None = None,
        output_format: str | None = None,
    ) -> "ExperimentConfig":
        cfg = self
        if seeds is not None:
            cfg = replace(cfg, seeds=seeds)
        if output_path is not None:
            cfg = replace(cfg, output_path=output_path)
        if output_format is not None:
            cfg = replace(cfg, output_format=output_format)
        return cfg


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise ParseError(message)


def _parse_guards(doc: Any) -> Guards:
    if doc is None:
        return DEFAULT_GUARDS
    _expect(isinstance(doc, dict), "guards must be an object")
    fields = {
        "max_vocabulary": HARD_GUARD_LIMITS.max_vocabulary,
        "max_truth_set": HARD_GUARD_LIMITS.max_truth_set,
        "max_task_language": HARD_GUARD_LIMITS.max_task_language,
        "max_powerset_states": HARD_GUARD_LIMITS.max_powerset_states,
    }
    values = {}
    for key, value in doc.items():
        if key not in fields:
            raise ParseError(f"unknown guard {key!r}")
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise GuardConflict(f"guard {key} must be a positive integer")
        if value > fields[key]:
            raise GuardConflict(
                f"guard {key}={value} exceeds the hard maximum {fields[key]}"
            )
        values[key] = value
    return replace(DEFAULT_GUARDS, **values)


def _parse_environment(doc: Any, base_dir: Path | None, guards: Guards) -> dict:
    _expect(isinstance(doc, dict), "environment must be an object")
    if "file" in doc:
        path = Path(doc["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            env = load_environment(path)
        except OSError as exc:
            raise ParseError(f"cannot read environment file {path}: {exc}") from None
    elif "full_powerset" in doc:
        env = full_powerset_vocabulary(doc["full_powerset"], guards)
    elif "states" in doc and "vocabulary" in doc:
        env = mk_environment(doc["states"], doc["vocabulary"])
    else:
        raise ParseError(
            "environment needs 'states'+'vocabulary', 'file' or 'full_powerset'"
        )
    return environment_to_dict(env)


def _parse_statement_sets(doc: Any, label: str) -> dict:
    _expect(isinstance(doc, dict), f"{label} must be an object")
    _expect(
        set(doc) <= {"inputs", "outputs"} and "inputs" in doc and "outputs" in doc,
        f"{label} needs exactly 'inputs' and 'outputs'",
    )
    for key in ("inputs", "outputs"):
        _expect(
            isinstance(doc[key], list)
            and all(isinstance(s, list) for s in doc[key]),
            f"{label}.{key} must be a list of index lists",
        )
    return {
        "inputs": [sorted(set(s)) for s in doc["inputs"]],
        "outputs": [sorted(set(s)) for s in doc["outputs"]],
    }


def config_from_dict(
    doc: dict,
    base_dir: Path | None = None,
    default_experiment: str | None = None,
) -> ExperimentConfig:
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise ParseError(f"unknown configuration keys: {sorted(unknown)}")

    experiment = doc.get("experiment", default_experiment)
    _expect(experiment is not None, "missing 'experiment'")
    _expect(
        experiment in EXPERIMENT_KINDS,
        f"experiment must be one of {', '.join(EXPERIMENT_KINDS)}; got {experiment!r}",
    )
    if default_experiment is not None and doc.get("experiment") not in (None, default_experiment):
        raise ParseError(
            f"config says experiment={doc['experiment']!r} but the subcommand is "
            f"{default_experiment!r}"
        )

    guards = _parse_guards(doc.get("guards"))
    _expect("environment" in doc, "missing 'environment'")
    environment = _parse_environment(doc["environment"], base_dir, guards)

    proxies = doc.get("proxies", ["weakness"])
    _expect(
        isinstance(proxies, list) and all(isinstance(p, str) for p in proxies),
        "proxies must be a list of names",
    )
    for name in proxies:
        proxy_by_name(name, base_dir)  # raises UnknownProxy

    seeds = doc.get("seeds", [0])
    _expect(
        isinstance(seeds, list)
        and seeds != []
        and all(isinstance(s, int) and not isinstance(s, bool) for s in seeds),
        "seeds must be a nonempty list of integers",
    )

    trials = doc.get("trials", 1)
    _expect(isinstance(trials, int) and trials >= 1, "trials must be >= 1")

    child_input_count = doc.get("child_input_count")
    if child_input_count is not None:
        _expect(
            isinstance(child_input_count, int) and child_input_count >= 1,
            "child_input_count must be >= 1",
        )

    include_empty = doc.get("include_empty_outputs", True)
    _expect(isinstance(include_empty, bool), "include_empty_outputs must be a boolean")

    candidates = doc.get("candidates", "all")
    if candidates != "all":
        _expect(
            isinstance(candidates, list)
            and all(isinstance(v, list) for v in candidates),
            "candidates must be \"all\" or a list of vocabularies",
        )
        candidates = tuple(
            tuple(tuple(sorted(set(p))) for p in vocab) for vocab in candidates
        )

    rho = doc.get("rho")
    if rho is not None:
        rho = _parse_statement_sets(rho, "rho")
    task = doc.get("task")
    if task is not None:
        task = _parse_statement_sets(task, "task")

    samples = doc.get("samples", 10000)
    _expect(isinstance(samples, int) and samples >= 1, "samples must be >= 1")

    output = doc.get("output", {})
    _expect(isinstance(output, dict), "output must be an object")
    _expect(set(output) <= {"path", "format"}, "output allows only 'path' and 'format'")
    output_path = output.get("path")
    output_format = output.get("format", "csv")
    _expect(output_format in ("csv", "json"), "output format must be csv or json")

    if experiment == "compare-proxies":
        _expect(len(proxies) >= 2, "compare-proxies needs at least two proxies")
    if experiment == "verify-bound":
        _expect(rho is not None, "verify-bound needs 'rho'")
        n = environment["states"]
        _expect(
            len(environment["vocabulary"]) == (1 << n),
            "verify-bound needs a full-powerset environment",
        )

    return ExperimentConfig(
        experiment=experiment,
        environment=environment,
        proxies=tuple(proxies),
        seeds=tuple(seeds),
        trials=trials,
        child_input_count=child_input_count,
        include_empty_outputs=include_empty,
        candidates=candidates,
        rho=rho,
        task=task,
        samples=samples,
        guards=guards,
        output_path=output_path,
        output_format=output_format,
    )


def parse_config(
    text: str,
    base_dir: Path | None = None,
    default_experiment: str | None = None,
) -> ExperimentConfig:
    """Parse and validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    _expect(isinstance(doc, dict), "the configuration document must be a JSON object")
    return config_from_dict(doc, base_dir, default_experiment)

from __future__ import annotations

import json

import pytest

from weakform import (
    Guards,
    VocabularyReorderedWarning,
    enumerate_language,
    env_hash,
    environment_to_dict,
    equivalent,
    extension,
    extension_of_set,
    extension_size,
    is_completion,
    is_statement,
    language_size,
    load_environment,
    mk_environment,
    save_environment,
    truth_set,
)
from weakform.errors import (
    DuplicateProgram,
    IndexOutOfRange,
    NotAStatement,
    StateOutOfRange,
    TruthSetTooLarge,
    VocabularyTooLarge,
)

from helpers import (
    all_environments,
    brute_extension,
    brute_language,
    brute_truth_set,
)


# --- construction ------------------------------------------------------------

def test_mk_environment_env2(env2):
    assert env2.state_count == 2
    assert env2.program_sets() == ((0,), (1,), (0, 1))


def test_mk_environment_duplicate():
    with pytest.raises(DuplicateProgram):
        mk_environment(2, [{0}, {0}])


def test_mk_environment_empty_program_admitted():
    env = mk_environment(1, [{0}, set()])
    assert env.program_sets() == ((), (0,))


def test_mk_environment_rejects_bad_states():
    with pytest.raises(StateOutOfRange):
        mk_environment(2, [{0, 2}])
    with pytest.raises(StateOutOfRange):
        mk_environment(0, [])


def test_canonical_order_is_cardinality_then_lex():
    env = mk_environment(4, [{1, 2}, {0, 3}, {3}, {0}])
    assert env.program_sets() == ((0,), (3,), (0, 3), (1, 2))


# --- truth sets and statement checks -------------------------------------------

def test_truth_set_examples(env2):
    assert truth_set(env2, [0, 2]) == {0}
    assert truth_set(env2, []) == {0, 1}
    assert truth_set(env2, [0, 1]) == set()


def test_truth_set_index_error(env2):
    with pytest.raises(IndexOutOfRange):
        truth_set(env2, [3])


def test_is_statement_examples(env2):
    assert is_statement(env2, [0, 2]) is True
    assert is_statement(env2, [0, 1]) is False
    assert is_statement(env2, []) is True


# --- language enumeration -------------------------------------------------------

def test_enumerate_language_env2(env2):
    assert enumerate_language(env2) == ((), (0,), (1,), (2,), (0, 2), (1, 2))


def test_enumerate_language_pair(env_pair):
    assert enumerate_language(env_pair) == ((), (0,), (1,))


def test_enumerate_language_empty_vocabulary():
    env = mk_environment(1, [])
    assert enumerate_language(env) == ((),)


def test_enumerate_language_guard(env2):
    with pytest.raises(VocabularyTooLarge):
        enumerate_language(env2, Guards(max_vocabulary=2))


def test_enumerate_language_matches_brute_sweep():
    for env in all_environments(3, 3):
        assert enumerate_language(env) == tuple(brute_language(env))


def test_enumerate_language_deterministic(env2):
    a = repr(enumerate_language(env2))
    b = repr(enumerate_language(mk_environment(2, [{0}, {1}, {0, 1}])))
    assert a == b


# --- completions and extensions ---------------------------------------------------

def test_is_completion():
    assert is_completion((0, 2), (2,)) is True
    assert is_completion((2,), (0, 2)) is False
    assert is_completion((0, 2), (0, 2)) is True


def test_extension_examples(env2):
    assert extension(env2, [2]).as_set() == {(2,), (0, 2), (1, 2)}
    assert extension(env2, [0, 2]).as_set() == {(0, 2)}
    assert extension(env2, []).as_set() == set(enumerate_language(env2))


def test_extension_rejects_non_statement(env2):
    with pytest.raises(NotAStatement):
        extension(env2, [0, 1])


def test_extension_size_examples(env2):
    assert extension_size(env2, [2]) == 3
    assert extension_size(env2, [0]) == 2
    assert extension_size(env2, []) == 6


def test_extension_size_guard(env2):
    with pytest.raises(TruthSetTooLarge):
        extension_size(env2, [], Guards(max_truth_set=1))


def test_extension_of_set_examples(env2):
    got = extension_of_set(env2, [(2,), (1,)])
    assert got.as_set() == {(2,), (0, 2), (1, 2), (1,)}
    assert got.size == 4
    assert extension_of_set(env2, []).as_set() == set()
    assert extension_of_set(env2, [()]).as_set() == set(enumerate_language(env2))


def test_equivalent(env2):
    assert equivalent(env2, (0,), (0,)) is True
    assert equivalent(env2, (0,), (0, 2)) is False
    assert equivalent(env2, (1,), (2,)) is False


# --- cross-checked sweeps ----------------------------------------------------------

def test_extension_matches_brute_sweep():
    for env in all_environments(3, 3):
        for x in brute_language(env):
            assert extension(env, x).as_set() == brute_extension(env, x)


def test_extension_size_matches_enumeration_sweep():
    # the inclusion-exclusion path against the enumeration path
    for env in all_environments(3, 3):
        for x in enumerate_language(env):
            assert extension_size(env, x) == len(extension(env, x))


def test_language_size_matches_enumeration():
    for env in all_environments(3, 3):
        assert language_size(env) == len(enumerate_language(env))


def test_truth_sets_match_brute(env2):
    for x in enumerate_language(env2):
        assert truth_set(env2, x) == brute_truth_set(env2, x)


# --- order-theoretic invariants ------------------------------------------------------

def test_antitonicity():
    for env in all_environments(2, 3):
        lang = enumerate_language(env)
        for x in lang:
            ex = extension(env, x).as_set()
            for y in ex:
                # x <= y, so the extension of y nests inside that of x
                ey = extension(env, y).as_set()
                assert ey <= ex
                assert len(ey) <= len(ex)


def test_self_membership():
    for env in all_environments(2, 3):
        for x in enumerate_language(env):
            assert x in extension(env, x)


def test_truth_set_monotone_along_completion(env2):
    for x in enumerate_language(env2):
        tx = truth_set(env2, x)
        for y in extension(env2, x):
            assert truth_set(env2, y) <= tx


def test_extension_members_are_statements():
    for env in all_environments(2, 3):
        for x in enumerate_language(env):
            for y in extension(env, x):
                assert is_statement(env, y)


# --- serialisation ---------------------------------------------------------------------

def test_environment_roundtrip(tmp_path, env2):
    path = tmp_path / "env.json"
    save_environment(env2, path)
    loaded = load_environment(path)
    assert loaded == env2
    assert env_hash(loaded) == env_hash(env2)


def test_load_warns_on_reorder(tmp_path):
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"states": 2, "vocabulary": [[0, 1], [0], [1]]}))
    with pytest.warns(VocabularyReorderedWarning):
        env = load_environment(path)
    assert env.program_sets() == ((0,), (1,), (0, 1))


def test_environment_to_dict(env2):
    assert environment_to_dict(env2) == {
        "states": 2,
        "vocabulary": [[0], [1], [0, 1]],
    }

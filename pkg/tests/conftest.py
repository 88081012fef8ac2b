from __future__ import annotations

import pytest

from weakform import mk_environment


@pytest.fixture
def env2():
    """Two states, vocabulary [{0}, {1}, {0,1}]; the worked fixture."""
    return mk_environment(2, [{0}, {1}, {0, 1}])


@pytest.fixture
def env_pair():
    """Two states, vocabulary [{0}, {1}]; three-statement language."""
    return mk_environment(2, [{0}, {1}])

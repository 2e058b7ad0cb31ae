"""Shared fixtures: cached tiling corpora so exhaustive suites enumerate once."""

import pytest

import tilelab as tl

_corpora: dict[tuple[int, int | None], list] = {}


def corpus(M: int, cap: int | None = None) -> list:
    """Complete enumeration when cap is None, stratified sample otherwise.

    Cached for the whole session; callers must not mutate the lists.
    """
    key = (M, cap)
    if key not in _corpora:
        ctx = tl.factorize(M)
        if cap is None:
            _corpora[key] = tl.enumerate_tilings(ctx)
        else:
            _corpora[key] = tl.sample_tilings(ctx, cap)
    return _corpora[key]


@pytest.fixture(scope="session")
def tilings():
    return corpus

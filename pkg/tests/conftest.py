"""Shared fixtures: test environment flags and the built-in germ records."""

import os

# Must be set before the config and database modules are imported
os.environ["TESTING"] = "true"

import pytest

from symplectic_restrictions.algebra import polynomial_ring
from symplectic_restrictions.catalog import load_family


@pytest.fixture(scope="session")
def u7():
    return load_family("U7")


@pytest.fixture(scope="session")
def u8():
    return load_family("U8")


@pytest.fixture(scope="session")
def u9():
    return load_family("U9")


@pytest.fixture
def xring():
    """Q[x1, x2, x3]."""
    return polynomial_ring(("x1", "x2", "x3"))

"""Shared fixtures."""

import pytest

from helpers import graph_battery


@pytest.fixture(scope="session")
def battery():
    """50 seeded random graphs (<= 12 nodes, C/N/O labels)."""
    return graph_battery()

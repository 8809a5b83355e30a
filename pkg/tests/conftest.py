"""Shared fixtures for the net_homophily test suite."""

from pathlib import Path

import pytest
from hypothesis import settings

from net_homophily import build_graph

settings.register_profile("net-homophily", deadline=None, max_examples=50)
settings.load_profile("net-homophily")


@pytest.fixture
def path_graph():
    """Path a - b - c with a, b coloured 'red' and c 'blue'."""
    return build_graph(
        edges=[("a", "b"), ("b", "c")],
        node_colors={"a": "red", "b": "red", "c": "blue"},
    )


@pytest.fixture
def two_triangles():
    """Two monochrome triangles joined by one bridge edge."""
    return build_graph(
        edges=[
            ("a1", "a2"), ("a2", "a3"), ("a1", "a3"),
            ("b1", "b2"), ("b2", "b3"), ("b1", "b3"),
            ("a1", "b1"),
        ],
        node_colors={
            "a1": "A", "a2": "A", "a3": "A",
            "b1": "B", "b2": "B", "b3": "B",
        },
    )


@pytest.fixture
def star_graph():
    """Star with centre 'hub' and five leaves in three classes."""
    leaves = ["l1", "l2", "l3", "l4", "l5"]
    colours = {"hub": "H", "l1": "H", "l2": "P", "l3": "P", "l4": "Q", "l5": "Q"}
    return build_graph([("hub", leaf) for leaf in leaves], colours)


@pytest.fixture
def data_dir():
    """Directory of the bundled sample input files."""
    return Path(__file__).parent / "data"

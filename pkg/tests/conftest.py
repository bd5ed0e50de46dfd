from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from weakorder.domain import parse_program  # noqa: E402
from weakorder.graph import DirectedGraph, parse_graph  # noqa: E402

CORPUS = Path(__file__).resolve().parent.parent / "src" / "weakorder" / "corpus"


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text()


def load_graph(name: str) -> DirectedGraph:
    return parse_graph(corpus_text(name))


def load_program(name: str):
    return parse_program(corpus_text(name))


def labelled(w, pairs):
    """Pairs of node ids rendered with the WPO's labels."""
    return {(w.label(a), w.label(b)) for a, b in pairs}


@pytest.fixture
def g1():
    return load_graph("g1.graph")


@pytest.fixture
def g2():
    return load_graph("g2.graph")


@pytest.fixture
def g3():
    return load_graph("g3.graph")


@pytest.fixture
def fig1a():
    return load_graph("fig1a.graph")


@pytest.fixture
def fig1_program():
    return load_program("fig1.prog")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

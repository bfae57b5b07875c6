from datetime import date
from pathlib import Path

import networkx as nx
import pytest

from coauthnet.ingest import PaperRecord
from coauthnet.netbuild import TopicNetwork

DATA = Path(__file__).parent / "data"


def rec(pid, authors, topic=0, when=date(2021, 1, 1)):
    return PaperRecord(pid, f"title {pid}", "", tuple(authors), ("cs.SI",), when, topic)


def net_of(g: nx.Graph, topic=0, single=0, multi=None) -> TopicNetwork:
    for a, b in g.edges:
        g[a][b].setdefault("weight", 1)
    for n in g.nodes:
        g.nodes[n].setdefault("paper_count", 1)
    return TopicNetwork(topic, g, single, g.number_of_edges() if multi is None else multi)


def fixture_graphs() -> dict[str, nx.Graph]:
    two_tri = nx.Graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    tri_pendant = nx.Graph([(0, 1), (1, 2), (0, 2), (2, 3)])
    return {
        "star": nx.star_graph(4),
        "cycle": nx.cycle_graph(6),
        "path": nx.path_graph(5),
        "triangle": nx.complete_graph(3),
        "dyad": nx.complete_graph(2),
        "two_triangles": two_tri,
        "triangle_pendant": tri_pendant,
        "k4": nx.complete_graph(4),
        "k5": nx.complete_graph(5),
    }


@pytest.fixture
def tiny_paths():
    return DATA / "tiny_metadata.jsonl", DATA / "tiny_topics.csv"


# acceptance criteria report one line each, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

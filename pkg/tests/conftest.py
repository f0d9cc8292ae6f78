import os
import sys

from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from hyperdepth.hypergraph import Hypergraph  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def hypergraphs(draw, max_edges=4, max_vertices=5, min_edges=1, connected=False):
    """Hyperedges over vertices 1..n, every vertex covered; optionally connected."""
    n = draw(st.integers(1, max_vertices))
    vs = [str(i) for i in range(1, n + 1)]
    m = draw(st.integers(min_edges, max_edges))
    contents = [draw(st.sets(st.sampled_from(vs), min_size=1, max_size=min(n, 3))) for _ in range(m)]
    covered = set().union(*contents)
    vs = [v for v in vs if v in covered]
    H = Hypergraph(tuple(vs), tuple(f"e{j}" for j in range(1, m + 1)),
                   tuple(frozenset(c) for c in contents))
    if connected:
        from hyperdepth.hypergraph import is_connected
        from hypothesis import assume
        assume(is_connected(H))
    return H


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

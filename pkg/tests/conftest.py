import pytest

from torsdp.ingest import parse_paths
from torsdp.synth import generate_hierarchy, generate_paths, paths_text


def pytest_terminal_summary(terminalreporter):
    from oracles import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def hierarchy():
    return generate_hierarchy(200, seed=0)


@pytest.fixture(scope="session")
def clean_data(hierarchy):
    return generate_paths(hierarchy, 10000, noise=0.0, seed=0)


@pytest.fixture(scope="session")
def noisy_data(hierarchy):
    return generate_paths(hierarchy, 10000, noise=0.05, seed=0, leakers=1)


@pytest.fixture(scope="session")
def noisy_pathset(noisy_data):
    return parse_paths(paths_text(noisy_data.paths))


@pytest.fixture
def small_synth(tmp_path):
    h = generate_hierarchy(60, seed=3)
    data = generate_paths(h, 1500, noise=0.05, seed=3, leakers=1)
    p = tmp_path / "paths.txt"
    p.write_text(paths_text(data.paths))
    return h, data, p

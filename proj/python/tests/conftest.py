import os
import pathlib

import pytest


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("CROWDLENS_CLI")
    if not path or not pathlib.Path(path).exists():
        pytest.skip("CROWDLENS_CLI not set")
    return path


@pytest.fixture(scope="session")
def fixtures():
    root = os.environ.get("CROWDLENS_FIXTURES")
    if root:
        return pathlib.Path(root)
    return pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


@pytest.fixture(scope="session")
def small_city(tmp_path_factory, cli):
    import subprocess

    out = tmp_path_factory.mktemp("city")
    subprocess.run(
        [cli, "synth", "--seed", "11", "--users", "2000", "--antennas-count", "50", "--days", "7", "--out", str(out)],
        check=True,
        capture_output=True,
    )
    return out

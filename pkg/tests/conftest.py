import json
import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from algsim.policy import load_policy, policy_from_dict  # noqa: E402
from algsim.vnet import default_network  # noqa: E402


def shipped(name: str) -> bytes:
    return resources.files("algsim.data").joinpath(name).read_bytes()


def shipped_json(name: str) -> dict:
    return json.loads(shipped(name))


@pytest.fixture(scope="session")
def net_config():
    return default_network()


@pytest.fixture(scope="session")
def net_config_39():
    return default_network(latency_39ms=True)


@pytest.fixture(scope="session")
def reference_policy():
    return load_policy(shipped("policy_reference.json"))


@pytest.fixture(scope="session")
def mitigated_policy():
    return load_policy(shipped("policy_mitigated.json"))


@pytest.fixture
def policy_doc():
    """A mutable copy of the reference policy document."""
    return shipped_json("policy_reference.json")


def make_policy(doc: dict, **changes):
    d = dict(doc)
    d.update(changes)
    return policy_from_dict(d)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])

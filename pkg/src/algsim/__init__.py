"""Simulated application layer gateway testbed with a CWE-driven attack harness."""

from .harness import ALL_IDS, SCENARIOS, ScenarioResult, Verdict, run_scenario, run_scenarios
from .policy import ConfigError, PolicySet, load_policy
from .vnet import Network, NetworkConfig, build_network, default_network, icmp_probe, load_network

__version__ = "0.1.0"

__all__ = [
    "ALL_IDS", "SCENARIOS", "ScenarioResult", "Verdict", "run_scenario", "run_scenarios",
    "ConfigError", "PolicySet", "load_policy",
    "Network", "NetworkConfig", "build_network", "default_network", "icmp_probe", "load_network",
]

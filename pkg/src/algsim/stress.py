"""Offered-load sweeps against the gateway queue in virtual time."""

from __future__ import annotations

from dataclasses import dataclass
from ipaddress import IPv4Address

from .packet import Proto, request, serialize_http
from .policy import PolicySet
from .vnet import NS_PER_MS, Network, NetworkConfig, _cost_ns

MINUTE_NS = 60_000 * NS_PER_MS
STRESS_PORT = 8080


@dataclass(frozen=True)
class StressPoint:
    rate_rpm: int
    mean_latency_ms: float
    max_latency_ms: float
    completed: int


@dataclass(frozen=True)
class StressReport:
    series: tuple[StressPoint, ...]
    knee_rpm: int | None
    base_cost_ms: float

    def to_dict(self) -> dict:
        return {
            "base_cost_ms": self.base_cost_ms,
            "knee_rpm": self.knee_rpm,
            "series": [{"rate_rpm": p.rate_rpm, "mean_latency_ms": p.mean_latency_ms,
                        "max_latency_ms": p.max_latency_ms, "completed": p.completed} for p in self.series],
        }


def minimal_get(host: str = "alg") -> bytes:
    return serialize_http(request("GET", "/", [("Host", host)]))


def _sender(config: NetworkConfig, policy: PolicySet, sender: str | None) -> str:
    if sender is not None:
        return sender
    names = [h.name for h in config.hosts]
    if "jmeter" in names:
        return "jmeter"
    for h in config.hosts:
        if h.ip in policy.ip_whitelist:
            return h.name
    raise ValueError("no whitelisted host to generate load from")


def request_latencies(config: NetworkConfig, policy: PolicySet, rate_rpm: int, count: int | None = None,
                      sender: str | None = None) -> list[int]:
    """Gateway latency in ns of each uniformly spaced request at ``rate_rpm``.

    Request ``i`` is injected at ``floor(i * 60 s / rate)``; ``count``
    defaults to one virtual minute of traffic.
    """
    if rate_rpm <= 0:
        raise ValueError("rate must be positive")
    count = rate_rpm if count is None else count
    net = Network(config, policy, record_trace=False)
    name = _sender(config, policy, sender)
    host = net.host(name)
    dst = IPv4Address(config.alg.ips[host.spec.vlan])
    payload = minimal_get(str(dst))
    template = net.build_frame(name, dst, Proto.TCP, payload, dst_port=STRESS_PORT, src_port=49_152)
    fids = [net.inject_frame(name, template, i * MINUTE_NS // rate_rpm) for i in range(count)]
    net.run_until_idle()
    return [net.latency_ns(f) for f in fids]


def stress(config: NetworkConfig, policy: PolicySet, rate_schedule, sender: str | None = None) -> StressReport:
    rates = list(rate_schedule)
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise ValueError("rates must be strictly increasing")
    base_ns = _cost_ns(config.alg.base_service_cost_ms, "/alg/base_service_cost_ms")
    series = []
    knee = None
    for rate in rates:
        lat = request_latencies(config, policy, rate, sender=sender)
        mean_ns = sum(lat) / len(lat)
        series.append(StressPoint(rate, round(mean_ns / NS_PER_MS, 6), max(lat) / NS_PER_MS, len(lat)))
        if knee is None and mean_ns > 2 * base_ns:
            knee = rate
    return StressReport(tuple(series), knee, base_ns / NS_PER_MS)

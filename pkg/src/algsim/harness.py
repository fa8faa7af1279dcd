"""Attack scenarios S1-S13, their oracles and verdicts.

Each scenario builds its own network, drives attack traffic into it and
returns an evidence dict. The verdict is a pure predicate over that
evidence, so a result can be re-judged from a saved report.

Scenarios look hosts up by role: the clients bound to content routes, the
host offering the ``ftp`` service, and the hosts named ``ftp-client``,
``spoof`` and ``jmeter``.
"""

from __future__ import annotations

import enum
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from ipaddress import IPv4Address
from typing import Callable

from .cwe import lookup
from .fuzz import FuzzRequest, HttpTemplate, gen_fuzz_http, mutate, rng_for
from .packet import (BROADCAST_MAC, ArpMessage, ArpOp, FileKind, Frame, FrameKind, FtpCommand, IpHeader, ParseError,
                     Proto, ftp_payload, make_doc, parse_http_request, parse_http_response, request,
                     serialize_http, split_ftp_payload)
from .policy import ContentRoute, HeaderMode, PolicySet, SpoofAuth
from .stress import minimal_get, stress
from .vnet import ECHO_REQUEST, NS_PER_MS, Host, Network, NetworkConfig, echo_payload, icmp_probe

EICAR = rb"X5O!P%@AP[4\PZX54(P^)7CC)7}$EICAR-STANDARD-ANTIVIRUS-TEST-FILE!$H+H*"
MEDIA_TYPE = {FileKind.DOC: "application/msword", FileKind.MPEG: "video/mpeg"}
FUZZ_COUNT = 200
MUTANT_COUNT = 24
SPACING_NS = NS_PER_MS


class Verdict(enum.Enum):
    ENFORCED = "Enforced"
    NOT_ENFORCED = "NotEnforced"


class UnknownScenario(KeyError):
    pass


class ScenarioError(RuntimeError):
    """The network lacks a host the scenario needs."""


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    cwe: str
    policy_ref: tuple[str, ...]
    description: str
    seed: int
    expected: Verdict  # verdict under the reference configuration
    run: Callable[[_Context], dict] = field(repr=False, compare=False)
    oracle: Callable[[dict], bool] = field(repr=False, compare=False)


@dataclass(frozen=True)
class ScenarioResult:
    id: str
    cwe: str
    verdict: Verdict
    evidence: dict
    duration_ms: float
    trace: str = field(default="", repr=False, compare=False)

    def to_dict(self) -> dict:
        return {"id": self.id, "cwe": self.cwe, "verdict": self.verdict.value, "evidence": self.evidence,
                "duration_ms": self.duration_ms}


class _Context:
    def __init__(self, config: NetworkConfig, policy: PolicySet, seed_words: list[int]):
        self.config = config
        self.policy = policy
        self.rng = rng_for(seed_words)
        self.networks: list[Network] = []

    def network(self, record_trace: bool = True) -> Network:
        net = Network(self.config, self.policy, record_trace)
        self.networks.append(net)
        return net

    def seed(self) -> int:
        return int(self.rng.integers(2**63))

    def host_named(self, net: Network, name: str) -> Host:
        if name not in net.hosts:
            raise ScenarioError(f"scenario needs a host named {name!r}")
        return net.hosts[name]

    def host_at(self, net: Network, addr: IPv4Address) -> Host:
        host = net.host_by_ip(addr)
        if host is None:
            raise ScenarioError(f"no host with address {addr}")
        return host

    def route(self, kind: FileKind) -> ContentRoute:
        for r in self.policy.content_routes:
            if r.required_kind is kind:
                return r
        raise ScenarioError(f"policy has no content route for {kind.value}")

    def service_host(self, net: Network, service: str) -> Host:
        for h in net.hosts.values():
            if service in h.spec.services:
                return h
        raise ScenarioError(f"no host offers {service}")


# ---------------------------------------------------------------------------
# shared oracles and helpers


def icmp_permitted(policy: PolicySet, src: Host, dst: Host, arp: dict) -> bool:
    """One direction of an echo exchange, read straight off the configuration."""
    if src.spec.vlan == dst.spec.vlan:
        return True
    if src.spec.ip not in policy.ip_whitelist or src.spec.mac not in policy.mac_whitelist:
        return False
    if policy.spoof_auth is SpoofAuth.TOKEN and src.spec.ip not in policy.auth_secrets:
        return False
    if "icmp" not in policy.allowed_protocols or dst.spec.ip not in arp:
        return False
    for rule in policy.port_rules:
        if rule.proto is Proto.ICMP and rule.src_ip in (None, src.spec.ip) and rule.dst_ip in (None, dst.spec.ip):
            return rule.action == "allow"
    return not policy.isolation_default_deny


def _terminal(net: Network, fid: int) -> dict:
    recs = net.outcomes().get(fid, [])
    if len(recs) != 1:
        return {"action": "missing" if not recs else "duplicated", "node": "", "reason": ""}
    r = recs[0]
    return {"action": r["action"], "node": r["node"], "reason": r.get("reason", "")}


def _http_responses(host: Host) -> list[int]:
    statuses = []
    for d in host.inbox:
        f = d.frame
        if f.kind is FrameKind.IPV4 and f.ip.proto is Proto.TCP and f.payload.startswith(b"HTTP/"):
            try:
                statuses.append(parse_http_response(f.payload).start_line.status)
            except ParseError:
                statuses.append(0)
    return statuses


def _http_received(host: Host) -> list[str]:
    targets = []
    for d in host.inbox:
        f = d.frame
        if f.kind is FrameKind.IPV4 and f.ip.proto is Proto.TCP and f.ip.dst == host.spec.ip:
            try:
                targets.append(parse_http_request(f.payload).start_line.target)
            except ParseError:
                pass
    return targets


def _ftp_received(host: Host, port: int) -> list[tuple[str, bytes]]:
    got = []
    for d in host.inbox:
        f = d.frame
        if f.kind is FrameKind.IPV4 and f.ip.proto is Proto.TCP and f.l4.dst == port and f.ip.dst == host.spec.ip:
            try:
                cmd, data = split_ftp_payload(f.payload)
            except ParseError:
                continue
            got.append((cmd.verb, data))
    return got


def _text_replies(host: Host) -> list[str]:
    return [d.frame.payload.split(b"\r\n", 1)[0].decode("latin-1") for d in host.inbox
            if d.frame.kind is FrameKind.IPV4 and d.frame.ip.proto is Proto.TCP]


def _duration(ctx: _Context) -> float:
    return max((n.clock_ns for n in ctx.networks), default=0) / NS_PER_MS


# ---------------------------------------------------------------------------
# S1 isolation


def _s1(ctx: _Context) -> dict:
    net = ctx.network()
    hosts = sorted(net.hosts.values(), key=lambda h: h.spec.name)
    arp = dict(ctx.policy.static_arp)
    mismatches, reachable = [], []
    pairs = 0
    for a in hosts:
        for b in hosts:
            if a is b:
                continue
            pairs += 1
            expected = icmp_permitted(ctx.policy, a, b, arp) and icmp_permitted(ctx.policy, b, a, arp)
            got = icmp_probe(net, a.spec.name, b.spec.ip)
            if got.reply:
                reachable.append(f"{a.spec.name}->{b.spec.name}")
            if got.reply != expected:
                mismatches.append({"pair": f"{a.spec.name}->{b.spec.name}", "expected": expected,
                                   "observed": got.reply, "drop_point": got.drop_point, "reason": got.reason})
    # bypass attempts: address the peer's MAC directly across VLANs
    direct = []
    for a in hosts:
        for b in hosts:
            if a.spec.vlan != b.spec.vlan:
                frame = net.build_frame(a.spec.name, b.spec.ip, Proto.ICMP, echo_payload(ECHO_REQUEST, 0xBEEF))
                forged = Frame(frame.src_mac, b.spec.mac, ip=frame.ip, payload=frame.payload,
                               auth_token=frame.auth_token)
                direct.append(net.inject_frame(a.spec.name, forged))
    net.run_until_idle()
    leaked = [fid for fid in direct if _terminal(net, fid)["action"] != "drop"]
    return {
        "pairs_probed": pairs,
        "reachable": reachable,
        "mismatches": mismatches,
        "direct_l2_attempts": len(direct),
        "direct_l2_delivered": len(leaked),
        "bypass_paths": len(net.bypass_paths()),
    }


def _s1_oracle(ev: dict) -> bool:
    return not ev["mismatches"] and ev["direct_l2_delivered"] == 0 and ev["bypass_paths"] == 0


# ---------------------------------------------------------------------------
# S2/S3 spoofing


def _spoof_roles(ctx: _Context, net: Network) -> tuple[Host, Host, Host]:
    attacker = ctx.host_named(net, "spoof")
    arp = dict(ctx.policy.static_arp)
    for victim in sorted(net.hosts.values(), key=lambda h: h.spec.name):
        if victim is attacker or victim.spec.vlan != attacker.spec.vlan:
            continue
        for peer in sorted(net.hosts.values(), key=lambda h: h.spec.name):
            if peer.spec.vlan != victim.spec.vlan and icmp_permitted(ctx.policy, victim, peer, arp):
                return attacker, victim, peer
    raise ScenarioError("no whitelisted victim next to the spoofing host")


def _spoof_run(ctx: _Context, control_identity: str) -> dict:
    net = ctx.network()
    attacker, victim, peer = _spoof_roles(ctx, net)
    template = net.build_frame(attacker.spec.name, peer.spec.ip, Proto.ICMP, echo_payload(ECHO_REQUEST, 0x5001))

    def forged(src_ip: IPv4Address, src_mac, ident: int) -> Frame:
        # attacker knows addresses, not credentials
        return Frame(src_mac, template.dst_mac, ip=IpHeader(src_ip, peer.spec.ip, Proto.ICMP),
                     payload=echo_payload(ECHO_REQUEST, ident))

    if control_identity == "own":
        control = forged(attacker.spec.ip, attacker.spec.mac, 0x5001)
    else:
        control = forged(victim.spec.ip, attacker.spec.mac, 0x5001)
    spoofed = forged(victim.spec.ip, victim.spec.mac, 0x5002)
    control_id = net.inject_frame(attacker.spec.name, control)
    spoofed_id = net.inject_frame(attacker.spec.name, spoofed, SPACING_NS)
    net.run_until_idle()
    reached = [d.frame_id for d in peer.inbox if d.frame_id == spoofed_id]
    return {
        "attacker": attacker.spec.name,
        "impersonated": victim.spec.name,
        "target": peer.spec.name,
        "control": _terminal(net, control_id),
        "spoofed": _terminal(net, spoofed_id),
        "spoofed_reached_target": bool(reached),
    }


def _spoof_oracle(ev: dict) -> bool:
    return ev["spoofed"]["action"] == "drop" and not ev["spoofed_reached_target"]


# ---------------------------------------------------------------------------
# S4 ARP poisoning


def _s4(ctx: _Context) -> dict:
    net = ctx.network()
    attacker = ctx.host_named(net, "spoof")
    victim = ctx.service_host(net, "ftp")
    alg_ip = net.config.alg.ips[attacker.spec.vlan]
    before = dict(net.arp_table)
    request_msg = ArpMessage(ArpOp.REQUEST, victim.spec.ip, attacker.spec.mac, alg_ip)
    reply_msg = ArpMessage(ArpOp.REPLY, victim.spec.ip, attacker.spec.mac, alg_ip, net.alg_mac)
    net.inject_frame(attacker.spec.name, Frame(attacker.spec.mac, BROADCAST_MAC, FrameKind.ARP, arp=request_msg))
    net.inject_frame(attacker.spec.name, Frame(attacker.spec.mac, net.alg_mac, FrameKind.ARP, arp=reply_msg))
    net.run_until_idle()
    # traffic for the victim from every client allowed to reach it
    arp = dict(ctx.policy.static_arp)
    senders = [h for h in sorted(net.hosts.values(), key=lambda h: h.spec.name)
               if h.spec.vlan != victim.spec.vlan and icmp_permitted(ctx.policy, h, victim, arp)]
    for i, h in enumerate(senders):
        net.send(h.spec.name, victim.spec.ip, Proto.ICMP, echo_payload(ECHO_REQUEST, 0x4000 + i))
    net.run_until_idle()
    intercepted = [d.frame_id for d in attacker.inbox
                   if d.frame.kind is FrameKind.IPV4 and d.frame.ip.dst == victim.spec.ip]
    return {
        "victim": victim.spec.name,
        "arp_mode": ctx.policy.arp_mode.value,
        "arp_events": [e["event"] for e in net.arp_events],
        "table_changed": net.arp_table != before,
        "victim_traffic_sent": len(senders),
        "victim_traffic_intercepted": len(intercepted),
    }


def _s4_oracle(ev: dict) -> bool:
    return not ev["table_changed"] and ev["victim_traffic_intercepted"] == 0


# ---------------------------------------------------------------------------
# S5/S6 FTP


def _ftp_setup(ctx: _Context) -> tuple[Network, Host, Host]:
    net = ctx.network()
    return net, ctx.host_named(net, "ftp-client"), ctx.service_host(net, "ftp")


def _s5(ctx: _Context) -> dict:
    net, client, server = _ftp_setup(ctx)
    port = ctx.policy.ftp_port
    net.send(client.spec.name, server.spec.ip, Proto.TCP, ftp_payload(FtpCommand("MKD", "secret")), dst_port=port)
    net.send(client.spec.name, server.spec.ip, Proto.TCP, ftp_payload(FtpCommand("LIST")), dst_port=port,
             at_ns=SPACING_NS)
    net.run_until_idle()
    verbs = [v for v, _ in _ftp_received(server, port)]
    return {"server_received": verbs, "client_replies": _text_replies(client)}


def _s5_oracle(ev: dict) -> bool:
    return "MKD" not in ev["server_received"]


def _s6(ctx: _Context) -> dict:
    net, client, server = _ftp_setup(ctx)
    port = ctx.policy.ftp_port
    net.send(client.spec.name, server.spec.ip, Proto.TCP, ftp_payload(FtpCommand("CP", "payload.bin"), EICAR),
             dst_port=port)
    net.run_until_idle()
    scans = [e for e in net.alg_log if e["event"] == "ftp"]
    return {
        "scan": scans[0]["verdict"] if scans else None,
        "server_received_test_file": any(EICAR in data for _, data in _ftp_received(server, port)),
        "client_replies": _text_replies(client),
    }


def _s6_oracle(ev: dict) -> bool:
    return not ev["server_received_test_file"]


# ---------------------------------------------------------------------------
# S7-S9 fuzzed uploads


def expected_delivery(policy: PolicySet, client_ip: IPv4Address, req: FuzzRequest) -> bool:
    """Whether a generated upload should reach its route's server, from the config alone."""
    route = next((r for r in policy.content_routes
                  if r.ingress_port == req.ingress_port and r.allowed_src_ip == client_ip), None)
    if route is None:
        return False
    if any(re.search(p, req.message.start_line.target, re.DOTALL) for p in policy.url_blocklist):
        return False
    if policy.header_mode is HeaderMode.STRICT and req.duplicates:
        return False
    if req.kind is not route.required_kind:
        return False
    if req.content_types[-1].split(";")[0].strip().lower() != MEDIA_TYPE[route.required_kind]:
        return False
    return req.kind is not FileKind.DOC or req.author in policy.author_whitelist


def _fuzz_run(ctx: _Context, kind: FileKind, template: HttpTemplate) -> dict:
    net = ctx.network()
    route = ctx.route(kind)
    client = ctx.host_at(net, route.allowed_src_ip)
    alg_ip = net.config.alg.ips[client.spec.vlan]
    cases = gen_fuzz_http(template, ctx.seed(), FUZZ_COUNT)
    for i, case in enumerate(cases):
        net.send(client.spec.name, alg_ip, Proto.TCP, serialize_http(case.message), dst_port=case.ingress_port,
                 at_ns=i * SPACING_NS)
    net.run_until_idle()
    expected = {c.message.start_line.target for c in cases if expected_delivery(ctx.policy, client.spec.ip, c)}
    dest = ctx.host_at(net, route.dest_ip)
    delivered = set(_http_received(dest))
    elsewhere = sorted(t for h in net.hosts.values() if h is not dest for t in _http_received(h))
    statuses: dict[str, int] = {}
    for s in _http_responses(client):
        statuses[str(s)] = statuses.get(str(s), 0) + 1
    return {
        "client": client.spec.name,
        "requests": len(cases),
        "expected_delivered": len(expected),
        "delivered": len(delivered),
        "unexpected": sorted(delivered - expected),
        "missing": sorted(expected - delivered),
        "misdelivered": elsewhere,
        "responses": dict(sorted(statuses.items())),
    }


def _fuzz_oracle(ev: dict) -> bool:
    return not ev["unexpected"] and not ev["missing"] and not ev["misdelivered"]


def _routing_template(ctx: _Context) -> HttpTemplate:
    authors = tuple(sorted(ctx.policy.author_whitelist)) or ("alice",)
    return HttpTemplate(content_types=(MEDIA_TYPE[FileKind.MPEG], MEDIA_TYPE[FileKind.DOC], "text/plain"),
                        authors=authors, vary=frozenset({"content_type", "port", "kind", "dup"}))


def _s7(ctx: _Context) -> dict:
    return _fuzz_run(ctx, FileKind.MPEG, _routing_template(ctx))


def _s8(ctx: _Context) -> dict:
    return _fuzz_run(ctx, FileKind.DOC, _routing_template(ctx))


def _s9(ctx: _Context) -> dict:
    route = ctx.route(FileKind.DOC)
    whitelist = tuple(sorted(ctx.policy.author_whitelist))
    template = HttpTemplate(
        content_types=(MEDIA_TYPE[FileKind.DOC],), ports=(route.ingress_port,), kinds=(FileKind.DOC,),
        authors=whitelist + ("mallory", "eve"), vary=frozenset({"author"}),
    )
    return _fuzz_run(ctx, FileKind.DOC, template)


# ---------------------------------------------------------------------------
# S10 smuggling


def smuggling_request(author: str, host: str = "alg") -> bytes:
    """A DOC upload whose two Content-Length headers disagree; the tail is a second request."""
    doc = make_doc(author, b"quarterly report\n")
    smuggled = serialize_http(request("GET", "/smuggled", [("Host", host)]))
    body = doc + smuggled
    headers = [("Host", host), ("Content-Type", MEDIA_TYPE[FileKind.DOC]),
               ("Content-Length", str(len(body))), ("Content-Length", str(len(doc)))]
    return serialize_http(request("POST", "/upload", headers, body))


def _s10(ctx: _Context) -> dict:
    net = ctx.network()
    route = ctx.route(FileKind.DOC)
    client = ctx.host_at(net, route.allowed_src_ip)
    author = min(ctx.policy.author_whitelist, default="alice")
    net.send(client.spec.name, net.config.alg.ips[client.spec.vlan], Proto.TCP, smuggling_request(author),
             dst_port=route.ingress_port)
    net.run_until_idle()
    notes = [n for e in net.alg_log if e["event"] == "http" for n in e["notes"]]
    return {"header_mode": ctx.policy.header_mode.value, "responses": _http_responses(client), "notes": notes}


def _s10_oracle(ev: dict) -> bool:
    return len(ev["responses"]) == 1


# ---------------------------------------------------------------------------
# S11 ReDoS through the FTP scanner


def sniffed_ftp_upload() -> bytes:
    return ftp_payload(FtpCommand("STOR", "data.csv"), b"a" * 12)


def _s11(ctx: _Context) -> dict:
    net, client, server = _ftp_setup(ctx)
    mutants = mutate(sniffed_ftp_upload(), ctx.seed(), MUTANT_COUNT)
    fids = [net.send(client.spec.name, server.spec.ip, Proto.TCP, m, dst_port=ctx.policy.ftp_port,
                     at_ns=i * SPACING_NS) for i, m in enumerate(mutants)]
    net.run_until_idle()
    scans = [e for e in net.alg_log if e["event"] == "ftp" and e["bound"] is not None]
    over = [e for e in scans if e["steps"] > e["bound"]]
    return {
        "engine": ctx.policy.ftp_scan.engine.value if ctx.policy.ftp_scan.enabled else None,
        "mutants": len(mutants),
        "scans": len(scans),
        "scans_over_linear_bound": len(over),
        "max_steps": max((e["steps"] for e in scans), default=0),
        "max_gateway_latency_ms": max(net.latency_of(f) for f in fids),
    }


def _s11_oracle(ev: dict) -> bool:
    return ev["scans_over_linear_bound"] == 0


# ---------------------------------------------------------------------------
# S12/S13 performance


def _s12(ctx: _Context) -> dict:
    cap = ctx.policy.capacity_rpm
    report = stress(ctx.config, ctx.policy, [cap // 2, cap])
    out = report.to_dict()
    out["capacity_rpm"] = cap
    return out


def _s12_oracle(ev: dict) -> bool:
    return ev["knee_rpm"] is None or ev["knee_rpm"] > ev["capacity_rpm"]


def _s13(ctx: _Context) -> dict:
    net = ctx.network()
    host = ctx.host_named(net, "jmeter")
    alg_ip = net.config.alg.ips[host.spec.vlan]
    fid = net.send(host.spec.name, alg_ip, Proto.TCP, minimal_get(str(alg_ip)), dst_port=8080)
    net.run_until_idle()
    return {"latency_ms": net.latency_of(fid), "max_acceptable_ms": ctx.policy.max_acceptable_latency_ms,
            "responses": _http_responses(host)}


def _s13_oracle(ev: dict) -> bool:
    return ev["latency_ms"] <= ev["max_acceptable_ms"]


# ---------------------------------------------------------------------------
# catalog

E, N = Verdict.ENFORCED, Verdict.NOT_ENFORCED

SCENARIOS: dict[str, ScenarioSpec] = {s.id: s for s in [
    ScenarioSpec("S1", "CWE-20", ("isolation_default_deny", "port_rules"),
                 "Pairwise ICMP between all hosts plus direct cross-VLAN L2 attempts", 0x5E01, E, _s1, _s1_oracle),
    ScenarioSpec("S2", "CWE-290", ("ip_whitelist", "spoof_auth"),
                 "Crafted packets with a spoofed source IP of an existing host", 0x5E02, N,
                 lambda ctx: _spoof_run(ctx, "own"), _spoof_oracle),
    ScenarioSpec("S3", "CWE-290", ("mac_whitelist", "spoof_auth"),
                 "Crafted packets with a spoofed source MAC of an existing host", 0x5E03, N,
                 lambda ctx: _spoof_run(ctx, "victim-ip"), _spoof_oracle),
    ScenarioSpec("S4", "CWE-290", ("static_arp", "arp_mode"),
                 "ARP request and reply binding the victim IP to the attacker MAC", 0x5E04, E, _s4, _s4_oracle),
    ScenarioSpec("S5", "CWE-281", ("ftp_blocked_verbs",),
                 "MKD from the FTP client to the FTP server", 0x5E05, E, _s5, _s5_oracle),
    ScenarioSpec("S6", "CWE-434", ("ftp_scan",),
                 "Test-virus file sent with CP from the FTP client", 0x5E06, N, _s6, _s6_oracle),
    ScenarioSpec("S7", "CWE-281", ("content_routes",),
                 "Generated uploads from the MPEG client with varied types, ports and headers", 0x5E07, E,
                 _s7, _fuzz_oracle),
    ScenarioSpec("S8", "CWE-281", ("content_routes",),
                 "Generated uploads from the DOC client with varied types, ports and headers", 0x5E08, E,
                 _s8, _fuzz_oracle),
    ScenarioSpec("S9", "CWE-281", ("author_whitelist",),
                 "Generated DOC uploads with random authors", 0x5E09, E, _s9, _fuzz_oracle),
    ScenarioSpec("S10", "CWE-444", ("header_mode",),
                 "Upload with duplicated Content-Length hiding a second request", 0x5E0A, N, _s10, _s10_oracle),
    ScenarioSpec("S11", "CWE-1333", ("ftp_scan",),
                 "Mutated sniffed FTP upload against the data scanner", 0x5E0B, N, _s11, _s11_oracle),
    ScenarioSpec("S12", "CWE-400", ("capacity_rpm", "bandwidth"),
                 "Offered load up to the configured capacity", 0x5E0C, E, _s12, _s12_oracle),
    ScenarioSpec("S13", "CWE-400", ("max_acceptable_latency_ms",),
                 "Latency of a lone request through the gateway", 0x5E0D, E, _s13, _s13_oracle),
]}

ALL_IDS = tuple(SCENARIOS)


def get_spec(scenario_id: str) -> ScenarioSpec:
    try:
        return SCENARIOS[scenario_id]
    except KeyError:
        raise UnknownScenario(scenario_id) from None


def verdict(spec: ScenarioSpec, evidence: dict) -> Verdict:
    return Verdict.ENFORCED if spec.oracle(evidence) else Verdict.NOT_ENFORCED


def run_scenario(spec: ScenarioSpec | str, config: NetworkConfig, policy: PolicySet,
                 seed: int | None = None, capture_trace: bool = False) -> ScenarioResult:
    """Run one scenario on fresh networks; ``seed`` perturbs the scenario's own seed."""
    spec = get_spec(spec) if isinstance(spec, str) else spec
    lookup(spec.cwe)
    ctx = _Context(config, policy, [spec.seed] if seed is None else [spec.seed, seed])
    evidence = spec.run(ctx)
    trace = ""
    if capture_trace:
        trace = "".join(json.dumps(dict(rec, scenario=spec.id, network=i), sort_keys=True, separators=(",", ":"))
                        + "\n" for i, net in enumerate(ctx.networks) for rec in net.trace)
    return ScenarioResult(spec.id, spec.cwe, verdict(spec, evidence), evidence, _duration(ctx), trace)


def _order(scenario_id: str) -> int:
    return int(scenario_id[1:])


def run_scenarios(ids, config: NetworkConfig, policy: PolicySet, seed: int | None = None,
                  max_workers: int = 1, capture_trace: bool = False) -> list[ScenarioResult]:
    specs = [get_spec(i) for i in ids]

    def one(spec: ScenarioSpec) -> ScenarioResult:
        return run_scenario(spec, config, policy, seed, capture_trace)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            results = list(pool.map(one, specs))
    else:
        results = [one(s) for s in specs]
    return sorted(results, key=lambda r: _order(r.id))

"""Gateway policy: JSON loading/validation and the network-layer decision pipeline.

Frames arriving at the gateway are checked in a fixed order so that deny
reasons are reproducible:

1. source IP whitelist
2. source MAC whitelist
3. per-host token (token mode only)
4. allowed protocols
5. port rules (first match wins; no match falls back to the isolation default)
6. bandwidth token bucket
7. HTTP/FTP traffic is handed to the application inspectors
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from ipaddress import IPv4Address
from typing import Any, Mapping

from .packet import ArpMessage, ArpOp, FileKind, Frame, MacAddr, Proto
from .patterns import Engine, Matcher, PatternSyntaxError, compile as compile_pattern

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is a JSON pointer to the offending value."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path


class HeaderMode(enum.Enum):
    STRICT = "strict"
    LAST_WINS = "last_wins"


class SpoofAuth(enum.Enum):
    ADDRESS_ONLY = "address_only"
    TOKEN = "token"


class ArpMode(enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class PortRule:
    proto: Proto
    action: str
    dst_port: int | None = None
    src_ip: IPv4Address | None = None
    dst_ip: IPv4Address | None = None

    def matches(self, frame: Frame) -> bool:
        if frame.ip.proto is not self.proto:
            return False
        if self.dst_port is not None and (frame.l4 is None or frame.l4.dst != self.dst_port):
            return False
        if self.src_ip is not None and frame.ip.src != self.src_ip:
            return False
        return self.dst_ip is None or frame.ip.dst == self.dst_ip


@dataclass(frozen=True)
class ContentRoute:
    ingress_port: int
    allowed_src_ip: IPv4Address
    required_kind: FileKind
    dest_ip: IPv4Address
    dest_port: int


@dataclass(frozen=True)
class FtpScan:
    enabled: bool
    pattern: str = ""
    engine: Engine = Engine.BUDGETED
    max_steps: int = 100_000

    def matcher(self) -> Matcher:
        return Matcher(self.pattern, self.engine, self.max_steps)


@dataclass(frozen=True)
class Bandwidth:
    rate: Fraction  # frames per virtual second
    burst: int


@dataclass(frozen=True)
class PolicySet:
    isolation_default_deny: bool
    ip_whitelist: frozenset[IPv4Address]
    mac_whitelist: frozenset[MacAddr]
    static_arp: Mapping[IPv4Address, MacAddr]
    port_rules: tuple[PortRule, ...]
    allowed_protocols: frozenset[str]
    content_routes: tuple[ContentRoute, ...]
    url_blocklist: tuple[str, ...]
    author_whitelist: frozenset[str]
    ftp_blocked_verbs: frozenset[str]
    ftp_scan: FtpScan
    header_mode: HeaderMode
    spoof_auth: SpoofAuth
    auth_secrets: Mapping[IPv4Address, str] = field(default_factory=dict)
    bandwidth: Bandwidth | None = None
    arp_mode: ArpMode = ArpMode.STATIC
    ftp_port: int = 21
    http_ports: frozenset[int] = frozenset()
    capacity_rpm: int = 100_000
    max_acceptable_latency_ms: float = 50.0
    url_budget: int = 10_000

    @property
    def all_http_ports(self) -> frozenset[int]:
        return self.http_ports | {r.ingress_port for r in self.content_routes}

    def url_matchers(self) -> list[Matcher]:
        return [Matcher(p, Engine.BUDGETED, self.url_budget) for p in self.url_blocklist]


# ---------------------------------------------------------------------------
# loading

_PROTOCOL_NAMES = {"icmp", "tcp", "udp", "http", "ftp"}
_REQUIRED = [
    "schema_version", "isolation_default_deny", "ip_whitelist", "mac_whitelist", "static_arp",
    "port_rules", "allowed_protocols", "content_routes", "url_blocklist", "author_whitelist",
    "ftp_blocked_verbs", "ftp_scan", "header_mode", "spoof_auth",
]
_OPTIONAL = ["bandwidth", "arp_mode", "ftp_port", "http_ports", "capacity_rpm",
             "max_acceptable_latency_ms", "url_budget", "description"]


def _keys(obj: Any, path: str, required: list[str], optional: list[str] = ()) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    for key in obj:
        if key not in required and key not in optional:
            raise ConfigError(f"{path}/{key}", "unknown key")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{path}/{key}", "missing required field")
    return obj


def _typed(value: Any, path: str, kind: type | tuple, what: str) -> Any:
    if isinstance(value, bool) != (kind is bool) or not isinstance(value, kind):
        raise ConfigError(path, f"expected {what}")
    return value


def _ip(value: Any, path: str) -> IPv4Address:
    try:
        return IPv4Address(_typed(value, path, str, "a dotted-quad string"))
    except ValueError:
        raise ConfigError(path, f"bad IPv4 address {value!r}") from None


def _mac(value: Any, path: str) -> MacAddr:
    try:
        return MacAddr.parse(_typed(value, path, str, "a MAC string"))
    except ValueError:
        raise ConfigError(path, f"bad MAC address {value!r}") from None


def _port(value: Any, path: str) -> int:
    _typed(value, path, int, "an integer port")
    if not 0 <= value <= 65535:
        raise ConfigError(path, "port out of range")
    return value


def _list(value: Any, path: str) -> list:
    return _typed(value, path, list, "an array")


def _enum(cls, value: Any, path: str):
    try:
        return cls(value)
    except ValueError:
        allowed = ", ".join(repr(m.value) for m in cls)
        raise ConfigError(path, f"expected one of {allowed}") from None


def _pattern(value: Any, path: str) -> str:
    _typed(value, path, str, "a pattern string")
    try:
        compile_pattern(value)
    except PatternSyntaxError as exc:
        raise ConfigError(path, str(exc)) from None
    return value


def _rate(value: Any, path: str) -> Fraction:
    try:
        if isinstance(value, bool):
            raise ValueError
        rate = Fraction(value) if isinstance(value, (int, str)) else Fraction(str(value))
    except (ValueError, ZeroDivisionError, TypeError):
        raise ConfigError(path, "expected a positive rate (number or 'a/b')") from None
    if rate <= 0:
        raise ConfigError(path, "rate must be positive")
    return rate


def policy_from_dict(doc: Any) -> PolicySet:
    d = _keys(doc, "", _REQUIRED, _OPTIONAL)
    if d["schema_version"] != SCHEMA_VERSION:
        raise ConfigError("/schema_version", f"unsupported schema version {d['schema_version']!r}")

    ip_whitelist = frozenset(_ip(v, f"/ip_whitelist/{i}") for i, v in enumerate(_list(d["ip_whitelist"], "/ip_whitelist")))
    mac_whitelist = frozenset(
        _mac(v, f"/mac_whitelist/{i}") for i, v in enumerate(_list(d["mac_whitelist"], "/mac_whitelist"))
    )
    arp_doc = _typed(d["static_arp"], "/static_arp", dict, "an object")
    static_arp = {_ip(k, f"/static_arp/{k}"): _mac(v, f"/static_arp/{k}") for k, v in arp_doc.items()}

    port_rules = []
    for i, r in enumerate(_list(d["port_rules"], "/port_rules")):
        p = f"/port_rules/{i}"
        _keys(r, p, ["proto", "action"], ["dst_port", "src_ip", "dst_ip"])
        proto = _enum(Proto, r["proto"], f"{p}/proto")
        if r["action"] not in ("allow", "deny"):
            raise ConfigError(f"{p}/action", "expected 'allow' or 'deny'")
        if proto is Proto.ICMP and "dst_port" in r:
            raise ConfigError(f"{p}/dst_port", "ICMP rules take no port")
        port_rules.append(PortRule(
            proto, r["action"],
            _port(r["dst_port"], f"{p}/dst_port") if "dst_port" in r else None,
            _ip(r["src_ip"], f"{p}/src_ip") if "src_ip" in r else None,
            _ip(r["dst_ip"], f"{p}/dst_ip") if "dst_ip" in r else None,
        ))

    protocols = set()
    for i, v in enumerate(_list(d["allowed_protocols"], "/allowed_protocols")):
        if v not in _PROTOCOL_NAMES:
            raise ConfigError(f"/allowed_protocols/{i}", f"unknown protocol {v!r}")
        protocols.add(v)

    routes = []
    seen_ports: set[int] = set()
    for i, r in enumerate(_list(d["content_routes"], "/content_routes")):
        p = f"/content_routes/{i}"
        _keys(r, p, ["ingress_port", "allowed_src_ip", "required_kind", "dest_ip", "dest_port"])
        port = _port(r["ingress_port"], f"{p}/ingress_port")
        if port in seen_ports:
            raise ConfigError(f"{p}/ingress_port", f"port {port} already used by another route")
        seen_ports.add(port)
        kind = _enum(FileKind, r["required_kind"], f"{p}/required_kind")
        if kind is FileKind.UNKNOWN:
            raise ConfigError(f"{p}/required_kind", "a route must require a known file kind")
        routes.append(ContentRoute(port, _ip(r["allowed_src_ip"], f"{p}/allowed_src_ip"), kind,
                                   _ip(r["dest_ip"], f"{p}/dest_ip"), _port(r["dest_port"], f"{p}/dest_port")))

    blocklist = tuple(_pattern(v, f"/url_blocklist/{i}") for i, v in enumerate(_list(d["url_blocklist"], "/url_blocklist")))
    authors = frozenset(
        _typed(v, f"/author_whitelist/{i}", str, "a string")
        for i, v in enumerate(_list(d["author_whitelist"], "/author_whitelist"))
    )
    verbs = set()
    for i, v in enumerate(_list(d["ftp_blocked_verbs"], "/ftp_blocked_verbs")):
        if not (isinstance(v, str) and v.isascii() and v.isalpha()):
            raise ConfigError(f"/ftp_blocked_verbs/{i}", "expected an alphabetic FTP verb")
        verbs.add(v.upper())

    scan_doc = d["ftp_scan"]
    _keys(scan_doc, "/ftp_scan", ["mode"], ["pattern", "engine", "max_steps"])
    mode = scan_doc["mode"]
    if mode == "off":
        ftp_scan = FtpScan(False)
    elif mode == "on":
        if "pattern" not in scan_doc:
            raise ConfigError("/ftp_scan/pattern", "missing required field")
        max_steps = scan_doc.get("max_steps", 100_000)
        _typed(max_steps, "/ftp_scan/max_steps", int, "a positive integer")
        if max_steps <= 0:
            raise ConfigError("/ftp_scan/max_steps", "expected a positive integer")
        ftp_scan = FtpScan(True, _pattern(scan_doc["pattern"], "/ftp_scan/pattern"),
                           _enum(Engine, scan_doc.get("engine", "budgeted"), "/ftp_scan/engine"), max_steps)
    else:
        raise ConfigError("/ftp_scan/mode", "expected 'on' or 'off'")

    auth_doc = d["spoof_auth"]
    _keys(auth_doc, "/spoof_auth", ["mode"], ["secrets"])
    spoof_auth = _enum(SpoofAuth, auth_doc["mode"], "/spoof_auth/mode")
    secrets = {}
    if spoof_auth is SpoofAuth.TOKEN:
        sec_doc = _typed(auth_doc.get("secrets"), "/spoof_auth/secrets", dict, "an object of per-host secrets")
        secrets = {_ip(k, f"/spoof_auth/secrets/{k}"): _typed(v, f"/spoof_auth/secrets/{k}", str, "a string")
                   for k, v in sec_doc.items()}
    elif "secrets" in auth_doc:
        raise ConfigError("/spoof_auth/secrets", "secrets are only valid in token mode")

    bandwidth = None
    if d.get("bandwidth") is not None:
        b = _keys(d["bandwidth"], "/bandwidth", ["rate", "burst"])
        burst = _typed(b["burst"], "/bandwidth/burst", int, "a positive integer")
        if burst < 1:
            raise ConfigError("/bandwidth/burst", "expected a positive integer")
        bandwidth = Bandwidth(_rate(b["rate"], "/bandwidth/rate"), burst)

    http_ports = frozenset(_port(v, f"/http_ports/{i}") for i, v in enumerate(_list(d.get("http_ports", []), "/http_ports")))
    capacity = _typed(d.get("capacity_rpm", 100_000), "/capacity_rpm", int, "an integer")
    max_latency = _typed(d.get("max_acceptable_latency_ms", 50.0), "/max_acceptable_latency_ms", (int, float), "a number")
    url_budget = _typed(d.get("url_budget", 10_000), "/url_budget", int, "an integer")

    return PolicySet(
        isolation_default_deny=_typed(d["isolation_default_deny"], "/isolation_default_deny", bool, "a boolean"),
        ip_whitelist=ip_whitelist,
        mac_whitelist=mac_whitelist,
        static_arp=static_arp,
        port_rules=tuple(port_rules),
        allowed_protocols=frozenset(protocols),
        content_routes=tuple(routes),
        url_blocklist=blocklist,
        author_whitelist=authors,
        ftp_blocked_verbs=frozenset(verbs),
        ftp_scan=ftp_scan,
        header_mode=_enum(HeaderMode, d["header_mode"], "/header_mode"),
        spoof_auth=spoof_auth,
        auth_secrets=secrets,
        bandwidth=bandwidth,
        arp_mode=_enum(ArpMode, d.get("arp_mode", "static"), "/arp_mode"),
        ftp_port=_port(d.get("ftp_port", 21), "/ftp_port"),
        http_ports=http_ports,
        capacity_rpm=capacity,
        max_acceptable_latency_ms=float(max_latency),
        url_budget=url_budget,
    )


def load_policy(data: bytes | str) -> PolicySet:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    return policy_from_dict(doc)


# ---------------------------------------------------------------------------
# decisions


class Action(enum.Enum):
    ALLOW = "allow"
    DENY = "deny"
    INSPECT = "inspect"


@dataclass(frozen=True)
class Decision:
    action: Action
    reason: str = ""
    cwe: str | None = None
    protocol: str | None = None

    @classmethod
    def allow(cls) -> Decision:
        return cls(Action.ALLOW)

    @classmethod
    def deny(cls, reason: str, cwe: str | None = None) -> Decision:
        return cls(Action.DENY, reason, cwe)

    @classmethod
    def inspect(cls, protocol: str) -> Decision:
        return cls(Action.INSPECT, protocol=protocol)


class TokenBucket:
    """Token bucket over virtual nanoseconds.

    Tokens are held as integers scaled by ``1e9 * rate.denominator`` so that
    refill per nanosecond is exactly ``rate.numerator`` and no rounding occurs.
    """

    def __init__(self, rate: Fraction, burst: int):
        self.rate = Fraction(rate)
        self.burst = burst
        self._unit = 1_000_000_000 * self.rate.denominator
        self._cap = burst * self._unit
        self._level = self._cap
        self.last_ns = 0

    @property
    def tokens(self) -> Fraction:
        return Fraction(self._level, self._unit)

    @classmethod
    def for_policy(cls, policy: PolicySet) -> TokenBucket | None:
        if policy.bandwidth is None:
            return None
        return cls(policy.bandwidth.rate, policy.bandwidth.burst)

    def admit(self, now_ns: int) -> bool:
        if now_ns > self.last_ns:
            self._level = min(self._cap, self._level + self.rate.numerator * (now_ns - self.last_ns))
            self.last_ns = now_ns
        if self._level >= self._unit:
            self._level -= self._unit
            return True
        return False


def bandwidth_admit(policy: PolicySet, bucket: TokenBucket | None, now_ns: int, frame: Frame) -> Decision:
    if policy.bandwidth is None or bucket is None:
        return Decision.allow()
    if bucket.admit(now_ns):
        return Decision.allow()
    return Decision.deny("rate-exceeded", "CWE-400")


def classify(policy: PolicySet, frame: Frame) -> str:
    proto = frame.ip.proto
    if proto is Proto.ICMP:
        return "icmp"
    if proto is Proto.TCP:
        if frame.l4.dst in policy.all_http_ports:
            return "http"
        if frame.l4.dst == policy.ftp_port:
            return "ftp"
        return "tcp"
    return "udp"


def decide_l3(policy: PolicySet, frame: Frame, now_ns: int = 0, bucket: TokenBucket | None = None) -> Decision:
    """Run the fixed-order network-layer pipeline on an IPv4 frame.

    The bucket is the only mutable input; pass ``None`` to skip rate limiting.
    """
    if frame.ip is None:
        raise ValueError("decide_l3 needs an IPv4 frame")
    if frame.ip.src not in policy.ip_whitelist:
        return Decision.deny("ip-not-whitelisted", "CWE-290")
    if frame.src_mac not in policy.mac_whitelist:
        return Decision.deny("mac-not-whitelisted", "CWE-290")
    if policy.spoof_auth is SpoofAuth.TOKEN:
        expected = policy.auth_secrets.get(frame.ip.src)
        if expected is None or frame.auth_token != expected:
            return Decision.deny("auth-token-mismatch", "CWE-290")
    protocol = classify(policy, frame)
    if protocol not in policy.allowed_protocols:
        return Decision.deny("protocol-not-allowed", "CWE-20")
    for rule in policy.port_rules:
        if rule.matches(frame):
            if rule.action == "deny":
                return Decision.deny("port-rule-deny", "CWE-20")
            break
    else:
        if policy.isolation_default_deny:
            return Decision.deny("isolation-default-deny", "CWE-20")
    admitted = bandwidth_admit(policy, bucket, now_ns, frame)
    if admitted.action is Action.DENY:
        return admitted
    if protocol in ("http", "ftp"):
        return Decision.inspect(protocol)
    return Decision.allow()


# ---------------------------------------------------------------------------
# ARP


class ArpEvent(enum.Enum):
    CONSISTENT = "consistent"
    POISON_ATTEMPT_REJECTED = "poison-attempt-rejected"
    IGNORED_UNKNOWN_SENDER = "ignored-unknown-sender"
    LEARNED = "learned"
    OVERWRITTEN = "overwritten"


def handle_arp(policy: PolicySet, arp_table: Mapping[IPv4Address, MacAddr], msg: ArpMessage,
               alg_ips: frozenset[IPv4Address] = frozenset(), alg_mac: MacAddr | None = None,
               ) -> tuple[dict[IPv4Address, MacAddr], ArpEvent, ArpMessage | None]:
    """Apply one ARP message to the gateway's table.

    Returns ``(table, event, reply)``. Static mode never changes the table;
    dynamic mode learns and overwrites bindings, which is what poisoning
    exploits.
    """
    table = dict(arp_table)
    bound = table.get(msg.sender_ip)
    if policy.arp_mode is ArpMode.STATIC:
        if msg.sender_ip in policy.static_arp and policy.static_arp[msg.sender_ip] != msg.sender_mac:
            event = ArpEvent.POISON_ATTEMPT_REJECTED
        elif msg.sender_ip in policy.static_arp:
            event = ArpEvent.CONSISTENT
        else:
            event = ArpEvent.IGNORED_UNKNOWN_SENDER
    elif bound is None:
        table[msg.sender_ip] = msg.sender_mac
        event = ArpEvent.LEARNED
    elif bound != msg.sender_mac:
        table[msg.sender_ip] = msg.sender_mac
        event = ArpEvent.OVERWRITTEN
    else:
        event = ArpEvent.CONSISTENT

    reply = None
    if msg.op is ArpOp.REQUEST and msg.target_ip in alg_ips and alg_mac is not None:
        reply = ArpMessage(ArpOp.REPLY, msg.target_ip, alg_mac, msg.sender_ip, msg.sender_mac)
    return table, event, reply

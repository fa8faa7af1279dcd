"""Discrete-event model of a VLAN-segmented network whose only inter-VLAN path is the gateway.

Virtual time is kept in integer nanoseconds so queueing results are exact;
public latency figures are reported in milliseconds. The gateway is a single
FIFO server: a frame arriving at ``t`` leaves at
``max(t, previous departure) + service`` where service is
``base + per_byte * len(payload) + regex_step * steps``.

Trace records are dicts ``{time, frame_id, node, action[, reason]}`` with
``time`` in virtual ms. Every frame ends in exactly one ``deliver`` or
``drop`` record; frames the gateway terminates (proxied, answered, ARP)
are delivered at node ``alg``.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from ipaddress import IPv4Address, IPv4Network
from typing import Any, Iterable

from .dpi_ftp import process_ftp
from .dpi_http import Redirect, Reject, process_http
from .packet import (BROADCAST_MAC, MAX_PAYLOAD, Frame, FrameKind, IpHeader, MacAddr, ParseError, Ports,
                     Proto, parse_http_request, response, serialize_http, split_ftp_payload)
from .policy import (Action, ConfigError, FtpScan, HeaderMode, PolicySet, SpoofAuth, TokenBucket,
                     decide_l3, handle_arp)

NS_PER_MS = 1_000_000
MAX_EVENTS = 10_000_000
ZERO_MAC = MacAddr(b"\x00" * 6)
EPHEMERAL_FIRST = 40_000
HTTP_SERVICE_PORT = 80
FTP_SERVICE_PORT = 21
ECHO_REQUEST, ECHO_REPLY = 8, 0
HTTP_CACHE_SIZE = 4096


class UnknownHost(KeyError):
    pass


class SimOverrun(RuntimeError):
    pass


class NotCompleted(LookupError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class Vlan:
    id: int
    subnet: IPv4Network
    name: str = ""


@dataclass(frozen=True)
class HostSpec:
    name: str
    ip: IPv4Address
    mac: MacAddr
    vlan: int
    services: tuple[str, ...] = ()


@dataclass(frozen=True)
class AlgSpec:
    ips: dict[int, IPv4Address]
    mac: MacAddr
    base_service_cost_ms: float = 0.0
    per_byte_cost_ms: float = 0.0
    regex_step_cost_ms: float = 0.0


@dataclass(frozen=True)
class NetworkConfig:
    vlans: tuple[Vlan, ...]
    hosts: tuple[HostSpec, ...]
    alg: AlgSpec
    mtu: int = MAX_PAYLOAD

    def validate(self) -> None:
        vlan_ids = {}
        for i, v in enumerate(self.vlans):
            if v.id in vlan_ids:
                raise ConfigError(f"/vlans/{i}/id", f"duplicate VLAN id {v.id}")
            vlan_ids[v.id] = v
        seen_ips: dict[IPv4Address, str] = {}
        seen_names = set()
        for i, h in enumerate(self.hosts):
            if h.name in seen_names or h.name == "alg":
                raise ConfigError(f"/hosts/{i}/name", f"duplicate host name {h.name!r}")
            seen_names.add(h.name)
            if h.ip in seen_ips:
                raise ConfigError(f"/hosts/{i}/ip", f"host IPs must be unique: {h.ip} also used by {seen_ips[h.ip]}")
            seen_ips[h.ip] = h.name
            if h.vlan not in vlan_ids:
                raise ConfigError(f"/hosts/{i}/vlan", f"unknown VLAN {h.vlan}")
            if h.ip not in vlan_ids[h.vlan].subnet:
                raise ConfigError(f"/hosts/{i}/ip", f"{h.ip} is outside VLAN {h.vlan} subnet {vlan_ids[h.vlan].subnet}")
            if h.mac == self.alg.mac:
                raise ConfigError(f"/hosts/{i}/mac", "host MAC collides with the gateway MAC")
        for vid, v in vlan_ids.items():
            alg_ip = self.alg.ips.get(vid)
            if alg_ip is None:
                raise ConfigError(f"/alg/ips/{vid}", f"gateway must be attached to every VLAN (missing {vid})")
            if alg_ip not in v.subnet:
                raise ConfigError(f"/alg/ips/{vid}", f"{alg_ip} is outside VLAN {vid} subnet")
            if alg_ip in seen_ips:
                raise ConfigError(f"/alg/ips/{vid}", f"{alg_ip} collides with host {seen_ips[alg_ip]}")
        for vid in self.alg.ips:
            if vid not in vlan_ids:
                raise ConfigError(f"/alg/ips/{vid}", f"unknown VLAN {vid}")
        for name in ("base_service_cost_ms", "per_byte_cost_ms", "regex_step_cost_ms"):
            _cost_ns(getattr(self.alg, name), f"/alg/{name}")
        if not 0 < self.mtu <= MAX_PAYLOAD:
            raise ConfigError("/mtu", f"mtu must be in 1..{MAX_PAYLOAD}")


def _cost_ns(ms: float, path: str) -> int:
    value = Fraction(str(ms)) * NS_PER_MS
    if value < 0 or value.denominator != 1:
        raise ConfigError(path, "cost must be a non-negative whole number of nanoseconds")
    return int(value)


def _need(obj: Any, path: str, keys: Iterable[str], optional: Iterable[str] = ()) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    allowed = set(keys) | set(optional)
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{path}/{k}", "unknown key")
    for k in keys:
        if k not in obj:
            raise ConfigError(f"{path}/{k}", "missing required field")
    return obj


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "expected an integer")
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "expected a number")
    return value


def network_from_dict(doc: Any) -> NetworkConfig:
    d = _need(doc, "", ["schema_version", "vlans", "hosts", "alg"], ["mtu", "description"])
    if d["schema_version"] != 1:
        raise ConfigError("/schema_version", f"unsupported schema version {d['schema_version']!r}")
    if not isinstance(d["vlans"], list):
        raise ConfigError("/vlans", "expected an array")
    if not isinstance(d["hosts"], list):
        raise ConfigError("/hosts", "expected an array")
    vlans = []
    for i, v in enumerate(d["vlans"]):
        p = f"/vlans/{i}"
        _need(v, p, ["id", "subnet"], ["name"])
        try:
            subnet = IPv4Network(v["subnet"])
        except (ValueError, TypeError):
            raise ConfigError(f"{p}/subnet", f"bad subnet {v['subnet']!r}") from None
        vlans.append(Vlan(_int(v["id"], f"{p}/id"), subnet, str(v.get("name", ""))))
    hosts = []
    for i, h in enumerate(d["hosts"]):
        p = f"/hosts/{i}"
        _need(h, p, ["name", "ip", "mac", "vlan"], ["services"])
        try:
            host_ip = IPv4Address(h["ip"])
        except (ValueError, TypeError):
            raise ConfigError(f"{p}/ip", f"bad IPv4 address {h['ip']!r}") from None
        try:
            host_mac = MacAddr.parse(h["mac"])
        except (ValueError, TypeError, AttributeError):
            raise ConfigError(f"{p}/mac", f"bad MAC address {h['mac']!r}") from None
        services = h.get("services", [])
        for j, s in enumerate(services):
            if s not in ("http", "ftp"):
                raise ConfigError(f"{p}/services/{j}", f"unknown service {s!r}")
        hosts.append(HostSpec(str(h["name"]), host_ip, host_mac, _int(h["vlan"], f"{p}/vlan"), tuple(services)))
    a = _need(d["alg"], "/alg", ["ips", "mac"], ["base_service_cost_ms", "per_byte_cost_ms", "regex_step_cost_ms"])
    if not isinstance(a["ips"], dict):
        raise ConfigError("/alg/ips", "expected an object of VLAN id to address")
    ips = {}
    for k, v in a["ips"].items():
        try:
            ips[int(k)] = IPv4Address(v)
        except (ValueError, TypeError):
            raise ConfigError(f"/alg/ips/{k}", f"bad entry {k!r}: {v!r}") from None
    try:
        alg_mac = MacAddr.parse(a["mac"])
    except (ValueError, TypeError, AttributeError):
        raise ConfigError("/alg/mac", f"bad MAC address {a['mac']!r}") from None
    alg = AlgSpec(
        ips, alg_mac,
        _number(a.get("base_service_cost_ms", 0), "/alg/base_service_cost_ms"),
        _number(a.get("per_byte_cost_ms", 0), "/alg/per_byte_cost_ms"),
        _number(a.get("regex_step_cost_ms", 0), "/alg/regex_step_cost_ms"),
    )
    config = NetworkConfig(tuple(vlans), tuple(hosts), alg, _int(d.get("mtu", MAX_PAYLOAD), "/mtu"))
    config.validate()
    return config


def load_network(data: bytes | str) -> NetworkConfig:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    return network_from_dict(doc)


def default_network(latency_39ms: bool = False) -> NetworkConfig:
    """The shipped reference topology (two service VLANs plus the gateway VLAN)."""
    name = "network_latency39.json" if latency_39ms else "network.json"
    return load_network(resources.files("algsim.data").joinpath(name).read_bytes())


def deny_all_policy() -> PolicySet:
    return PolicySet(
        isolation_default_deny=True, ip_whitelist=frozenset(), mac_whitelist=frozenset(), static_arp={},
        port_rules=(), allowed_protocols=frozenset(), content_routes=(), url_blocklist=(),
        author_whitelist=frozenset(), ftp_blocked_verbs=frozenset(), ftp_scan=FtpScan(False),
        header_mode=HeaderMode.STRICT, spoof_auth=SpoofAuth.ADDRESS_ONLY,
    )


# ---------------------------------------------------------------------------
# runtime


@dataclass(frozen=True)
class Delivery:
    time_ns: int
    frame_id: int
    frame: Frame


@dataclass
class Host:
    spec: HostSpec
    inbox: list[Delivery] = field(default_factory=list)
    next_port: int = 50_000

    def ephemeral_port(self) -> int:
        port = self.next_port
        self.next_port = port + 1 if port < 65535 else 50_000
        return port


@dataclass(frozen=True)
class Reachability:
    reply: bool
    reason: str = ""
    drop_point: str = ""

    @classmethod
    def dropped(cls, reason: str, drop_point: str) -> Reachability:
        return cls(False, reason, drop_point)


@dataclass(frozen=True)
class _Proxy:
    client_ip: IPv4Address
    client_port: int
    reply_ip: IPv4Address
    reply_port: int
    kind: str


def echo_payload(kind: int, ident: int) -> bytes:
    return bytes([kind]) + ident.to_bytes(2, "big")


class Network:
    """A built network: hosts, per-VLAN switches and the gateway, driven by an event heap."""

    def __init__(self, config: NetworkConfig, policy: PolicySet | None = None, record_trace: bool = True):
        config.validate()
        self.config = config
        self.policy = policy if policy is not None else deny_all_policy()
        self.record_trace = record_trace
        self.clock_ns = 0
        self.trace: list[dict] = []
        self.alg_log: list[dict] = []
        self.frames: dict[int, Frame] = {}
        self.origin: dict[int, str] = {}
        self.alg_arrival: dict[int, int] = {}
        self.alg_departure: dict[int, int] = {}
        self.events_processed = 0
        self._heap: list = []
        self._seq = 0
        self._next_fid = 1

        self.vlans = {v.id: v for v in config.vlans}
        self.hosts = {h.name: Host(h) for h in config.hosts}
        self._by_ip = {h.ip: self.hosts[h.name] for h in config.hosts}
        self._by_mac: dict[tuple[int, MacAddr], Host] = {(h.vlan, h.mac): self.hosts[h.name] for h in config.hosts}
        self.alg_mac = config.alg.mac
        self.alg_ips = frozenset(config.alg.ips.values())

        for addr in self.policy.static_arp:
            if self.vlan_of(addr) is None:
                raise ConfigError(f"/static_arp/{addr}", "address is outside every VLAN")

        self._base_ns = _cost_ns(config.alg.base_service_cost_ms, "/alg/base_service_cost_ms")
        self._byte_ns = _cost_ns(config.alg.per_byte_cost_ms, "/alg/per_byte_cost_ms")
        self._step_ns = _cost_ns(config.alg.regex_step_cost_ms, "/alg/regex_step_cost_ms")
        self._busy_until = 0
        self.arp_table = dict(self.policy.static_arp)
        self.arp_events: list[dict] = []
        self._bucket = TokenBucket.for_policy(self.policy)
        self._url_matchers = self.policy.url_matchers()
        self._ftp_matcher = self.policy.ftp_scan.matcher() if self.policy.ftp_scan.enabled else None
        self._proxies: dict[int, _Proxy] = {}
        self._http_cache: dict[tuple, list] = {}
        self._next_alg_port = EPHEMERAL_FIRST

    # -- lookups --------------------------------------------------------

    def host(self, name: str) -> Host:
        try:
            return self.hosts[name]
        except KeyError:
            raise UnknownHost(name) from None

    def host_by_ip(self, addr: IPv4Address) -> Host | None:
        return self._by_ip.get(addr)

    def vlan_of(self, addr: IPv4Address) -> int | None:
        for v in self.config.vlans:
            if addr in v.subnet:
                return v.id
        return None

    def next_hop_mac(self, host: Host, dst: IPv4Address) -> MacAddr:
        """Hosts use a fixed neighbour table; off-subnet traffic goes to the gateway."""
        if dst not in self.vlans[host.spec.vlan].subnet:
            return self.alg_mac
        if dst in self.alg_ips:
            return self.alg_mac
        peer = self._by_ip.get(dst)
        return peer.spec.mac if peer is not None else ZERO_MAC

    # -- injection ------------------------------------------------------

    def _push(self, t: int, kind: str, *args) -> None:
        heapq.heappush(self._heap, (t, self._seq, kind, args))
        self._seq += 1

    def _new_fid(self, frame: Frame, origin: str) -> int:
        fid = self._next_fid
        self._next_fid += 1
        self.frames[fid] = frame
        self.origin[fid] = origin
        return fid

    def _log(self, t: int, fid: int, node: str, action: str, reason: str = "") -> None:
        if self.record_trace:
            rec = {"time": t / NS_PER_MS, "frame_id": fid, "node": node, "action": action}
            if reason:
                rec["reason"] = reason
            self.trace.append(rec)

    def inject_frame(self, from_host: str, frame: Frame, at_ns: int | None = None) -> int:
        """Queue ``frame`` for transmission by ``from_host``; returns its frame id.

        The frame is sent exactly as given (crafted frames keep forged
        addresses); only ``ingress_vlan`` is set from the sender's port.
        """
        host = self.host(from_host)
        t = self.clock_ns if at_ns is None else at_ns
        if t < self.clock_ns:
            raise ValueError(f"cannot inject in the past (t={t} ns < clock={self.clock_ns} ns)")
        if len(frame.payload) > self.config.mtu:
            raise ValueError(f"payload exceeds mtu {self.config.mtu}")
        if frame.ingress_vlan != host.spec.vlan:
            frame = replace(frame, ingress_vlan=host.spec.vlan)
        fid = self._new_fid(frame, host.spec.name)
        self._push(t, "emit", fid)
        return fid

    def build_frame(self, from_host: str, dst_ip: IPv4Address | str, proto: Proto = Proto.TCP,
                    payload: bytes = b"", dst_port: int | None = None, src_port: int | None = None) -> Frame:
        """A well-formed frame carrying the host's own identity and credentials."""
        host = self.host(from_host)
        dst_ip = IPv4Address(dst_ip)
        l4 = None
        if proto is not Proto.ICMP:
            l4 = Ports(src_port if src_port is not None else host.ephemeral_port(), dst_port or 0)
        return Frame(
            src_mac=host.spec.mac,
            dst_mac=self.next_hop_mac(host, dst_ip),
            ip=IpHeader(host.spec.ip, dst_ip, proto),
            l4=l4,
            payload=payload,
            ingress_vlan=host.spec.vlan,
            auth_token=self._token_for(host.spec.ip),
        )

    def send(self, from_host: str, dst_ip: IPv4Address | str, proto: Proto = Proto.TCP, payload: bytes = b"",
             dst_port: int | None = None, src_port: int | None = None, at_ns: int | None = None) -> int:
        return self.inject_frame(from_host, self.build_frame(from_host, dst_ip, proto, payload, dst_port, src_port),
                                 at_ns)

    def _token_for(self, addr: IPv4Address) -> str | None:
        if self.policy.spoof_auth is SpoofAuth.TOKEN:
            return self.policy.auth_secrets.get(addr)
        return None

    # -- event loop -----------------------------------------------------

    def run_until_idle(self, max_events: int = MAX_EVENTS) -> None:
        heap = self._heap
        while heap:
            if self.events_processed >= max_events:
                raise SimOverrun(f"more than {max_events} events")
            t, _, kind, args = heapq.heappop(heap)
            self.clock_ns = t
            self.events_processed += 1
            if kind == "emit":
                self._emit(t, args[0])
            elif kind == "alg_out":
                self._alg_departure(t, *args)
            elif kind == "deliver":
                self._deliver(t, *args)

    def _emit(self, t: int, fid: int) -> None:
        frame = self.frames[fid]
        self._log(t, fid, self.origin[fid], "send")
        self._switch(t, fid, frame)

    def _switch(self, t: int, fid: int, frame: Frame) -> None:
        vlan = frame.ingress_vlan
        node = f"switch-vlan{vlan}"
        dst = frame.dst_mac
        if dst == self.alg_mac or (dst == BROADCAST_MAC and frame.kind is FrameKind.ARP):
            # broadcasts are only meaningful to the gateway in this model
            self._log(t, fid, node, "forward", "to alg")
            self._alg_arrival(t, fid, frame)
            return
        target = self._by_mac.get((vlan, dst))
        if target is not None:
            self._log(t, fid, node, "forward", f"to {target.spec.name}")
            self._push(t, "deliver", target.spec.name, fid)
            return
        if any(h.spec.mac == dst for h in self.hosts.values()):
            self._log(t, fid, node, "drop", "no-direct-inter-vlan-path")
        else:
            self._log(t, fid, node, "drop", "unknown-destination-mac")

    def _deliver(self, t: int, name: str, fid: int) -> None:
        host = self.hosts[name]
        frame = self.frames[fid]
        host.inbox.append(Delivery(t, fid, frame))
        self._log(t, fid, name, "deliver")
        self._host_respond(t, host, frame)

    # -- host behaviour -------------------------------------------------

    def _host_respond(self, t: int, host: Host, frame: Frame) -> None:
        if frame.kind is not FrameKind.IPV4 or frame.ip.dst != host.spec.ip:
            return
        if frame.ip.proto is Proto.ICMP:
            if frame.payload[:1] == bytes([ECHO_REQUEST]):
                reply = echo_payload(ECHO_REPLY, int.from_bytes(frame.payload[1:3], "big"))
                self.send(host.spec.name, frame.ip.src, Proto.ICMP, reply, at_ns=t)
            return
        if frame.ip.proto is not Proto.TCP:
            return
        port = frame.l4.dst
        if port == HTTP_SERVICE_PORT and "http" in host.spec.services:
            body = _http_server_reply(frame.payload)
        elif port == FTP_SERVICE_PORT and "ftp" in host.spec.services:
            body = _ftp_server_reply(frame.payload)
        else:
            return
        self.send(host.spec.name, frame.ip.src, Proto.TCP, body, dst_port=frame.l4.src, src_port=port, at_ns=t)

    # -- gateway --------------------------------------------------------

    def _alg_arrival(self, t: int, fid: int, frame: Frame) -> None:
        self.alg_arrival[fid] = t
        self._log(t, fid, "alg", "enqueue")
        disposition, outputs, steps = self._alg_process(t, fid, frame)
        service = self._base_ns + self._byte_ns * len(frame.payload) + self._step_ns * steps
        depart = max(t, self._busy_until) + service
        self._busy_until = depart
        self._push(depart, "alg_out", fid, disposition, outputs)

    def _alg_departure(self, t: int, fid: int, disposition: tuple, outputs: list) -> None:
        self.alg_departure[fid] = t
        action, reason = disposition
        if action != "forward":
            self._log(t, fid, "alg", action, reason)
        for out_fid, frame in outputs:
            if out_fid == fid:
                self._log(t, fid, "alg", "forward", reason)
                self.frames[fid] = frame
                self._switch(t, fid, frame)
            else:
                self._emit(t, out_fid)

    def _alg_frame(self, vlan: int, dst_ip: IPv4Address, proto: Proto, payload: bytes, src_ip: IPv4Address,
                   src_port: int | None = None, dst_port: int | None = None) -> Frame | None:
        dst_mac = self.arp_table.get(dst_ip)
        if dst_mac is None:
            return None
        l4 = None if proto is Proto.ICMP else Ports(src_port, dst_port)
        return Frame(self.alg_mac, dst_mac, ip=IpHeader(src_ip, dst_ip, proto), l4=l4, payload=payload,
                     ingress_vlan=vlan)

    def _alg_port(self) -> int:
        port = self._next_alg_port
        self._next_alg_port = port + 1 if port < 65535 else EPHEMERAL_FIRST
        return port

    def _note(self, t: int, fid: int, event: str, **detail) -> None:
        if not self.record_trace:
            return
        rec = {"time": t / NS_PER_MS, "frame_id": fid, "event": event}
        rec.update(detail)
        self.alg_log.append(rec)

    def _alg_process(self, t: int, fid: int, frame: Frame) -> tuple[tuple[str, str], list, int]:
        """Decide what happens to one frame; returns (disposition, outputs, regex steps)."""
        if frame.kind is FrameKind.ARP:
            return self._alg_arp(t, fid, frame)

        ip_hdr = frame.ip
        if ip_hdr.dst in self.alg_ips and ip_hdr.proto is Proto.TCP and frame.l4.dst in self._proxies:
            return self._alg_relay(t, fid, frame)

        decision = decide_l3(self.policy, frame, t, self._bucket)
        if decision.action is Action.DENY:
            self._note(t, fid, "l3-deny", reason=decision.reason, cwe=decision.cwe)
            return ("drop", decision.reason), [], 0
        if decision.action is Action.INSPECT:
            if decision.protocol == "http":
                return self._alg_http(t, fid, frame)
            return self._alg_ftp(t, fid, frame)

        if ip_hdr.dst in self.alg_ips:
            if ip_hdr.proto is Proto.ICMP and frame.payload[:1] == bytes([ECHO_REQUEST]):
                reply = echo_payload(ECHO_REPLY, int.from_bytes(frame.payload[1:3], "big"))
                out = self._alg_frame(frame.ingress_vlan, ip_hdr.src, Proto.ICMP, reply, ip_hdr.dst)
                if out is None:
                    return ("drop", "no-arp-entry"), [], 0
                return ("deliver", "echo answered"), [(self._new_fid(out, "alg"), out)], 0
            return ("drop", "no-local-service"), [], 0

        egress = self.vlan_of(ip_hdr.dst)
        if egress is None:
            return ("drop", "no-route"), [], 0
        dst_mac = self.arp_table.get(ip_hdr.dst)
        if dst_mac is None:
            return ("drop", "no-arp-entry"), [], 0
        out = replace(frame, src_mac=self.alg_mac, dst_mac=dst_mac, ingress_vlan=egress)
        return ("forward", f"to vlan {egress}"), [(fid, out)], 0

    def _alg_arp(self, t: int, fid: int, frame: Frame):
        msg = frame.arp
        before = dict(self.arp_table)
        table, event, reply = handle_arp(self.policy, self.arp_table, msg, self.alg_ips, self.alg_mac)
        self.arp_table = table
        record = {"time": t / NS_PER_MS, "frame_id": fid, "event": event.value, "sender_ip": str(msg.sender_ip),
                  "sender_mac": str(msg.sender_mac), "table_changed": table != before}
        self.arp_events.append(record)
        self._note(t, fid, "arp", result=event.value)
        outputs = []
        if reply is not None:
            out = Frame(self.alg_mac, msg.sender_mac, kind=FrameKind.ARP, arp=reply, ingress_vlan=frame.ingress_vlan)
            outputs.append((self._new_fid(out, "alg"), out))
        return ("deliver", f"arp {event.value}"), outputs, 0

    def _alg_relay(self, t: int, fid: int, frame: Frame):
        entry = self._proxies.pop(frame.l4.dst)
        vlan = self.vlan_of(entry.client_ip)
        out = self._alg_frame(vlan, entry.client_ip, Proto.TCP, frame.payload, entry.reply_ip,
                              entry.reply_port, entry.client_port)
        if out is None:
            return ("drop", "no-arp-entry"), [], 0
        self._note(t, fid, "relay", kind=entry.kind, client=str(entry.client_ip))
        return ("deliver", f"{entry.kind} reply relayed"), [(self._new_fid(out, "alg"), out)], 0

    def _answer(self, frame: Frame, payload: bytes) -> tuple[int, Frame] | None:
        ip_hdr = frame.ip
        out = self._alg_frame(frame.ingress_vlan, ip_hdr.src, Proto.TCP, payload, ip_hdr.dst,
                              frame.l4.dst, frame.l4.src)
        if out is None:
            return None
        return self._new_fid(out, "alg"), out

    def _open_proxy(self, frame: Frame, dest_ip: IPv4Address, dest_port: int, payload: bytes,
                    kind: str) -> tuple[int, Frame] | None:
        vlan = self.vlan_of(dest_ip)
        if vlan is None:
            return None
        port = self._alg_port()
        out = self._alg_frame(vlan, dest_ip, Proto.TCP, payload, self.config.alg.ips[vlan], port, dest_port)
        if out is None:
            return None
        self._proxies[port] = _Proxy(frame.ip.src, frame.l4.src, frame.ip.dst, frame.l4.dst, kind)
        return self._new_fid(out, "alg"), out

    def _alg_http(self, t: int, fid: int, frame: Frame):
        # inspection is a pure function of (payload, port, source) under a fixed policy
        key = (frame.payload, frame.l4.dst, frame.ip.src)
        outcomes = self._http_cache.get(key)
        if outcomes is None:
            if len(self._http_cache) >= HTTP_CACHE_SIZE:
                self._http_cache.clear()
            outcomes = process_http(self.policy, frame.payload, frame.l4.dst, frame.ip.src, self._url_matchers)
            self._http_cache[key] = outcomes
        outputs = []
        for outcome in outcomes:
            d = outcome.decision
            sent = None
            if isinstance(d, Redirect):
                sent = self._open_proxy(frame, d.dest_ip, d.dest_port, serialize_http(outcome.request), "http")
                if sent is None:
                    d = Reject(502, "upstream unreachable")
            if isinstance(d, Reject):
                body = d.reason.encode("utf-8")
                sent = self._answer(frame, serialize_http(response(d.status, _REASONS.get(d.status, "Error"), body)))
            self._note(t, fid, "http", status=d.status if isinstance(d, Reject) else None,
                       reason=d.reason if isinstance(d, Reject) else f"redirect {d.dest_ip}:{d.dest_port}",
                       target=outcome.request.start_line.target if outcome.request is not None else None,
                       notes=list(outcome.notes))
            if sent is not None:
                outputs.append(sent)
        return ("deliver", f"http inspected ({len(outcomes)} request(s))"), outputs, 0

    def _alg_ftp(self, t: int, fid: int, frame: Frame):
        insp = process_ftp(self.policy, frame.payload, self._ftp_matcher)
        v = insp.verdict
        self._note(t, fid, "ftp", verdict=v.kind.value, verb=insp.command.verb if insp.command else None,
                   steps=insp.scan_steps, exhausted=v.exhausted, data_len=len(insp.data),
                   bound=self._ftp_matcher.linear_bound(insp.data) if self._ftp_matcher and insp.data else None)
        if insp.passes:
            sent = self._open_proxy(frame, frame.ip.dst, frame.l4.dst, frame.payload, "ftp")
            if sent is None:
                sent = self._answer(frame, b"421 service not available\r\n")
            reason = "ftp proxied"
        else:
            detail = insp.error or v.kind.value
            sent = self._answer(frame, f"550 {detail}\r\n".encode("utf-8"))
            reason = f"ftp {v.kind.value}"
        return ("deliver", reason), [sent] if sent is not None else [], insp.scan_steps

    # -- measurements ---------------------------------------------------

    def latency_ns(self, fid: int) -> int:
        if fid not in self.alg_departure:
            raise NotCompleted(f"frame {fid} has not left the gateway")
        return self.alg_departure[fid] - self.alg_arrival[fid]

    def latency_of(self, fid: int) -> float:
        """Gateway sojourn time of a frame in virtual ms."""
        return self.latency_ns(fid) / NS_PER_MS

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n" for rec in self.trace)

    def outcomes(self) -> dict[int, list[dict]]:
        """Terminal trace records per frame id (deliver or drop)."""
        result: dict[int, list[dict]] = {}
        for rec in self.trace:
            if rec["action"] in ("deliver", "drop"):
                result.setdefault(rec["frame_id"], []).append(rec)
        return result

    def bypass_paths(self) -> list[int]:
        """Frames a host delivered to a host in another VLAN without passing the gateway."""
        visited: dict[int, set[str]] = {}
        for rec in self.trace:
            visited.setdefault(rec["frame_id"], set()).add(rec["node"])
        bad = []
        for rec in self.trace:
            if rec["action"] != "deliver" or rec["node"] == "alg":
                continue
            origin = self.origin[rec["frame_id"]]
            if origin == "alg":
                continue
            if self.hosts[origin].spec.vlan != self.hosts[rec["node"]].spec.vlan and "alg" not in visited[rec["frame_id"]]:
                bad.append(rec["frame_id"])
        return bad


_REASONS = {400: "Bad Request", 403: "Forbidden", 415: "Unsupported Media Type", 502: "Bad Gateway"}


def _http_server_reply(payload: bytes) -> bytes:
    try:
        req = parse_http_request(payload)
    except ParseError:
        return serialize_http(response(400, "Bad Request"))
    return serialize_http(response(200, "OK", f"stored {len(req.body)} bytes".encode()))


def _ftp_server_reply(payload: bytes) -> bytes:
    try:
        cmd, data = split_ftp_payload(payload)
    except ParseError:
        return b"500 syntax error\r\n"
    if cmd.verb == "MKD":
        return f'257 "{cmd.argument}" created\r\n'.encode("utf-8", "replace")
    if data:
        return f"226 transfer complete, {len(data)} bytes\r\n".encode()
    return b"200 command okay\r\n"


def build_network(config: NetworkConfig, policy: PolicySet | None = None, record_trace: bool = True) -> Network:
    return Network(config, policy, record_trace)


def inject_frame(net: Network, from_host: str, frame: Frame, at_ns: int | None = None) -> int:
    return net.inject_frame(from_host, frame, at_ns)


def run_until_idle(net: Network, max_events: int = MAX_EVENTS) -> None:
    net.run_until_idle(max_events)


def latency_of(net: Network, frame_id: int) -> float:
    return net.latency_of(frame_id)


def icmp_probe(net: Network, src_host: str, dst_ip: IPv4Address | str) -> Reachability:
    """Ping ``dst_ip`` from ``src_host`` and run the network until idle."""
    host = net.host(src_host)
    dst_ip = IPv4Address(dst_ip)
    if dst_ip == host.spec.ip:
        return Reachability(True, "loopback")
    ident = len(net.frames) & 0xFFFF
    start = len(net.trace)
    seen = len(host.inbox)
    net.send(src_host, dst_ip, Proto.ICMP, echo_payload(ECHO_REQUEST, ident))
    net.run_until_idle()
    for d in host.inbox[seen:]:
        f = d.frame
        if f.kind is FrameKind.IPV4 and f.ip.proto is Proto.ICMP and f.ip.src == dst_ip \
                and f.payload == echo_payload(ECHO_REPLY, ident):
            return Reachability(True)
    for rec in net.trace[start:]:
        if rec["action"] == "drop":
            return Reachability.dropped(rec.get("reason", ""), rec["node"])
    return Reachability.dropped("no-reply", src_host)

"""HTTP inspection: framing normalization, URL filtering, content routing and author checks."""

from __future__ import annotations

from dataclasses import dataclass
from ipaddress import IPv4Address
from typing import Union

from .packet import (FileKind, FormatError, HttpMessage, ParseError, detect_file_kind, extract_author,
                     parse_http_request)
from .patterns import Matcher
from .policy import Action, Decision, HeaderMode, PolicySet

# declared media types accepted for each file kind
CONTENT_TYPES = {
    FileKind.DOC: frozenset({"application/msword"}),
    FileKind.MPEG: frozenset({"video/mpeg"}),
}

MAX_PIPELINED = 32


@dataclass(frozen=True)
class Reject:
    status: int
    reason: str


@dataclass(frozen=True)
class Redirect:
    dest_ip: IPv4Address
    dest_port: int


RouteDecision = Union[Redirect, Reject]


@dataclass(frozen=True)
class NormalizedRequest:
    message: HttpMessage
    content_length: int
    content_type: str
    notes: tuple[str, ...] = ()
    residual: bytes = b""


def _media_type(value: str) -> str:
    return value.split(";", 1)[0].strip().lower()


def normalize(req: HttpMessage, header_mode: HeaderMode) -> NormalizedRequest | Reject:
    """Resolve Content-Length/Content-Type and reconcile them with the body.

    Strict mode rejects duplicated framing headers and any length mismatch.
    Last-wins mode takes the last occurrence as authoritative; bytes past the
    resolved length come back as ``residual`` and are parsed by the caller as
    the next request, which is exactly the smuggling behaviour.
    """
    lengths = req.get_all("Content-Length")
    types = req.get_all("Content-Type")
    notes = []
    if header_mode is HeaderMode.STRICT:
        if len(lengths) > 1:
            return Reject(400, "duplicate content-length")
        if len(types) > 1:
            return Reject(400, "duplicate content-type")
    else:
        if len(lengths) > 1:
            notes.append("duplicate content-length, last occurrence used")
        if len(types) > 1:
            notes.append("duplicate content-type, last occurrence used")

    raw = lengths[-1] if lengths else "0"
    if not raw.isdigit():
        return Reject(400, "invalid content-length")
    length = int(raw)
    content_type = types[-1] if types else ""
    body = req.body

    if header_mode is HeaderMode.STRICT:
        if len(body) != length:
            return Reject(400, "content-length does not match body")
        return NormalizedRequest(req, length, content_type)

    if len(body) < length:
        return Reject(400, "incomplete body")
    residual = body[length:]
    if residual:
        notes.append(f"{len(residual)} bytes after body treated as next request")
    return NormalizedRequest(req.replace(body=body[:length]), length, content_type, tuple(notes), residual)


def filter_url(policy: PolicySet, target: str, matchers: list[Matcher] | None = None) -> Decision:
    """Deny iff the target matches a blocklist pattern (case-sensitive search)."""
    for m in matchers if matchers is not None else policy.url_matchers():
        result = m.run(target)
        if result.matched or result.exhausted:
            return Decision.deny("url-blocked", "CWE-20")
    return Decision.allow()


def route_by_content(policy: PolicySet, req: NormalizedRequest, ingress_port: int,
                     src_ip: IPv4Address) -> RouteDecision:
    for route in policy.content_routes:
        if route.ingress_port == ingress_port and route.allowed_src_ip == src_ip:
            break
    else:
        return Reject(403, "no route for this client on this port")
    kind = detect_file_kind(req.message.body)
    if kind is not route.required_kind:
        return Reject(415, f"body is {kind.value}, route requires {route.required_kind.value}")
    if _media_type(req.content_type) not in CONTENT_TYPES[route.required_kind]:
        return Reject(415, f"declared content-type {req.content_type!r} does not match body")
    return Redirect(route.dest_ip, route.dest_port)


def check_author(policy: PolicySet, doc_body: bytes) -> Decision:
    try:
        author = extract_author(doc_body)
    except FormatError:
        return Decision.deny("unparseable-document", "CWE-281")
    if author in policy.author_whitelist:
        return Decision.allow()
    return Decision.deny("author-not-whitelisted", "CWE-281")


@dataclass(frozen=True)
class HttpOutcome:
    """What the gateway does with one request found in a delivery."""

    request: HttpMessage | None
    decision: RouteDecision
    notes: tuple[str, ...] = ()


def inspect_request(policy: PolicySet, req: NormalizedRequest, ingress_port: int, src_ip: IPv4Address,
                    url_matchers: list[Matcher] | None = None) -> RouteDecision:
    url = filter_url(policy, req.message.start_line.target, url_matchers)
    if url.action is Action.DENY:
        return Reject(403, url.reason)
    decision = route_by_content(policy, req, ingress_port, src_ip)
    if isinstance(decision, Redirect) and detect_file_kind(req.message.body) is FileKind.DOC:
        author = check_author(policy, req.message.body)
        if author.action is Action.DENY:
            return Reject(403, author.reason)
    return decision


def process_http(policy: PolicySet, payload: bytes, ingress_port: int, src_ip: IPv4Address,
                 url_matchers: list[Matcher] | None = None) -> list[HttpOutcome]:
    """Inspect one client delivery; yields one outcome per request it turned out to hold."""
    outcomes = []
    data = payload
    while data and len(outcomes) < MAX_PIPELINED:
        try:
            req = parse_http_request(data)
        except ParseError as exc:
            outcomes.append(HttpOutcome(None, Reject(400, f"unparseable request: {exc}")))
            break
        norm = normalize(req, policy.header_mode)
        if isinstance(norm, Reject):
            outcomes.append(HttpOutcome(req, norm))
            break
        outcomes.append(HttpOutcome(norm.message, inspect_request(policy, norm, ingress_port, src_ip, url_matchers),
                                    norm.notes))
        data = norm.residual
    return outcomes

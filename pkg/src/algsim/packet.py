"""Simulated wire formats: frames, ARP, HTTP/1.1, FTP control lines and toy files.

Everything here is a pure value type or a pure function. Parsing is
deliberately tolerant (duplicate headers are kept in wire order) so that all
strict-vs-lenient behaviour lives in the inspectors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from ipaddress import IPv4Address
from typing import Union

IpAddr = IPv4Address

MAX_PAYLOAD = 65535
DOC_MAGIC = b"%DOC1\n"
MPEG_MAGIC = b"\x00\x00\x01\xba"
CRLF = b"\r\n"


class ParseError(ValueError):
    """Raised when bytes on the wire do not form a valid message."""


class FormatError(ValueError):
    """Raised when a toy file container is missing a required field."""


def ip(text: str | IPv4Address) -> IPv4Address:
    return text if isinstance(text, IPv4Address) else IPv4Address(text)


@dataclass(frozen=True, order=True)
class MacAddr:
    octets: bytes

    def __post_init__(self) -> None:
        if len(self.octets) != 6:
            raise ValueError(f"MAC address needs 6 octets, got {len(self.octets)}")

    @classmethod
    def parse(cls, text: str) -> MacAddr:
        parts = text.split(":")
        if len(parts) != 6 or any(len(p) != 2 for p in parts):
            raise ValueError(f"bad MAC address {text!r}")
        try:
            return cls(bytes(int(p, 16) for p in parts))
        except ValueError:
            raise ValueError(f"bad MAC address {text!r}") from None

    def __str__(self) -> str:
        return ":".join(f"{b:02x}" for b in self.octets)


def mac(text: str | MacAddr) -> MacAddr:
    return text if isinstance(text, MacAddr) else MacAddr.parse(text)


BROADCAST_MAC = MacAddr(b"\xff" * 6)


class FrameKind(enum.Enum):
    ARP = "arp"
    IPV4 = "ipv4"


class Proto(enum.Enum):
    ICMP = "icmp"
    TCP = "tcp"
    UDP = "udp"


class ArpOp(enum.Enum):
    REQUEST = "request"
    REPLY = "reply"


@dataclass(frozen=True)
class ArpMessage:
    op: ArpOp
    sender_ip: IPv4Address
    sender_mac: MacAddr
    target_ip: IPv4Address
    target_mac: MacAddr = MacAddr(b"\x00" * 6)


@dataclass(frozen=True)
class IpHeader:
    src: IPv4Address
    dst: IPv4Address
    proto: Proto


@dataclass(frozen=True)
class Ports:
    src: int
    dst: int

    def __post_init__(self) -> None:
        for p in (self.src, self.dst):
            if not 0 <= p <= 65535:
                raise ValueError(f"port out of range: {p}")


@dataclass(frozen=True)
class Frame:
    """One simulated L2 frame with optional L3/L4 headers.

    ``auth_token`` stands in for a per-host credential carried alongside the
    packet; it is only consulted when the gateway runs in token mode.
    """

    src_mac: MacAddr
    dst_mac: MacAddr
    kind: FrameKind = FrameKind.IPV4
    ip: IpHeader | None = None
    l4: Ports | None = None
    payload: bytes = b""
    ingress_vlan: int = 0
    arp: ArpMessage | None = None
    auth_token: str | None = None

    def __post_init__(self) -> None:
        if self.kind is FrameKind.ARP:
            if self.ip is not None or self.l4 is not None:
                raise ValueError("ARP frames carry no IP or L4 header")
            if self.arp is None:
                raise ValueError("ARP frame without ARP message")
        else:
            if self.ip is None:
                raise ValueError("IPv4 frame without IP header")
            if self.ip.proto is Proto.ICMP and self.l4 is not None:
                raise ValueError("ICMP frames carry no ports")
            if self.ip.proto is not Proto.ICMP and self.l4 is None:
                raise ValueError(f"{self.ip.proto.value} frame without ports")
        if len(self.payload) > MAX_PAYLOAD:
            raise ValueError(f"payload of {len(self.payload)} bytes exceeds {MAX_PAYLOAD}")


# ---------------------------------------------------------------------------
# HTTP


@dataclass(frozen=True)
class RequestLine:
    method: str
    target: str
    version: str = "HTTP/1.1"

    def __str__(self) -> str:
        return f"{self.method} {self.target} {self.version}"


@dataclass(frozen=True)
class StatusLine:
    version: str
    status: int
    reason: str

    def __str__(self) -> str:
        return f"{self.version} {self.status} {self.reason}"


@dataclass(frozen=True)
class HttpMessage:
    start_line: Union[RequestLine, StatusLine]
    headers: tuple[tuple[str, str], ...] = ()
    body: bytes = b""

    def __post_init__(self) -> None:
        object.__setattr__(self, "headers", tuple((str(n), str(v)) for n, v in self.headers))

    @property
    def is_request(self) -> bool:
        return isinstance(self.start_line, RequestLine)

    def get_all(self, name: str) -> list[str]:
        """All values of ``name`` in wire order (case-insensitive lookup)."""
        key = name.lower()
        return [v for n, v in self.headers if n.lower() == key]

    def get(self, name: str, default: str | None = None) -> str | None:
        values = self.get_all(name)
        return values[-1] if values else default

    def replace(self, **changes) -> HttpMessage:
        fields = {"start_line": self.start_line, "headers": self.headers, "body": self.body}
        fields.update(changes)
        return HttpMessage(**fields)


def request(method: str, target: str, headers=(), body: bytes = b"") -> HttpMessage:
    return HttpMessage(RequestLine(method, target), tuple(headers), body)


def response(status: int, reason: str, body: bytes = b"", headers=()) -> HttpMessage:
    hdrs = tuple(headers) + (("Content-Length", str(len(body))),)
    return HttpMessage(StatusLine("HTTP/1.1", status, reason), hdrs, body)


def _split_head(data: bytes) -> tuple[list[str], bytes]:
    end = data.find(b"\r\n\r\n")
    if end < 0:
        raise ParseError("missing blank line after headers")
    head = data[:end].decode("latin-1")
    return head.split("\r\n"), data[end + 4:]


def _is_token(s: str) -> bool:
    return bool(s) and all(33 <= ord(c) <= 126 and c not in '()<>@,;:\\"/[]?={}' for c in s)


def _parse_headers(lines: list[str]) -> tuple[tuple[str, str], ...]:
    headers = []
    for line in lines:
        name, sep, value = line.partition(":")
        if not sep:
            raise ParseError(f"header line without colon: {line!r}")
        if not _is_token(name):
            raise ParseError(f"bad header name: {name!r}")
        headers.append((name, value.strip(" \t")))
    return tuple(headers)


def parse_http_request(data: bytes) -> HttpMessage:
    """Parse one request; the body is everything after the blank line.

    Content-Length is not reconciled with the body here.
    """
    lines, body = _split_head(data)
    parts = lines[0].split(" ")
    if len(parts) != 3 or not _is_token(parts[0]) or not parts[1]:
        raise ParseError(f"malformed request line: {lines[0]!r}")
    if not parts[2].startswith("HTTP/"):
        raise ParseError(f"bad HTTP version: {parts[2]!r}")
    return HttpMessage(RequestLine(*parts), _parse_headers(lines[1:]), body)


def parse_http_response(data: bytes) -> HttpMessage:
    lines, body = _split_head(data)
    parts = lines[0].split(" ", 2)
    if len(parts) < 2 or not parts[0].startswith("HTTP/") or not parts[1].isdigit():
        raise ParseError(f"malformed status line: {lines[0]!r}")
    reason = parts[2] if len(parts) == 3 else ""
    return HttpMessage(StatusLine(parts[0], int(parts[1]), reason), _parse_headers(lines[1:]), body)


def serialize_http(msg: HttpMessage) -> bytes:
    head = [str(msg.start_line)] + [f"{n}: {v}" for n, v in msg.headers]
    return ("\r\n".join(head) + "\r\n\r\n").encode("latin-1") + msg.body


# ---------------------------------------------------------------------------
# FTP

TRANSFER_VERBS = frozenset({"STOR", "STOU", "APPE", "RETR", "CP"})


@dataclass(frozen=True)
class FtpCommand:
    verb: str
    argument: str = ""


def parse_ftp_command(line: bytes | str) -> FtpCommand:
    """Parse a control line such as ``b"MKD secret\\r\\n"``.

    Any alphabetic verb is accepted (``CP`` is not a standard verb but is
    used as a transfer command in this testbed).
    """
    text = line.decode("latin-1") if isinstance(line, bytes) else line
    if text.endswith("\r\n"):
        text = text[:-2]
    if not text:
        raise ParseError("empty FTP command line")
    if "\r" in text or "\n" in text:
        raise ParseError("FTP command spans more than one line")
    verb, _, argument = text.partition(" ")
    if not verb or not (verb.isascii() and verb.isalpha()):
        raise ParseError(f"bad FTP verb: {verb!r}")
    return FtpCommand(verb.upper(), argument)


def serialize_ftp_command(cmd: FtpCommand) -> bytes:
    text = f"{cmd.verb} {cmd.argument}" if cmd.argument else cmd.verb
    return text.encode("latin-1") + CRLF


def split_ftp_payload(payload: bytes) -> tuple[FtpCommand, bytes]:
    """Split a control line from the in-band data that follows it."""
    end = payload.find(CRLF)
    if end < 0:
        raise ParseError("FTP control line is not CRLF-terminated")
    return parse_ftp_command(payload[: end + 2]), payload[end + 2:]


def ftp_payload(cmd: FtpCommand, data: bytes = b"") -> bytes:
    return serialize_ftp_command(cmd) + data


# ---------------------------------------------------------------------------
# Toy file containers


class FileKind(enum.Enum):
    DOC = "doc"
    MPEG = "mpeg"
    UNKNOWN = "unknown"


def detect_file_kind(data: bytes) -> FileKind:
    if data.startswith(DOC_MAGIC):
        return FileKind.DOC
    if data.startswith(MPEG_MAGIC):
        return FileKind.MPEG
    return FileKind.UNKNOWN


def make_doc(author: str, body: bytes = b"") -> bytes:
    return DOC_MAGIC + b"AUTHOR:" + author.encode("utf-8") + b"\n" + body


def make_mpeg(frames: bytes = b"") -> bytes:
    return MPEG_MAGIC + frames


def extract_author(doc: bytes) -> str:
    if detect_file_kind(doc) is not FileKind.DOC:
        raise FormatError("not a DOC container")
    lines = doc.split(b"\n", 2)
    if len(lines) < 2 or not lines[1].startswith(b"AUTHOR:"):
        raise FormatError("line 2 lacks the AUTHOR: field")
    return lines[1][len(b"AUTHOR:"):].rstrip(b"\r").decode("utf-8", errors="replace")


"""Seeded generation and mutation fuzzers.

All randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence``, so a (template, seed, n) triple always yields the same
sequence.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .packet import MAX_PAYLOAD, FileKind, HttpMessage, make_doc, make_mpeg, request

MAX_EXPANSION = 64
_AUTHOR_CHARS = string.ascii_letters + string.digits + "-_."


def rng_for(seed: int | list[int]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class HttpTemplate:
    """Fields a generated upload may vary; anything not in ``vary`` uses the first option."""

    target: str = "/upload"
    host: str = "alg"
    content_types: tuple[str, ...] = ("video/mpeg", "application/msword", "text/plain", "application/octet-stream")
    ports: tuple[int, ...] = (8080, 8085)
    kinds: tuple[FileKind, ...] = (FileKind.MPEG, FileKind.DOC, FileKind.UNKNOWN)
    authors: tuple[str, ...] = ("alice", "bob", "mallory")
    vary: frozenset[str] = frozenset({"content_type", "port", "kind", "author", "dup"})
    random_authors: bool = True
    max_dup: int = 3


@dataclass(frozen=True)
class FuzzRequest:
    message: HttpMessage
    ingress_port: int
    kind: FileKind
    author: str
    content_types: tuple[str, ...]  # every Content-Type header in wire order

    @property
    def duplicates(self) -> int:
        return len(self.content_types) - 1


def _pick(rng: np.random.Generator, options, vary: bool):
    return options[int(rng.integers(len(options)))] if vary else options[0]


def _random_author(rng: np.random.Generator) -> str:
    n = int(rng.integers(1, 17))
    return "".join(_AUTHOR_CHARS[i] for i in rng.integers(len(_AUTHOR_CHARS), size=n))


def _body(rng: np.random.Generator, kind: FileKind, author: str) -> bytes:
    filler = bytes(rng.integers(32, 127, size=int(rng.integers(0, 48)), dtype=np.uint8))
    if kind is FileKind.DOC:
        return make_doc(author, filler)
    if kind is FileKind.MPEG:
        return make_mpeg(filler)
    return b"RAW" + filler


def gen_fuzz_http(template: HttpTemplate, seed: int, n: int) -> list[FuzzRequest]:
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = rng_for(seed)
    vary = template.vary
    out = []
    for i in range(n):
        ctype = _pick(rng, template.content_types, "content_type" in vary)
        port = _pick(rng, template.ports, "port" in vary)
        kind = _pick(rng, template.kinds, "kind" in vary)
        if "author" in vary and template.random_authors and rng.integers(2):
            author = _random_author(rng)
        else:
            author = _pick(rng, template.authors, "author" in vary)
        dup = int(rng.integers(template.max_dup + 1)) if "dup" in vary else 0
        ctypes = tuple(_pick(rng, template.content_types, True) for _ in range(dup)) + (ctype,)
        body = _body(rng, kind, author)
        headers = [("Host", template.host)] + [("Content-Type", c) for c in ctypes]
        headers.append(("Content-Length", str(len(body))))
        msg = request("POST", f"{template.target}/{i}", headers, body)
        out.append(FuzzRequest(msg, port, kind, author, ctypes))
    return out


# ---------------------------------------------------------------------------
# mutation

OPERATORS = ("flip", "duplicate", "expand")


def _tokens(data: bytes) -> list[tuple[int, int]]:
    spans, start = [], None
    for i, b in enumerate(data):
        if b in b" \r\n\t":
            if start is not None:
                spans.append((start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        spans.append((start, len(data)))
    return spans


def mutate_once(data: bytes, rng: np.random.Generator, op: str | None = None) -> bytes:
    """Apply one operator: byte flip, token duplication or run-length expansion."""
    if not data:
        return data
    op = op or OPERATORS[int(rng.integers(len(OPERATORS)))]
    if op == "flip":
        i = int(rng.integers(len(data)))
        return data[:i] + bytes([data[i] ^ int(rng.integers(1, 256))]) + data[i + 1:]
    if op == "duplicate":
        spans = _tokens(data)
        if not spans:
            return data + data
        a, b = spans[int(rng.integers(len(spans)))]
        return data[:b] + data[a:b] + data[b:]
    if op == "expand":
        start = int(rng.integers(len(data)))
        length = int(rng.integers(1, min(4, len(data) - start) + 1))
        k = int(rng.integers(2, MAX_EXPANSION + 1))
        span = data[start:start + length]
        return (data[:start] + span * k + data[start + length:])[:MAX_PAYLOAD]
    raise ValueError(f"unknown operator {op!r}")


def mutate(seed_bytes: bytes, seed: int, n: int) -> list[bytes]:
    """``n`` independent single-operator mutants of ``seed_bytes``."""
    rng = rng_for(seed)
    return [mutate_once(seed_bytes, rng) for _ in range(n)]

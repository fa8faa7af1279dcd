"""FTP inspection: command blocklist and pattern scanning of transferred data."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .packet import TRANSFER_VERBS, FtpCommand, ParseError, split_ftp_payload
from .patterns import Engine, Matcher
from .policy import PolicySet


class FtpVerdictKind(enum.Enum):
    ALLOW = "allow"
    BLOCKED = "blocked"
    MALICIOUS = "malicious"
    SCAN_SKIPPED = "scan-skipped"


@dataclass(frozen=True)
class FtpVerdict:
    kind: FtpVerdictKind
    verb: str | None = None
    pattern_id: str | None = None
    steps: int = 0
    exhausted: bool = False

    @property
    def passes(self) -> bool:
        return self.kind in (FtpVerdictKind.ALLOW, FtpVerdictKind.SCAN_SKIPPED)


def filter_command(policy: PolicySet, cmd: FtpCommand) -> FtpVerdict:
    if cmd.verb in policy.ftp_blocked_verbs:
        return FtpVerdict(FtpVerdictKind.BLOCKED, verb=cmd.verb)
    return FtpVerdict(FtpVerdictKind.ALLOW, verb=cmd.verb)


def scan_data(policy: PolicySet, data: bytes, matcher: Matcher | None = None) -> FtpVerdict:
    """Scan transfer data with the configured pattern.

    Running out of budget on the budgeted engine counts as malicious
    (fail-closed). The backtracking engine has no real budget; its cap only
    bounds the simulation and a capped run lets the data through.
    """
    if not policy.ftp_scan.enabled:
        return FtpVerdict(FtpVerdictKind.SCAN_SKIPPED)
    m = matcher if matcher is not None else policy.ftp_scan.matcher()
    result = m.run(data)
    source = m.pattern.source
    if result.matched:
        return FtpVerdict(FtpVerdictKind.MALICIOUS, pattern_id=source, steps=result.steps)
    if result.exhausted and m.engine is Engine.BUDGETED:
        return FtpVerdict(FtpVerdictKind.MALICIOUS, pattern_id=source, steps=result.steps, exhausted=True)
    return FtpVerdict(FtpVerdictKind.ALLOW, steps=result.steps, exhausted=result.exhausted)


@dataclass(frozen=True)
class FtpInspection:
    command: FtpCommand | None
    data: bytes
    verdict: FtpVerdict
    scan_steps: int = 0
    error: str = ""

    @property
    def passes(self) -> bool:
        return self.command is not None and self.verdict.passes


def process_ftp(policy: PolicySet, payload: bytes, matcher: Matcher | None = None) -> FtpInspection:
    """Inspect one FTP delivery: control line first, then any attached data."""
    try:
        cmd, data = split_ftp_payload(payload)
    except ParseError as exc:
        return FtpInspection(None, b"", FtpVerdict(FtpVerdictKind.BLOCKED), error=str(exc))
    verdict = filter_command(policy, cmd)
    if not verdict.passes:
        return FtpInspection(cmd, data, verdict)
    if cmd.verb in TRANSFER_VERBS and data:
        scan = scan_data(policy, data, matcher)
        return FtpInspection(cmd, data, scan, scan.steps)
    return FtpInspection(cmd, data, verdict)

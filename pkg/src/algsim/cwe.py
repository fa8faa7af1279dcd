"""Embedded CWE knowledge base used to annotate scenario results."""

from __future__ import annotations

from dataclasses import asdict, dataclass


class CweNotFound(KeyError):
    pass


@dataclass(frozen=True)
class CweEntry:
    cwe_id: str
    description: str
    attack_scenario: str
    occurred_in: tuple[str, ...]
    implemented: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["occurred_in"] = list(self.occurred_in)
        return d


_ROWS = [
    ("CWE-20", "Improper Input Validation", "Crafted DNS, RTSP packets", ("Cisco ASA", "Cisco FTD")),
    ("CWE-22", "Improper Limitation of a Pathname to a Restricted Directory", "Crafted HTTP requests",
     ("HAProxy", "Pfsense")),
    ("CWE-74", "Improper Neutralization of characters ('Injection')", "Encapsulation attack (via HTTP req)",
     ("HAProxy",)),
    ("CWE-78", "Improper Neutralization of characters ('OS Command Injection')",
     "OS command injection (via HTTP req)", ("HAProxy", "Pfsense")),
    ("CWE-79", "Improper Neutralization of characters ('Cross-site Scripting')", "Crafted HTTP requests",
     ("Pfsense",)),
    ("CWE-91", "XML Injection (aka Blind XPath Injection)", "Manipulation of configuration XML files",
     ("Pfsense",)),
    ("CWE-120", "Buffer Copy without Checking Size of Input ('Buffer Overflow')", "Specific FTP transfer",
     ("Cisco IOS",)),
    ("CWE-190", "Integer Overflow or Wraparound", "HTTP Request Smuggling", ("HAProxy",)),
    ("CWE-200", "Exposure of Sensitive Information to an Unauthorized Actor", "Log Data Extraction",
     ("HAProxy",)),
    ("CWE-281", "Improper Preservation of Permissions", "Crafted FTP commands", ("Pfsense",)),
    ("CWE-290", "Authentication Bypass by Spoofing", "IP and MAC spoofing", ("PfSense",)),
    ("CWE-307", "Improper Restriction of Excessive Authentication Attempts", "Brute Force to Authentication",
     ("Pfsense",)),
    ("CWE-358", "Improperly Implemented Security Check for Standard", "NAT Slipstreaming",
     ("Cisco ASA", "Cisco FTD")),
    ("CWE-399", "Resource Management Errors", "Crafted SIP, H.323 packets", ("Cisco IOS",)),
    ("CWE-400", "Uncontrolled Resource Consumption", "Resource Exhaustion Attacks", ("F5 BIP-IP AFM",)),
    ("CWE-401", "Missing Release of Memory after Effective Lifetime", "Crafted SIP packets", ("Junos OS",)),
    ("CWE-434", "Unrestricted Upload of Dangerous File", "Specific FTP transfer", ("Cisco IOS",)),
    ("CWE-444", "Inconsistent Interpretation of HTTP Requests", "HTTP Request/Response Smuggling",
     ("HAProxy",)),
    ("CWE-459", "Incomplete Cleanup", "Crafted HTTP requests", ("HAProxy",)),
    ("CWE-665", "Improper Initialization", "Crafted SIP packets", ("Cisco IOS",)),
    ("CWE-693", "Protection Mechanism Failure", "Crafted H.323 packet", ("Cisco IOS",)),
    ("CWE-754", "Improper Check for Unusual or Exceptional Conditions", "Crafted DNS packets", ("Cisco IOS",)),
    ("CWE-755", "Improper Handling of Exceptional Conditions", "Crafted HTTP request", ("HAProxy",)),
    ("CWE-787", "Out-of-bounds Write", "Crafted HTTP requests", ("HAProxy",)),
    ("CWE-824", "Access of Uninitialized Pointer", "Crafted SIP packets", ("Junos OS",)),
    ("CWE-835", "Loop with Unreachable Exit Condition ('Infinite Loop')", "Crafted HTTP responses",
     ("HAProxy",)),
    ("CWE-908", "Use of Uninitialized Resource", "Resource Exhaustion Attacks", ("F5 BIP-IP AFM",)),
]

# ids exercised by at least one harness scenario
IMPLEMENTED = frozenset({"CWE-20", "CWE-281", "CWE-290", "CWE-400", "CWE-434", "CWE-444", "CWE-1333"})

CATALOG: dict[str, CweEntry] = {
    cwe_id: CweEntry(cwe_id, desc, scenario, products, cwe_id in IMPLEMENTED)
    for cwe_id, desc, scenario, products in _ROWS
}
CATALOG["CWE-1333"] = CweEntry(
    "CWE-1333",
    "Inefficient Regular Expression Complexity",
    "Crafted HTTP requests",
    (),
    True,
    note="Only appears in the attack-scenario table, not in the vulnerability survey.",
)


def lookup(cwe_id: str) -> CweEntry:
    try:
        return CATALOG[cwe_id]
    except KeyError:
        raise CweNotFound(cwe_id) from None


def export() -> list[dict]:
    return [CATALOG[k].to_dict() for k in sorted(CATALOG, key=lambda k: int(k.split("-")[1]))]


"""``algsim`` command line.

Exit codes: 0 when every selected scenario matches its expectation (or no
expectations were given), 1 on a verdict mismatch, 2 on configuration or
usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .cwe import export as export_catalog
from .harness import ALL_IDS, UnknownScenario, get_spec, run_scenarios
from .policy import ConfigError, policy_from_dict
from .report import Report, config_digest, write_report
from .vnet import network_from_dict

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2
SHIPPED = ("network.json", "network_latency39.json", "policy_reference.json", "policy_mitigated.json",
           "table3.json", "expect_mitigated.json", "report.schema.json")


class UsageError(Exception):
    pass


def _read_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path} is not valid JSON: {exc}") from None


def _scenario_ids(text: str) -> list[str]:
    if text.strip().lower() == "all":
        return list(ALL_IDS)
    ids = []
    for part in text.split(","):
        sid = part.strip().upper()
        if not sid:
            continue
        get_spec(sid)
        if sid not in ids:
            ids.append(sid)
    return ids


def _expectations(doc) -> dict[str, str]:
    if not isinstance(doc, dict):
        raise UsageError("expectations file must map scenario ids to verdicts")
    out = {}
    for k, v in doc.items():
        verdict = str(v).replace(" ", "")
        if verdict not in ("Enforced", "NotEnforced"):
            raise UsageError(f"expectation for {k} must be Enforced or NotEnforced, got {v!r}")
        out[str(k).upper()] = verdict
    return out


def _cmd_run(args) -> int:
    net_doc = _read_json(args.network, "network config")
    pol_doc = _read_json(args.policy, "policy")
    config = network_from_dict(net_doc)
    policy = policy_from_dict(pol_doc)
    ids = _scenario_ids(args.scenarios)
    expect = _expectations(_read_json(args.expect, "expectations")) if args.expect else None

    results = run_scenarios(ids, config, policy, args.seed, args.workers, capture_trace=bool(args.trace))
    report = Report(config_digest(net_doc, pol_doc), args.seed, results, expect)

    if args.report:
        Path(args.report).write_bytes(write_report(report))
    if args.trace:
        Path(args.trace).write_bytes("".join(r.trace for r in results).encode("utf-8"))

    mismatches = set(report.mismatches())
    for r in results:
        mark = ""
        if expect and r.id in expect:
            mark = "  MISMATCH (expected " + expect[r.id] + ")" if r.id in mismatches else "  ok"
        print(f"{r.id:<4} {r.cwe:<9} {r.verdict.value:<12}{mark}")
    print(f"{len(results)} scenario(s), {len(mismatches)} mismatch(es)")
    return EXIT_MISMATCH if mismatches else EXIT_OK


def _cmd_catalog(args) -> int:
    sys.stdout.write(json.dumps(export_catalog(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_export_configs(args) -> int:
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    data = resources.files("algsim.data")
    for name in SHIPPED:
        (out / name).write_bytes(data.joinpath(name).read_bytes())
        print(out / name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="algsim", description="Gateway testbed and attack-scenario runner.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run attack scenarios and write a report")
    run.add_argument("--network", required=True, help="network config JSON")
    run.add_argument("--policy", required=True, help="gateway policy JSON")
    run.add_argument("--scenarios", default="all", help='comma list of ids (S1..S13) or "all"')
    run.add_argument("--seed", type=int, default=None, help="perturbs every scenario seed")
    run.add_argument("--report", help="write the canonical JSON report here")
    run.add_argument("--expect", help="JSON map of scenario id to expected verdict")
    run.add_argument("--trace", help="write hop traces as JSON Lines here")
    run.add_argument("--workers", type=int, default=1, help="scenarios to run in parallel")
    run.set_defaults(func=_cmd_run)

    cat = sub.add_parser("catalog", help="print the CWE catalog as JSON")
    cat.set_defaults(func=_cmd_catalog)

    exp = sub.add_parser("export-configs", help="copy the shipped configs into a directory")
    exp.add_argument("directory")
    exp.set_defaults(func=_cmd_export_configs)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"algsim: config error: {exc}", file=sys.stderr)
    except UnknownScenario as exc:
        print(f"algsim: unknown scenario {exc.args[0]!r}", file=sys.stderr)
    except UsageError as exc:
        print(f"algsim: {exc}", file=sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

from ipaddress import IPv4Address

import pytest
from hypothesis import given, settings, strategies as st

from algsim.dpi_http import (NormalizedRequest, Redirect, Reject, check_author, filter_url, normalize,
                             process_http, route_by_content)
from algsim.fuzz import HttpTemplate, gen_fuzz_http
from algsim.harness import smuggling_request
from algsim.packet import FileKind, make_doc, make_mpeg, request, serialize_http
from algsim.policy import Action, HeaderMode

from conftest import make_policy

MPEG_CLIENT = IPv4Address("10.10.10.3")
DOC_CLIENT = IPv4Address("10.10.10.4")


def upload(body: bytes, ctype: str, *extra):
    headers = [("Host", "alg"), ("Content-Type", ctype), ("Content-Length", str(len(body)))] + list(extra)
    return request("POST", "/upload", headers, body)


def norm(msg, mode=HeaderMode.STRICT) -> NormalizedRequest:
    out = normalize(msg, mode)
    assert isinstance(out, NormalizedRequest)
    return out


# -- normalize ---------------------------------------------------------------

def _two_lengths():
    body = b"ABCDEFGHIJK"
    return request("POST", "/x", [("Content-Length", "4"), ("Content-Length", "11")], body)


def test_strict_rejects_duplicate_length():
    assert normalize(_two_lengths(), HeaderMode.STRICT) == Reject(400, "duplicate content-length")


def test_last_wins_takes_last_length():
    out = norm(_two_lengths(), HeaderMode.LAST_WINS)
    assert out.content_length == 11 and out.residual == b""
    assert "duplicate content-length, last occurrence used" in out.notes


def test_strict_rejects_duplicate_type_and_mismatch():
    msg = upload(b"x", "a/b", ("Content-Type", "c/d"))
    assert normalize(msg, HeaderMode.STRICT) == Reject(400, "duplicate content-type")
    short = request("POST", "/x", [("Content-Length", "9")], b"abc")
    assert normalize(short, HeaderMode.STRICT).status == 400
    assert normalize(short, HeaderMode.LAST_WINS).status == 400


def test_consistent_request_identical_in_both_modes():
    msg = upload(make_mpeg(b"clip"), "video/mpeg")
    a, b = norm(msg, HeaderMode.STRICT), norm(msg, HeaderMode.LAST_WINS)
    assert a == b and a.message == msg and a.notes == ()


def test_smuggled_tail_becomes_second_request(reference_policy, mitigated_policy):
    raw = smuggling_request("alice")
    loose = process_http(reference_policy, raw, 8080, DOC_CLIENT)
    assert len(loose) == 2
    assert loose[1].request.start_line.target == "/smuggled"
    strict = process_http(mitigated_policy, raw, 8080, DOC_CLIENT)
    assert len(strict) == 1 and strict[0].decision == Reject(400, "duplicate content-length")


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.integers(0, 2**32 - 1))
def test_strict_normalization_idempotent(seed):
    for case in gen_fuzz_http(HttpTemplate(), seed, 3):
        first = normalize(case.message, HeaderMode.STRICT)
        if isinstance(first, NormalizedRequest):
            assert normalize(first.message, HeaderMode.STRICT) == first
            assert first.content_length == len(first.message.body)


# -- routing -----------------------------------------------------------------

def test_mpeg_route(reference_policy):
    d = route_by_content(reference_policy, norm(upload(make_mpeg(), "video/mpeg")), 8085, MPEG_CLIENT)
    assert d == Redirect(IPv4Address("10.10.20.5"), 80)


def test_wrong_kind_on_port(reference_policy):
    d = route_by_content(reference_policy, norm(upload(make_doc("alice"), "video/mpeg")), 8085, MPEG_CLIENT)
    assert isinstance(d, Reject) and d.status == 415


def test_declared_type_must_agree(reference_policy):
    d = route_by_content(reference_policy, norm(upload(make_mpeg(), "application/msword")), 8085, MPEG_CLIENT)
    assert d.status == 415
    ok = route_by_content(reference_policy, norm(upload(make_mpeg(), "Video/MPEG; q=1")), 8085, MPEG_CLIENT)
    assert isinstance(ok, Redirect)


def test_unconfigured_client(reference_policy):
    d = route_by_content(reference_policy, norm(upload(make_mpeg(), "video/mpeg")), 8085, IPv4Address("10.10.10.2"))
    assert d.status == 403
    d = route_by_content(reference_policy, norm(upload(make_mpeg(), "video/mpeg")), 8080, MPEG_CLIENT)
    assert d.status == 403


def test_fuzzed_requests_only_redirect_to_configured_routes(reference_policy):
    dests = {(r.dest_ip, r.dest_port) for r in reference_policy.content_routes}
    for client in (MPEG_CLIENT, DOC_CLIENT):
        for case in gen_fuzz_http(HttpTemplate(), 11, 500):
            for out in process_http(reference_policy, serialize_http(case.message), case.ingress_port, client):
                if isinstance(out.decision, Redirect):
                    assert (out.decision.dest_ip, out.decision.dest_port) in dests


# -- authors -----------------------------------------------------------------

def test_author_whitelist(policy_doc):
    p = make_policy(policy_doc, author_whitelist=["alice"])
    assert check_author(p, make_doc("alice")).action is Action.ALLOW
    assert check_author(p, make_doc("mallory")).reason == "author-not-whitelisted"
    assert check_author(p, make_mpeg()).reason == "unparseable-document"


def test_random_authors_all_denied(reference_policy):
    cases = gen_fuzz_http(HttpTemplate(kinds=(FileKind.DOC,), vary=frozenset({"author"}), authors=("zed",)), 7, 1000)
    assert len(cases) == 1000
    denied = [check_author(reference_policy, c.message.body).action is Action.DENY for c in cases
              if c.author not in reference_policy.author_whitelist]
    assert len(denied) == 1000 and all(denied)


# -- URL filter --------------------------------------------------------------

@pytest.mark.parametrize("blocklist,target,action", [
    (["/admin.*"], "/admin/x", Action.DENY),
    ([], "/admin/x", Action.ALLOW),
    (["/admin.*"], "/Admin", Action.ALLOW),
])
def test_filter_url(policy_doc, blocklist, target, action):
    assert filter_url(make_policy(policy_doc, url_blocklist=blocklist), target).action is action


def test_evil_url_pattern_fails_closed(reference_policy):
    # the blocklisted ReDoS pattern runs on the budgeted engine, never backtracking
    d = filter_url(reference_policy, "/" + "a" * 5000)
    assert d.action is Action.DENY


def test_blocked_url_rejected_before_routing(reference_policy):
    msg = request("POST", "/admin/upload", [("Content-Type", "video/mpeg"), ("Content-Length", "4")], make_mpeg())
    outs = process_http(reference_policy, serialize_http(msg), 8085, MPEG_CLIENT)
    assert outs[0].decision == Reject(403, "url-blocked")


def test_doc_author_checked_after_routing(reference_policy):
    msg = upload(make_doc("mallory"), "application/msword")
    outs = process_http(reference_policy, serialize_http(msg), 8080, DOC_CLIENT)
    assert outs[0].decision == Reject(403, "author-not-whitelisted")


def test_garbage_is_a_single_400(reference_policy):
    outs = process_http(reference_policy, b"\x00\x01garbage", 8080, DOC_CLIENT)
    assert len(outs) == 1 and outs[0].request is None and outs[0].decision.status == 400

"""One upload, two responses: duplicated Content-Length under two policies.

The DOC client sends a POST with two Content-Length headers. The first
covers the whole body, the second only the document. A gateway that trusts
the last header treats the leftover bytes as a second request and answers
both; a strict gateway refuses the message outright.

    python3 demos/smuggling.py
"""

import json
from importlib import resources

from algsim import default_network, run_scenario
from algsim.harness import smuggling_request
from algsim.policy import policy_from_dict

print(smuggling_request("alice").decode("latin-1"))
print("-" * 60)

doc = json.loads(resources.files("algsim.data").joinpath("policy_reference.json").read_text())
net = default_network()
for mode in ("last_wins", "strict"):
    policy = policy_from_dict(dict(doc, header_mode=mode))
    result = run_scenario("S10", net, policy)
    ev = result.evidence
    print(f"{mode:<10} responses={ev['responses']}  verdict={result.verdict.value}")
    for note in ev["notes"]:
        print(f"           note: {note}")

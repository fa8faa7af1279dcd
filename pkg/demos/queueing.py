"""The gateway as a single FIFO server, in virtual time.

With a 0.6 ms service cost the gateway handles exactly 100,000 requests per
virtual minute. Below that rate every request sees the bare service time.
Above it the queue never drains and each request waits a fixed increment
longer than the one before.

    python3 demos/queueing.py
"""

import json
from importlib import resources

from algsim import default_network
from algsim.policy import policy_from_dict
from algsim.stress import request_latencies
from algsim.vnet import NS_PER_MS, deny_all_policy

net = default_network()
policy = policy_from_dict(json.loads(resources.files("algsim.data").joinpath("policy_reference.json").read_text()))

for rate in (50_000, 100_000, 150_000, 200_000):
    lat = request_latencies(net, policy, rate, count=2000)
    first, last = lat[0] / NS_PER_MS, lat[-1] / NS_PER_MS
    mean = sum(lat) / len(lat) / NS_PER_MS
    print(f"{rate:>7}/min  first {first:6.3f} ms  last {last:8.3f} ms  mean {mean:8.3f} ms")

# a request the policy denies still occupies the server
lone = request_latencies(net, deny_all_policy(), 1, count=1)
print(f"denied request latency: {lone[0] / NS_PER_MS} ms")

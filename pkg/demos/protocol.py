# coding: utf-8
# # Estimate, purify, repeat until the fidelity clears a threshold

import json

from bellcert import make_werner
from bellcert.protocol import run_protocol

log = run_protocol(make_werner(0.7), 0.01, threshold=0.95, seed=11)
print(log.decision, log.reason)
print(json.dumps(log.to_dict(), indent=1)[:1500])

# Too much noise: the fidelity falls and the run aborts.
log = run_protocol(make_werner(0.7), 0.1, threshold=0.95, seed=11)
print(log.decision, log.reason)

"""The explorer workflow over HTTP, without a browser.

Boots the analysis service in-process and replays the what-if loop the web UI
drives: load a demo instance, audit it, tighten the parity band step by step,
then merge in better information and compare program values.
"""

import json
import threading
from urllib.parse import urlencode
from urllib.request import Request, urlopen

from fairinfo.service import make_server

server = make_server(port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
host, port = server.server_address
base = f"http://{host}:{port}"
print(f"service at {base}")


def call(path, method="GET", body=None):
    data = json.dumps(body).encode() if body is not None else None
    with urlopen(Request(base + path, data=data, method=method)) as response:
        return json.loads(response.read())


session = call("/sessions", "POST", {"demo": "caution"})
sid = session["id"]
print(f"loaded demo 'caution' as session {sid}: {session['predictors']}")

audit = call(f"/sessions/{sid}/audit?predictor=z&scope=B")
print(f"group B information content: {audit['information']['content']}")

print("\nsweeping the parity band eps: 1.0 -> 0.0")
for eps in (1.0, 0.5, 0.2, 0.0):
    result = call(
        f"/sessions/{sid}/optimize",
        "POST",
        {"predictor": "z", "objective": "utility", "fairness_metric": "beta",
         "eps": eps, "t_i": -1, "tau_u": 0.7, "tau_l": 0.5},
    )
    betas = {g: round(s["beta"], 3) for g, s in result["stats"]["per_group"].items()}
    print(f"  eps={eps}: utility {result['value']:.4f}, rates {betas}")

print("\nmerge in the group indicator refined by the truth, then compare")
merged = call(f"/sessions/{sid}/merge", "POST", {"z": "z", "q": "z", "per_group": True})
print(f"derived session {merged['session']['id']} with {merged['merged_predictor']}")

query = urlencode({
    "base": "z",
    "refined": merged["merged_predictor"],
    "spec": json.dumps({"objective": "utility", "fairness_metric": "beta",
                        "eps": 0.0, "t_i": -1, "tau_u": 0.7, "tau_l": 0.5}),
})
compare = call(f"/sessions/{merged['session']['id']}/compare?{query}")
row = compare["comparisons"][0]
print(f"OPT(base) = {row['opt_base']:.4f} <= OPT(refined) = {row['opt_refined']:.4f}; "
      f"verified: {compare['ok']}")

server.shutdown()

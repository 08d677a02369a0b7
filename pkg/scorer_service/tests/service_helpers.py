"""Service-test helpers: loads the harness's published contract suite and
adapts the HTTP surface to it."""

import importlib.util
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

# The harness publishes its black-box scorer contract suite; the same checks
# must pass against this service, so load that module directly.
_SUITE_PATH = os.path.join(os.path.dirname(__file__), "..", "..", "tests", "contract_suite.py")
_spec = importlib.util.spec_from_file_location("scorer_contract_suite", _SUITE_PATH)
contract_suite = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(contract_suite)


class HttpBackend:
    """Contract-suite adapter speaking the wire contract over a test client."""

    def __init__(self, client):
        self.client = client

    def score(self, metric: str, pairs: list[dict]) -> list[float]:
        resp = self.client.post("/score", json={"metric": metric, "pairs": pairs})
        if resp.status_code != 200:
            raise contract_suite.ScorerContractError(f"HTTP {resp.status_code}: {resp.text}")
        return [float(s) for s in resp.json()["scores"]]

    def healthz(self) -> dict:
        resp = self.client.get("/healthz")
        if resp.status_code != 200:
            raise contract_suite.ScorerContractError(f"HTTP {resp.status_code}")
        return resp.json()

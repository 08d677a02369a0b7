"""HTTP surface: POST /score and GET /healthz.

Wire contract:
    POST /score  {"metric": str, "pairs": [{"src", "hyp", "refs"?}]}
                 -> {"scores": [float]}
    GET /healthz -> {"metric_names": [...], "model_versions": {...},
                     "orientation": {name: "higher"|"lower"}}

Errors: 400 unknown metric or malformed pair (the message names the offending
pair index), 413 oversized batch, 503 while models are loading, 401 when a
shared auth token is configured and missing/wrong. The service is stateless
across requests.
"""

from __future__ import annotations

import contextlib
import json
import os

from fastapi import Body, FastAPI, Header, HTTPException

from .scorers import PairScorer, build_registry

DEFAULT_MAX_BATCH = 128

MODELS_ENV = "SCORER_MODELS"  # JSON config path; default built-in lexical scorers
MAX_BATCH_ENV = "SCORER_MAX_BATCH"
AUTH_TOKEN_ENV = "SCORER_AUTH_TOKEN"


def _validate_pairs(pairs, registry_entry: PairScorer) -> None:
    if not isinstance(pairs, list) or not pairs:
        raise HTTPException(status_code=400, detail="pairs must be a non-empty list")
    for i, pair in enumerate(pairs):
        if not isinstance(pair, dict):
            raise HTTPException(status_code=400, detail=f"pair {i}: not an object")
        for key in ("src", "hyp"):
            if not isinstance(pair.get(key), str):
                raise HTTPException(status_code=400, detail=f"pair {i}: missing or non-string {key!r}")
        refs = pair.get("refs")
        if refs is not None and (
            not isinstance(refs, list) or any(not isinstance(r, str) for r in refs)
        ):
            raise HTTPException(status_code=400, detail=f"pair {i}: refs must be a list of strings")
        if registry_entry.info.kind == "ref_based" and not refs:
            raise HTTPException(
                status_code=400,
                detail=f"pair {i}: metric {registry_entry.info.name!r} requires non-empty refs",
            )


def create_app(
    config: dict | None = None,
    max_batch: int = DEFAULT_MAX_BATCH,
    auth_token: str | None = None,
) -> FastAPI:
    state = {"registry": None}

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        state["registry"] = build_registry(config)
        yield
        state["registry"] = None

    app = FastAPI(title="scorer-service", lifespan=lifespan)

    def registry() -> dict[str, PairScorer]:
        if state["registry"] is None:
            raise HTTPException(status_code=503, detail="models loading")
        return state["registry"]

    def check_auth(token: str | None) -> None:
        if auth_token is not None and token != auth_token:
            raise HTTPException(status_code=401, detail="missing or invalid auth token")

    @app.post("/score")
    def score(
        payload: dict = Body(...),
        x_auth_token: str | None = Header(default=None),
    ) -> dict:
        check_auth(x_auth_token)
        reg = registry()
        metric = payload.get("metric")
        if metric not in reg:
            raise HTTPException(status_code=400, detail=f"unknown metric {metric!r}")
        pairs = payload.get("pairs")
        if isinstance(pairs, list) and len(pairs) > max_batch:
            raise HTTPException(status_code=413, detail=f"batch of {len(pairs)} exceeds max {max_batch}")
        scorer = reg[metric]
        _validate_pairs(pairs, scorer)
        return {"scores": scorer.score_batch(pairs)}

    @app.get("/healthz")
    def healthz(x_auth_token: str | None = Header(default=None)) -> dict:
        check_auth(x_auth_token)
        reg = registry()
        return {
            "metric_names": sorted(reg),
            "model_versions": {name: s.info.version for name, s in sorted(reg.items())},
            "orientation": {
                name: "higher" if s.info.higher_better else "lower" for name, s in sorted(reg.items())
            },
        }

    return app


def app_from_env() -> FastAPI:
    config = None
    config_path = os.environ.get(MODELS_ENV)
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            config = json.load(fh)
    return create_app(
        config=config,
        max_batch=int(os.environ.get(MAX_BATCH_ENV, DEFAULT_MAX_BATCH)),
        auth_token=os.environ.get(AUTH_TOKEN_ENV),
    )


def main() -> None:
    import uvicorn

    uvicorn.run(
        app_from_env(),
        host=os.environ.get("SCORER_HOST", "127.0.0.1"),
        port=int(os.environ.get("SCORER_PORT", "8900")),
    )


if __name__ == "__main__":
    main()

"""Candidate scoring: metric identities, simulated QE, remote scorer client,
and the persistent score cache.

Selection metrics must be reference-free; the interference guard keeps the
selection metric out of the evaluation set so best-of-N gains are not inflated
by scoring and evaluating with the same model.
"""

from __future__ import annotations

import hashlib
import logging
import math
import threading
import time
from dataclasses import dataclass

import httpx
import numpy as np

from .corpus import Segment
from .errors import BackendError, ValidationError
from .generation import Candidate, CandidatePool, _seg_hash, approx_token_count
from .ioutil import append_jsonl, read_jsonl, write_jsonl

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricId:
    name: str
    kind: str  # "qe" (reference-free) or "ref_based"
    role_tags: frozenset = frozenset()
    higher_better: bool = True

    def __post_init__(self):
        if self.kind not in ("qe", "ref_based"):
            raise ValidationError(f"metric {self.name!r}: unknown kind {self.kind!r}")
        if "selection" in self.role_tags and self.kind != "qe":
            raise ValidationError(f"metric {self.name!r}: selection metrics must be reference-free (qe)")

    def oriented(self, score: float) -> float:
        return score if self.higher_better else -score


@dataclass(frozen=True)
class ScoreSet:
    seg_id: str
    metric: MetricId
    scores: dict[int, float]

    def __post_init__(self):
        for idx, s in self.scores.items():
            if not math.isfinite(s):
                raise ValidationError(f"non-finite score for {self.seg_id}/{idx} under {self.metric.name}")

    def oriented(self, idx: int) -> float:
        return self.metric.oriented(self.scores[idx])

    def require_complete(self, pool: CandidatePool) -> None:
        missing = [c.cand_idx for c in pool.candidates if c.cand_idx not in self.scores]
        if missing:
            raise ValidationError(
                f"score set {self.metric.name}/{self.seg_id} incomplete: missing {missing[:5]}"
            )


@dataclass(frozen=True)
class NoiseModel:
    """Observation noise for the simulated QE.

    Exactly one parameterization is active: ``sigma`` directly, or
    ``target_correlation`` which resolves sigma against the latent variance.
    ``rank_corrupt`` replaces a ``sigma`` fraction of scores with fresh noise.
    """

    family: str = "none"  # none | gaussian | rank_corrupt
    sigma: float = 0.0
    target_correlation: float | None = None

    def __post_init__(self):
        if self.family not in ("none", "gaussian", "rank_corrupt"):
            raise ValidationError(f"unknown noise family {self.family!r}")
        if self.sigma < 0:
            raise ValidationError("sigma must be >= 0")
        if self.target_correlation is not None:
            if not -1 <= self.target_correlation <= 1:
                raise ValidationError("target_correlation must be in [-1, 1]")
            if self.sigma != 0.0:
                raise ValidationError("give sigma or target_correlation, not both")

    def resolve_sigma(self, latent_var: float = 1.0 / 12.0) -> float:
        if self.target_correlation is None:
            return self.sigma
        rho = abs(self.target_correlation)
        if rho == 0:
            return float("inf")
        # corr(latent, latent + eps) = s_q / sqrt(s_q^2 + sigma^2)
        return math.sqrt(latent_var) * math.sqrt(1.0 / rho**2 - 1.0)


def _text_hash(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()


class ScoreCache:
    """Persistent (metric, seg_id, cand_idx, text-hash) -> score map.

    Concurrent readers are safe; writes are serialized through a lock. The
    backing JSONL file is append-only.
    """

    def __init__(self, path: str | None = None):
        self.path = path
        self._lock = threading.Lock()
        self._data: dict[tuple[str, str, int, str], float] = {}
        if path:
            try:
                for _, rec in read_jsonl(path):
                    key = (rec["metric"], rec["seg_id"], int(rec["cand_idx"]), rec["text_hash"])
                    self._data[key] = float(rec["score"])
            except FileNotFoundError:
                pass

    def get(self, metric: str, seg_id: str, cand_idx: int, text: str) -> float | None:
        return self._data.get((metric, seg_id, cand_idx, _text_hash(text)))

    def put(self, metric: str, seg_id: str, cand_idx: int, text: str, score: float) -> None:
        key = (metric, seg_id, cand_idx, _text_hash(text))
        with self._lock:
            if key in self._data:
                return
            self._data[key] = score
            if self.path:
                append_jsonl(
                    self.path,
                    [
                        {
                            "metric": metric,
                            "seg_id": seg_id,
                            "cand_idx": cand_idx,
                            "text_hash": key[3],
                            "score": score,
                        }
                    ],
                )

    def __len__(self) -> int:
        return len(self._data)


class SimulatedQEScorer:
    """Observes each candidate's latent quality through the noise model.

    Scores are pure functions of (seed, seg_id, cand_idx, noise model), so a
    rescore reproduces the exact values. Scored token length for compute
    accounting is the concatenated (source, hypothesis) length.
    """

    def __init__(self, noise: NoiseModel | None = None, seed: int = 0):
        self.noise = noise or NoiseModel()
        self.seed = seed
        self.calls = 0  # scorer-call counter, used by cache audits

    def score(self, metric: MetricId, seg: Segment, candidates: list[Candidate]) -> list[float]:
        self.calls += len(candidates)
        out = []
        sigma = self.noise.resolve_sigma()
        for c in candidates:
            if c.latent_quality is None:
                raise ValidationError(
                    f"candidate {c.seg_id}/{c.cand_idx} has no latent quality; "
                    "simulated QE only scores simulator pools"
                )
            q = c.latent_quality
            if self.noise.family == "none":
                out.append(q)
                continue
            rng = np.random.default_rng([self.seed, _seg_hash(seg.id), c.cand_idx, _seg_hash(metric.name)])
            if self.noise.family == "gaussian":
                out.append(q + sigma * float(rng.standard_normal()))
            else:  # rank_corrupt: replace a sigma-fraction with fresh uniforms
                if rng.random() < min(self.noise.sigma, 1.0):
                    out.append(float(rng.random()))
                else:
                    out.append(q)
        return out


def qe_token_length(seg: Segment, cand: Candidate) -> int:
    """Concatenated (source, hypothesis) length fed to QE compute accounting."""
    return approx_token_count(seg.src) + approx_token_count(cand.text)


class RemoteScorer:
    """Client for the scorer-service wire contract (POST /score, GET /healthz)."""

    def __init__(
        self,
        base_url: str,
        batch_size: int = 64,
        timeout: float = 120.0,
        max_retries: int = 3,
        auth_token: str | None = None,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        self.timeout = timeout
        self.max_retries = max_retries
        self.auth_token = auth_token
        self._transport = transport
        self.calls = 0

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["X-Auth-Token"] = self.auth_token
        return headers

    def _post_batch(self, metric: str, pairs: list[dict]) -> list[float]:
        delay = 1.0
        last_error = None
        with httpx.Client(transport=self._transport) as client:
            for attempt in range(self.max_retries + 1):
                try:
                    resp = client.post(
                        f"{self.base_url}/score",
                        json={"metric": metric, "pairs": pairs},
                        headers=self._headers(),
                        timeout=self.timeout,
                    )
                    if resp.status_code >= 500 or resp.status_code == 429:
                        last_error = f"HTTP {resp.status_code}"
                    else:
                        resp.raise_for_status()
                        scores = resp.json()["scores"]
                        if len(scores) != len(pairs):
                            raise BackendError(
                                f"scorer returned {len(scores)} scores for {len(pairs)} pairs"
                            )
                        return [float(s) for s in scores]
                except httpx.HTTPError as exc:
                    last_error = str(exc)
                if attempt < self.max_retries:
                    time.sleep(delay)
                    delay *= 2
        raise BackendError(f"scorer unreachable after {self.max_retries + 1} attempts: {last_error}")

    def healthz(self) -> dict:
        with httpx.Client(transport=self._transport) as client:
            resp = client.get(f"{self.base_url}/healthz", headers=self._headers(), timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()

    def score(self, metric: MetricId, seg: Segment, candidates: list[Candidate]) -> list[float]:
        refs = list(seg.refs) if metric.kind == "ref_based" else None
        pairs = [{"src": seg.src, "hyp": c.text, "refs": refs} for c in candidates]
        out: list[float] = []
        for start in range(0, len(pairs), self.batch_size):
            batch = pairs[start : start + self.batch_size]
            out.extend(self._post_batch(metric.name, batch))
            self.calls += len(batch)
        return out


def score_pool(
    pool: CandidatePool,
    seg: Segment,
    metric: MetricId,
    scorer,
    cache: ScoreCache | None = None,
) -> ScoreSet:
    """Score every candidate in the pool, consulting the cache first.

    Cache hits bypass the scorer entirely; regenerated byte-identical
    candidates are never re-scored.
    """
    if metric.kind == "ref_based" and not seg.refs:
        raise ValidationError(
            f"metric {metric.name!r} needs references but segment {seg.id!r} has none"
        )
    scores: dict[int, float] = {}
    to_score: list[Candidate] = []
    for c in pool.candidates:
        hit = cache.get(metric.name, c.seg_id, c.cand_idx, c.text) if cache is not None else None
        if hit is not None:
            scores[c.cand_idx] = hit
        else:
            to_score.append(c)
    if to_score:
        fresh = scorer.score(metric, seg, to_score)
        for c, s in zip(to_score, fresh):
            if not math.isfinite(s):
                raise ValidationError(f"scorer returned non-finite score for {c.seg_id}/{c.cand_idx}")
            scores[c.cand_idx] = float(s)
            if cache is not None:
                cache.put(metric.name, c.seg_id, c.cand_idx, c.text, float(s))
    return ScoreSet(seg_id=pool.seg_id, metric=metric, scores=scores)


def interference_guard(
    selection: MetricId,
    evaluation: list[MetricId],
    family_map: dict[str, list[str]] | None = None,
    override: bool = False,
) -> list[MetricId]:
    """Reject evaluation plans that reuse the selection metric.

    Exact name identity is a hard error unless ``override`` is set; metrics
    sharing a configured family prefix only log a warning.
    """
    for ev in evaluation:
        if ev.name == selection.name:
            if override:
                log.warning("override: evaluating with the selection metric %s", ev.name)
                continue
            raise ValidationError(
                f"evaluation metric {ev.name!r} is the selection metric; "
                "this inflates best-of-N scores (pass override to force)"
            )
        for family, prefixes in (family_map or {}).items():
            sel_in = any(selection.name.startswith(p) for p in prefixes)
            ev_in = any(ev.name.startswith(p) for p in prefixes)
            if sel_in and ev_in:
                log.warning(
                    "selection %s and evaluation %s share metric family %r; "
                    "scores may be correlated",
                    selection.name,
                    ev.name,
                    family,
                )
    return evaluation


def score_record(seg_id: str, cand_idx: int, metric: str, score: float) -> dict:
    return {"seg_id": seg_id, "cand_idx": cand_idx, "metric": metric, "score": score}


def save_scores(scoresets: list[ScoreSet], path: str) -> None:
    write_jsonl(
        path,
        (
            score_record(ss.seg_id, idx, ss.metric.name, ss.scores[idx])
            for ss in scoresets
            for idx in sorted(ss.scores)
        ),
    )


def load_scores(path: str, metrics: dict[str, MetricId]) -> dict[tuple[str, str], ScoreSet]:
    """Load scores.jsonl into {(metric name, seg_id): ScoreSet}."""
    grouped: dict[tuple[str, str], dict[int, float]] = {}
    for lineno, rec in read_jsonl(path):
        try:
            key = (rec["metric"], rec["seg_id"])
            grouped.setdefault(key, {})[int(rec["cand_idx"])] = float(rec["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}:{lineno}: bad score record: {exc}") from None
    out = {}
    for (metric_name, seg_id), scores in grouped.items():
        metric = metrics.get(metric_name)
        if metric is None:
            raise ValidationError(f"{path}: scores refer to undeclared metric {metric_name!r}")
        out[(metric_name, seg_id)] = ScoreSet(seg_id=seg_id, metric=metric, scores=scores)
    return out

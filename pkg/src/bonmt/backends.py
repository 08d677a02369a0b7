"""Generation backends: an OpenAI-compatible chat-completions client and the
simulator wrapper.

Both produce the same Candidate schema; the cost model downstream is
request-agnostic, so whether the server batches via an ``n`` parameter or we
issue n_cand sequential requests is invisible to the rest of the pipeline.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol

import httpx

from .corpus import Segment
from .errors import BackendError
from .generation import Candidate, DecodeConfig, QualityLaw, approx_token_count, simulate_candidates
from .prompts import build_prompt, prompt_text

API_KEY_ENV = "BONMT_API_KEY"


class GenerationBackend(Protocol):
    backend_id: str

    def generate(self, seg: Segment, cfg: DecodeConfig) -> list[Candidate]: ...


class SimulatorBackend:
    """Pure deterministic backend for desk-scale runs and tests."""

    backend_id = "sim"

    def __init__(self, law: QualityLaw | None = None):
        self.law = law or QualityLaw()

    def generate(self, seg: Segment, cfg: DecodeConfig) -> list[Candidate]:
        return list(simulate_candidates(seg, cfg, self.law).candidates)


@dataclass
class OpenAICompatBackend:
    """Client for servers speaking the chat-completions subset.

    Uses one request with ``n=n_cand`` when the server supports it, otherwise
    ``n_cand`` single-sample requests with bounded concurrency. Token counts
    come from the response ``usage`` when present, else from the approximate
    counter (flag surfaces in ledgers via ``approximate_usage``).
    """

    base_url: str
    model: str
    backend_id: str = ""
    supports_n: bool = True
    timeout: float = 120.0
    max_retries: int = 3
    max_in_flight: int = 8
    literal_template: bool = False
    approximate_usage: bool = False  # set True whenever usage fields were missing

    def __post_init__(self):
        if not self.backend_id:
            self.backend_id = self.model

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(API_KEY_ENV) or os.environ.get("OPENAI_API_KEY")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, client: httpx.Client, payload: dict) -> dict:
        delay = 1.0
        last_error = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = client.post(
                    f"{self.base_url.rstrip('/')}/chat/completions",
                    json=payload,
                    headers=self._headers(),
                    timeout=self.timeout,
                )
                if resp.status_code in (429,) or resp.status_code >= 500:
                    last_error = f"HTTP {resp.status_code}"
                else:
                    resp.raise_for_status()
                    return resp.json()
            except httpx.HTTPError as exc:
                last_error = str(exc)
            if attempt < self.max_retries:
                time.sleep(delay)
                delay *= 2
        raise BackendError(f"chat-completions request failed after {self.max_retries + 1} attempts: {last_error}")

    def _payload(self, messages, cfg: DecodeConfig, n: int, seed: int) -> dict:
        return {
            "model": self.model,
            "messages": messages,
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
            "n": n,
            "max_tokens": cfg.max_new_tokens,
            "seed": seed,
        }

    def generate(self, seg: Segment, cfg: DecodeConfig) -> list[Candidate]:
        messages = build_prompt(seg, literal_template=self.literal_template)
        approx_prompt = approx_token_count(prompt_text(messages))

        with httpx.Client() as client:
            if self.supports_n:
                data = self._post(client, self._payload(messages, cfg, cfg.n_cand, cfg.seed))
                batches = [(0, data)]
            else:
                def one(i: int):
                    return i, self._post(client, self._payload(messages, cfg, 1, cfg.seed + i))

                with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                    batches = list(pool.map(one, range(cfg.n_cand)))

        candidates: list[Candidate] = []
        prompt_tokens = None
        for base_idx, data in batches:
            usage = data.get("usage") or {}
            if prompt_tokens is None and "prompt_tokens" in usage:
                prompt_tokens = int(usage["prompt_tokens"])
            choices = data.get("choices", [])
            if not choices:
                raise BackendError("empty choices in chat-completions response")
            per_choice_gen = None
            if "completion_tokens" in usage and len(choices) >= 1:
                # usage reports the batch total; split evenly as an estimate
                # when n > 1, exact when n == 1.
                per_choice_gen = int(usage["completion_tokens"]) // len(choices)
            for j, choice in enumerate(choices):
                text = choice["message"]["content"]
                gen = per_choice_gen if per_choice_gen is not None else approx_token_count(text)
                if per_choice_gen is None:
                    self.approximate_usage = True
                candidates.append(
                    Candidate(
                        seg_id=seg.id,
                        cand_idx=base_idx + j,
                        text=text,
                        prompt_tokens=prompt_tokens if prompt_tokens is not None else approx_prompt,
                        gen_tokens=gen,
                        backend_id=self.backend_id,
                    )
                )
        if prompt_tokens is None:
            self.approximate_usage = True
        # prefill is paid once per segment: normalize prompt_tokens across
        # candidates to the first observed value.
        p0 = candidates[0].prompt_tokens
        candidates = [
            Candidate(
                seg_id=c.seg_id,
                cand_idx=c.cand_idx,
                text=c.text,
                prompt_tokens=p0,
                gen_tokens=c.gen_tokens,
                backend_id=c.backend_id,
                latent_quality=c.latent_quality,
            )
            for c in candidates
        ]
        return candidates

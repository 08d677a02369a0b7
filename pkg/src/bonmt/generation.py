"""Candidate generation: decode configuration, pools, and the deterministic
stochastic simulator used for desk-scale experiments.

A pool holds the full set of candidates generated once per segment; every
downstream subset size N is drawn from this pool, never regenerated.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Segment
from .errors import ValidationError
from .ioutil import append_jsonl, read_jsonl, write_jsonl
from .prompts import build_prompt, prompt_text


@dataclass(frozen=True)
class DecodeConfig:
    temperature: float = 1.0
    top_p: float = 0.95
    n_cand: int = 1
    max_new_tokens: int = 1024
    seed: int = 0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValidationError(f"temperature must be >= 0, got {self.temperature}")
        if not 0 < self.top_p <= 1:
            raise ValidationError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.n_cand < 1:
            raise ValidationError(f"n_cand must be >= 1, got {self.n_cand}")
        if self.max_new_tokens < 1:
            raise ValidationError(f"max_new_tokens must be >= 1, got {self.max_new_tokens}")


@dataclass(frozen=True)
class Candidate:
    seg_id: str
    cand_idx: int
    text: str
    prompt_tokens: int
    gen_tokens: int
    backend_id: str
    latent_quality: float | None = None

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.gen_tokens < 0:
            raise ValidationError(f"negative token count on {self.seg_id}/{self.cand_idx}")

    def truncated(self, cfg: DecodeConfig) -> bool:
        return self.gen_tokens >= cfg.max_new_tokens


@dataclass(frozen=True)
class CandidatePool:
    seg_id: str
    candidates: tuple[Candidate, ...]
    decode: DecodeConfig

    def __post_init__(self):
        if len(self.candidates) != self.decode.n_cand:
            raise ValidationError(
                f"pool {self.seg_id!r}: {len(self.candidates)} candidates, "
                f"n_cand={self.decode.n_cand}"
            )
        indices = [c.cand_idx for c in self.candidates]
        if indices != list(range(self.decode.n_cand)):
            raise ValidationError(f"pool {self.seg_id!r}: candidate indices are not 0..{self.decode.n_cand - 1}")

    def __len__(self) -> int:
        return len(self.candidates)


# CJK characters tokenize roughly one-per-character under BPE vocabularies;
# everything else is counted by whitespace words. Used only when a backend
# omits usage fields; ledgers flag such counts as approximate.
_CJK = re.compile(
    "[぀-ヿ㐀-䶿一-鿿豈-﫿가-힯]"
)


def approx_token_count(text: str) -> int:
    cjk = len(_CJK.findall(text))
    rest = _CJK.sub(" ", text)
    return cjk + len(rest.split())


def _seg_hash(seg_id: str) -> int:
    return int.from_bytes(hashlib.blake2b(seg_id.encode("utf-8"), digest_size=8).digest(), "big")


@dataclass(frozen=True)
class QualityLaw:
    """Latent-quality distribution plus text synthesis for simulated candidates.

    The latent quality is embedded in the synthesized text so a simulated QE
    can recover it; ``inject_foreign_rate`` mixes a foreign-script fragment
    into that fraction of candidates for code-switching experiments.
    """

    family: str = "uniform"  # "uniform" or "beta"
    a: float = 1.0
    b: float = 1.0
    inject_foreign_rate: float = 0.0
    foreign_text: str = (
        "监督办公室合作提供援助"
        "和建议促进安全智能政策"
        "减少重犯率系统支持"
    )

    def __post_init__(self):
        if self.family not in ("uniform", "beta"):
            raise ValidationError(f"unknown quality law {self.family!r}")
        if not 0 <= self.inject_foreign_rate <= 1:
            raise ValidationError("inject_foreign_rate must be in [0, 1]")

    def transform(self, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.family == "uniform":
            return u
        # Inverse-CDF-free beta sampling keeps scipy out of the core; the
        # uniform stream u is unused for betas but keeps stream layout fixed.
        return rng.beta(self.a, self.b, size=u.shape)


def simulate_candidates(seg: Segment, cfg: DecodeConfig, law: QualityLaw) -> CandidatePool:
    """Produce n_cand candidates with independent latent quality draws.

    Each draw is a pure function of (seed, seg_id, cand_idx): candidate i takes
    the i-th value of per-segment streams, so extending n_cand preserves the
    prefix and rerunning reproduces every candidate byte-for-byte.
    """
    h = _seg_hash(seg.id)
    rng_latent = np.random.default_rng([cfg.seed, h, 0])
    rng_aux = np.random.default_rng([cfg.seed, h, 1])
    u = rng_latent.random(cfg.n_cand)
    latents = law.transform(u, np.random.default_rng([cfg.seed, h, 2]))
    aux = rng_aux.random(cfg.n_cand)

    messages = build_prompt(seg)
    p_tokens = approx_token_count(prompt_text(messages))

    candidates = []
    for i in range(cfg.n_cand):
        q = float(latents[i])
        text = f"⟦q={q:.6f}⟧ sim translation #{i} of {seg.id}"
        if aux[i] < law.inject_foreign_rate:
            text = f"{law.foreign_text} {text}"
        candidates.append(
            Candidate(
                seg_id=seg.id,
                cand_idx=i,
                text=text,
                prompt_tokens=p_tokens,
                gen_tokens=approx_token_count(text),
                backend_id="sim",
                latent_quality=q,
            )
        )
    return CandidatePool(seg_id=seg.id, candidates=tuple(candidates), decode=cfg)


def generate_pool(seg: Segment, cfg: DecodeConfig, backend) -> CandidatePool:
    """Generate exactly n_cand independent candidates via the given backend.

    Candidates are sorted by index before assembly, so backends may complete
    requests in any order.
    """
    candidates = backend.generate(seg, cfg)
    candidates = tuple(sorted(candidates, key=lambda c: c.cand_idx))
    return CandidatePool(seg_id=seg.id, candidates=candidates, decode=cfg)


def candidate_record(c: Candidate) -> dict:
    return {
        "seg_id": c.seg_id,
        "cand_idx": c.cand_idx,
        "text": c.text,
        "prompt_tokens": c.prompt_tokens,
        "gen_tokens": c.gen_tokens,
        "backend_id": c.backend_id,
        "latent_quality": c.latent_quality,
    }


def save_pools(pools: list[CandidatePool], path: str, append: bool = False) -> None:
    records = (candidate_record(c) for pool in pools for c in pool.candidates)
    if append:
        append_jsonl(path, records)
    else:
        write_jsonl(path, records)


def load_pools(path: str, decode: DecodeConfig | None = None) -> dict[str, CandidatePool]:
    """Reload pools from candidates.jsonl, grouped by segment.

    When no decode config is given, n_cand is inferred from the pool size.
    """
    by_seg: dict[str, list[Candidate]] = {}
    for lineno, rec in read_jsonl(path):
        try:
            cand = Candidate(
                seg_id=rec["seg_id"],
                cand_idx=int(rec["cand_idx"]),
                text=rec["text"],
                prompt_tokens=int(rec["prompt_tokens"]),
                gen_tokens=int(rec["gen_tokens"]),
                backend_id=rec["backend_id"],
                latent_quality=rec.get("latent_quality"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}:{lineno}: bad candidate record: {exc}") from None
        by_seg.setdefault(cand.seg_id, []).append(cand)

    pools = {}
    for seg_id, cands in by_seg.items():
        cands.sort(key=lambda c: c.cand_idx)
        cfg = decode if decode is not None else DecodeConfig(n_cand=len(cands))
        if cfg.n_cand != len(cands):
            cfg = replace(cfg, n_cand=len(cands))
        pools[seg_id] = CandidatePool(seg_id=seg_id, candidates=tuple(cands), decode=cfg)
    return pools

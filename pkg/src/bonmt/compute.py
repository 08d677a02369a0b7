"""Inference-time compute and memory accounting.

Costs follow the 2 * params * tokens approximation: the prompt (prefill) is
paid once per segment, each candidate pays its decoded tokens, and QE pays one
encoder forward per candidate over the concatenated (source, hypothesis)
length. Attention's quadratic terms and KV-cache memory are out of scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ConfigError, ValidationError

TFLOP = 1e12
GB = 1e9

DECODER_SWIGLU = "decoder_swiglu"
ENCODER_GELU = "encoder_gelu"


@dataclass(frozen=True)
class ModelSpec:
    name: str
    family: str
    layers: int
    hidden: int
    mlp: int
    total_params: int | None = None

    def __post_init__(self):
        if self.family not in (DECODER_SWIGLU, ENCODER_GELU):
            raise ValidationError(f"model {self.name!r}: unknown family {self.family!r}")
        if min(self.layers, self.hidden, self.mlp) < 0:
            raise ValidationError(f"model {self.name!r}: negative dimensions")


@dataclass(frozen=True)
class UsageProfile:
    prompt_tokens: float  # per-segment mean
    gen_tokens: float  # per-candidate mean
    qe_tokens: float  # per-candidate mean, concatenated (src, hyp)
    n_cand: int

    def __post_init__(self):
        if min(self.prompt_tokens, self.gen_tokens, self.qe_tokens) < 0 or self.n_cand < 0:
            raise ValidationError("usage profile fields must be non-negative")


@dataclass(frozen=True)
class ComputeLedger:
    c_gen: float
    c_qe: float
    c_total: float
    per: str = "segment"
    assumptions: tuple[str, ...] = ()

    def __post_init__(self):
        if abs(self.c_total - (self.c_gen + self.c_qe)) > 1e-6 * max(1.0, self.c_total):
            raise ValidationError("c_total must equal c_gen + c_qe")

    @property
    def c_total_tflops(self) -> float:
        return self.c_total / TFLOP


def nonembed_params(spec: ModelSpec) -> int:
    """Non-embedding parameter count from the transformer shape.

    Decoder (SwiGLU, three MLP matrices): L * (4 d^2 + 3 d d_ff).
    Encoder (GELU, two MLP matrices):     L * (4 d^2 + 2 d d_ff).
    """
    if spec.family == DECODER_SWIGLU:
        return spec.layers * (4 * spec.hidden**2 + 3 * spec.hidden * spec.mlp)
    return spec.layers * (4 * spec.hidden**2 + 2 * spec.hidden * spec.mlp)


def gen_cost(spec: ModelSpec, usage: UsageProfile) -> float:
    """Generation FLOPs: 2 * N_params * (P + n_cand * T); prefill paid once."""
    if spec.family != DECODER_SWIGLU:
        raise ValidationError(f"gen_cost expects a decoder model, got {spec.family}")
    n_params = nonembed_params(spec)
    return 2.0 * n_params * (usage.prompt_tokens + usage.n_cand * usage.gen_tokens)


def qe_cost(spec: ModelSpec, usage: UsageProfile) -> float:
    """QE FLOPs: 2 * N_params * n_cand * S_qe (one forward per candidate)."""
    if spec.family != ENCODER_GELU:
        raise ValidationError(f"qe_cost expects an encoder model, got {spec.family}")
    return 2.0 * nonembed_params(spec) * usage.n_cand * usage.qe_tokens


def total_cost(
    gen_spec: ModelSpec,
    qe_spec: ModelSpec | None,
    usage: UsageProfile,
    assumptions: tuple[str, ...] = (),
) -> ComputeLedger:
    """Total per-segment ledger; omit qe_spec for QE-free (n=1 greedy) plans."""
    c_gen = gen_cost(gen_spec, usage)
    c_qe = qe_cost(qe_spec, usage) if qe_spec is not None else 0.0
    return ComputeLedger(c_gen=c_gen, c_qe=c_qe, c_total=c_gen + c_qe, assumptions=assumptions)


def memory_estimate(spec: ModelSpec, bytes_per_param: float = 2.0) -> float:
    """Weights-only footprint lower bound (no KV cache, no activations)."""
    if spec.total_params is None:
        raise ValidationError(f"model {spec.name!r} has no total_params; cannot estimate memory")
    return spec.total_params * bytes_per_param


# --- model registry (models.toml) ------------------------------------------
#
# Minimal TOML-subset reader: [table] headers plus key = string/int/float.
# The stdlib gains tomllib only in 3.11 and the registry needs nothing more.

_KEY_RE = re.compile(r"^([A-Za-z0-9_-]+)\s*=\s*(.+)$")


def _parse_value(raw: str, context: str):
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    try:
        return int(raw.replace("_", ""))
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{context}: cannot parse value {raw!r}") from None


def load_registry(path: str) -> dict[str, ModelSpec]:
    """Load the per-model shape registry.

    Per model: family, layers, hidden, mlp, optional total_params. Shipped
    example entries are desk fixtures, not published ground truth.
    """
    tables: dict[str, dict] = {}
    current: dict | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1].strip().strip('"')
                if name in tables:
                    raise ConfigError(f"{path}:{lineno}: duplicate model {name!r}")
                current = tables.setdefault(name, {})
                continue
            m = _KEY_RE.match(line)
            if not m or current is None:
                raise ConfigError(f"{path}:{lineno}: cannot parse line {line!r}")
            current[m.group(1)] = _parse_value(m.group(2), f"{path}:{lineno}")

    registry = {}
    for name, fields in tables.items():
        try:
            registry[name] = ModelSpec(
                name=name,
                family=fields["family"],
                layers=int(fields["layers"]),
                hidden=int(fields["hidden"]),
                mlp=int(fields["mlp"]),
                total_params=int(fields["total_params"]) if "total_params" in fields else None,
            )
        except KeyError as exc:
            raise ConfigError(f"{path}: model {name!r} missing key {exc}") from None
    if not registry:
        raise ConfigError(f"{path}: empty model registry")
    return registry


def flops_report_row(
    gen_spec: ModelSpec, qe_spec: ModelSpec | None, usage: UsageProfile, ledger: ComputeLedger
) -> dict:
    return {
        "model": gen_spec.name,
        "qe_model": qe_spec.name if qe_spec else "",
        "n": usage.n_cand,
        "P": usage.prompt_tokens,
        "T": usage.gen_tokens,
        "S_qe": usage.qe_tokens,
        "c_gen": ledger.c_gen,
        "c_qe": ledger.c_qe,
        "c_total_tflops": ledger.c_total_tflops,
    }

"""Scaling analyses: quality-vs-N and quality-vs-TFLOPs report assembly,
metric-interference simulation studies, and ingestion of published results
tables for re-rendering and diffing.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

import numpy as np

from .codeswitch import DEFAULT_THRESHOLD, detect
from .compute import ComputeLedger, ModelSpec, UsageProfile, total_cost
from .corpus import Dataset, LangPair
from .errors import ValidationError
from .generation import CandidatePool, QualityLaw
from .ioutil import dumps_canonical
from .scoring import MetricId, NoiseModel, ScoreSet, interference_guard, qe_token_length
from .selection import CurvePoint, subsample_curve, subsample_selections
from .textmetrics import ChrfConfig, curve_eval_corpus, default_bleu_config

CORPUS_METRICS = ("bleu", "chrfpp")

CURVE_CSV_COLUMNS = ["model", "pair", "metric", "n", "mean", "std", "draws", "tflops_per_seg"]


@dataclass(frozen=True)
class RunManifest:
    model: str
    qe_model: str
    pair: LangPair
    schedule: tuple[int, ...]
    draws: int
    selection_metric: MetricId
    eval_metrics: tuple[MetricId, ...]
    seed: int = 0

    def __post_init__(self):
        if list(self.schedule) != sorted(self.schedule):
            raise ValidationError("schedule must be sorted ascending")
        if self.draws < 1:
            raise ValidationError("draws must be >= 1")
        interference_guard(self.selection_metric, list(self.eval_metrics))

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "qe_model": self.qe_model,
            "pair": str(self.pair),
            "schedule": list(self.schedule),
            "draws": self.draws,
            "selection_metric": self.selection_metric.name,
            "eval_metrics": [m.name for m in self.eval_metrics],
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ScalingCurve:
    model: str
    pair: str
    metric: str
    points: tuple[CurvePoint, ...]


@dataclass(frozen=True)
class ScalingReport:
    manifest: RunManifest
    curves: tuple[ScalingCurve, ...]
    ledgers: dict[int, ComputeLedger]
    codeswitch_rate_by_n: dict[int, float]
    crossovers: tuple[tuple, ...] = ()

    def __post_init__(self):
        for curve in self.curves:
            for pt in curve.points:
                if pt.n not in self.ledgers:
                    raise ValidationError(f"curve point N={pt.n} has no matching compute ledger")

    def to_dict(self) -> dict:
        return {
            "manifest": self.manifest.to_dict(),
            "curves": [
                {
                    "model": c.model,
                    "pair": c.pair,
                    "metric": c.metric,
                    "points": [
                        {"n": p.n, "mean": p.mean, "std": p.std, "draws": p.n_draws}
                        for p in c.points
                    ],
                }
                for c in self.curves
            ],
            "ledgers": [
                {
                    "n": n,
                    "c_gen": ledger.c_gen,
                    "c_qe": ledger.c_qe,
                    "c_total": ledger.c_total,
                    "tflops_per_seg": ledger.c_total_tflops,
                    "assumptions": list(ledger.assumptions),
                }
                for n, ledger in sorted(self.ledgers.items())
            ],
            "codeswitch_rate_by_n": {str(n): r for n, r in sorted(self.codeswitch_rate_by_n.items())},
            "crossovers": [list(c) for c in self.crossovers],
        }

    def to_json(self) -> str:
        return dumps_canonical(self.to_dict()) + "\n"

    def curve_csv(self) -> str:
        lines = [",".join(CURVE_CSV_COLUMNS)]
        for c in self.curves:
            for p in c.points:
                tf = self.ledgers[p.n].c_total_tflops
                lines.append(
                    f"{c.model},{c.pair},{c.metric},{p.n},{p.mean:.6f},{p.std:.6f},{p.n_draws},{tf:.9g}"
                )
        return "\n".join(lines) + "\n"


def measure_usage(dataset: Dataset, pools: dict[str, CandidatePool], n_cand: int) -> UsageProfile:
    """Usage profile averaged from generated pools (the 'measured' route)."""
    if not pools:
        raise ValidationError("no pools to measure")
    prompt = np.mean([pool.candidates[0].prompt_tokens for pool in pools.values()])
    gen = np.mean([c.gen_tokens for pool in pools.values() for c in pool.candidates])
    qe = np.mean(
        [qe_token_length(dataset.get(sid), c) for sid, pool in pools.items() for c in pool.candidates]
    )
    return UsageProfile(prompt_tokens=float(prompt), gen_tokens=float(gen), qe_tokens=float(qe), n_cand=n_cand)


def build_report(
    manifest: RunManifest,
    dataset: Dataset,
    pools: dict[str, CandidatePool],
    scoresets: dict[tuple[str, str], ScoreSet],
    registry: dict[str, ModelSpec],
    codeswitch_threshold: float = DEFAULT_THRESHOLD,
) -> ScalingReport:
    """Assemble curves, compute ledgers, and code-switch rates for one run.

    Segment-level metrics go through the subsample estimator; corpus metrics
    (BLEU, chrF++) are recomputed per draw over the selected hypotheses.
    """
    seg_ids = sorted(pools)
    if not seg_ids:
        raise ValidationError("no candidate pools")
    for sid in seg_ids:
        dataset.get(sid)
    pool_size = len(pools[seg_ids[0]])
    for n in manifest.schedule:
        if n > pool_size:
            raise ValidationError(f"schedule entry N={n} exceeds pool size {pool_size}")

    sel_name = manifest.selection_metric.name
    sel_scores = {}
    for sid in seg_ids:
        key = (sel_name, sid)
        if key not in scoresets:
            raise ValidationError(f"missing selection scores for segment {sid!r}")
        scoresets[key].require_complete(pools[sid])
        sel_scores[sid] = scoresets[key]

    # selections per (n, draw), shared by corpus metrics and code-switch rates
    selections = {
        n: {sid: subsample_selections(sel_scores[sid], n, manifest.draws, manifest.seed) for sid in seg_ids}
        for n in manifest.schedule
    }

    curves = []
    for metric in manifest.eval_metrics:
        if metric.name in CORPUS_METRICS:
            refs = {sid: list(dataset.get(sid).refs) for sid in seg_ids}
            bleu_cfg = default_bleu_config(manifest.pair.tgt)
            points = []
            for n in manifest.schedule:
                n_draws = len(next(iter(selections[n].values())))
                per_draw = [
                    {sid: pools[sid].candidates[selections[n][sid][d].chosen_idx].text for sid in seg_ids}
                    for d in range(n_draws)
                ]
                points.append(
                    curve_eval_corpus(
                        per_draw, refs, metric.name, n, bleu_cfg=bleu_cfg, chrf_cfg=ChrfConfig()
                    )
                )
        else:
            eval_scores = {}
            for sid in seg_ids:
                key = (metric.name, sid)
                if key not in scoresets:
                    raise ValidationError(f"missing {metric.name!r} scores for segment {sid!r}")
                scoresets[key].require_complete(pools[sid])
                eval_scores[sid] = scoresets[key]
            points = subsample_curve(
                sel_scores, eval_scores, list(manifest.schedule), manifest.draws, manifest.seed
            )
        curves.append(
            ScalingCurve(
                model=manifest.model, pair=str(manifest.pair), metric=metric.name, points=tuple(points)
            )
        )

    gen_spec = registry.get(manifest.model)
    qe_spec = registry.get(manifest.qe_model)
    if gen_spec is None or qe_spec is None:
        raise ValidationError(
            f"model registry is missing {manifest.model!r} or {manifest.qe_model!r}"
        )
    assumptions = ("usage: measured from pools", "token counts approximate")
    ledgers = {}
    for n in manifest.schedule:
        usage = measure_usage(dataset, pools, n)
        ledgers[n] = total_cost(gen_spec, qe_spec, usage, assumptions=assumptions)

    cs_rates = {}
    for n in manifest.schedule:
        flagged = 0
        total = 0
        for sid in seg_ids:
            for r in selections[n][sid]:
                text = pools[sid].candidates[r.chosen_idx].text
                flagged += detect(text, manifest.pair.tgt, codeswitch_threshold).flagged
                total += 1
        cs_rates[n] = flagged / total

    return ScalingReport(
        manifest=manifest,
        curves=tuple(curves),
        ledgers=ledgers,
        codeswitch_rate_by_n=cs_rates,
    )


def find_crossovers(
    curves: dict[str, list[CurvePoint]],
) -> list[tuple[str, str, int]]:
    """Smallest N at which model A's best-of-N mean reaches model B's N=1 mean.

    Returns (model_a, model_b, n) triples; one metric per call.
    """
    out = []
    for b, b_points in curves.items():
        base = next((p.mean for p in b_points if p.n == 1), None)
        if base is None:
            continue
        for a, a_points in curves.items():
            if a == b:
                continue
            for p in sorted(a_points, key=lambda p: p.n):
                if p.mean >= base:
                    out.append((a, b, p.n))
                    break
    return sorted(out)


# --- interference simulation studies ---------------------------------------

EVAL_MODES = ("same_as_selection", "independent", "correlated")


def interference_study(
    law: QualityLaw,
    sel_noise: NoiseModel,
    eval_mode: str,
    schedule: list[int],
    trials: int,
    seed: int = 0,
    rho: float = 0.0,
) -> dict[str, list[tuple[int, float]]]:
    """Mean evaluation quality of best-of-N per N, under the requested eval
    mode and (for reference) under self-evaluation.

    Desk-scale bulk simulation: trials x N latent matrices per schedule entry.
    Self-evaluation must dominate an independent evaluation for N >= 2; an
    uncorrelated eval stays flat at the population mean. ``correlated`` mixes
    eval = rho * latent + (1 - rho) * independent noise (rho=1 reduces to
    self-evaluation, rho=0 to independence).
    """
    if eval_mode not in EVAL_MODES:
        raise ValidationError(f"unknown eval mode {eval_mode!r}")
    if law.family != "uniform":
        raise ValidationError("interference studies run on the uniform law")
    rng = np.random.default_rng(seed)
    sigma = sel_noise.resolve_sigma()
    curves: dict[str, list[tuple[int, float]]] = {"same_as_selection": [], eval_mode: []}
    for n in schedule:
        latents = rng.random((trials, n))
        if sel_noise.family == "none":
            sel = latents
        elif sel_noise.family == "gaussian":
            sel = latents + sigma * rng.standard_normal((trials, n))
        else:  # rank_corrupt
            mask = rng.random((trials, n)) < min(sel_noise.sigma, 1.0)
            sel = np.where(mask, rng.random((trials, n)), latents)
        chosen = np.argmax(sel, axis=1)
        rows = np.arange(trials)
        self_eval = latents[rows, chosen]
        curves["same_as_selection"].append((n, float(self_eval.mean())))
        if eval_mode == "same_as_selection":
            continue
        if eval_mode == "independent":
            other = rng.random((trials, n))
        else:
            other = rho * latents + (1 - rho) * rng.random((trials, n))
        curves[eval_mode].append((n, float(other[rows, chosen].mean())))
    return curves


# --- results ingestion ------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    model: str
    pair: str
    metric: str
    n: int
    mean: str  # kept as the source string so deltas use the published precision
    raw: str

    @property
    def mean_value(self) -> float:
        return float(self.mean)


@dataclass(frozen=True)
class ResultsTable:
    raw_text: str
    rows: tuple[ResultRow, ...]

    def lookup(self, model: str, pair: str, metric: str, n: int) -> ResultRow:
        for row in self.rows:
            if (row.model, row.pair, row.metric, row.n) == (model, pair, metric, n):
                return row
        raise ValidationError(f"no row for {model}/{pair}/{metric}/N={n}")

    def export(self) -> str:
        """Byte-identical round trip of the ingested file."""
        return self.raw_text

    def delta(self, model: str, pair: str, metric: str, n_from: int, n_to: int) -> str:
        """Signed delta rendered at the precision of the published numbers."""
        a = Decimal(self.lookup(model, pair, metric, n_from).mean)
        b = Decimal(self.lookup(model, pair, metric, n_to).mean)
        return f"{b - a:+}"


def ingest_results(path: str) -> ResultsTable:
    """Load a curve.csv-schema results table, keeping raw bytes for export."""
    with open(path, encoding="utf-8") as fh:
        raw_text = fh.read()
    lines = raw_text.splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty results file")
    header = lines[0].split(",")
    if header != CURVE_CSV_COLUMNS:
        raise ValidationError(
            f"{path}:1: bad header {lines[0]!r}; expected {','.join(CURVE_CSV_COLUMNS)}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != len(CURVE_CSV_COLUMNS):
            raise ValidationError(
                f"{path}:{lineno}: {len(fields)} columns, expected {len(CURVE_CSV_COLUMNS)}"
            )
        model, pair, metric, n, mean = fields[:5]
        try:
            n_val = int(n)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: column 'n': not an integer: {n!r}") from None
        try:
            float(mean)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: column 'mean': not a number: {mean!r}") from None
        rows.append(ResultRow(model=model, pair=pair, metric=metric, n=n_val, mean=mean, raw=line))
    return ResultsTable(raw_text=raw_text, rows=tuple(rows))


def diff_results(ours: ResultsTable, theirs: ResultsTable, tol: float = 0.0) -> list[str]:
    """Line-oriented diff per (model, pair, metric, n) key: key, ours, theirs, delta."""
    theirs_by_key = {(r.model, r.pair, r.metric, r.n): r for r in theirs.rows}
    lines = []
    for row in ours.rows:
        key = (row.model, row.pair, row.metric, row.n)
        other = theirs_by_key.pop(key, None)
        key_str = f"{row.model}/{row.pair}/{row.metric}/N={row.n}"
        if other is None:
            lines.append(f"{key_str}\t{row.mean}\t<missing>\t")
        elif abs(row.mean_value - other.mean_value) > tol:
            delta = row.mean_value - other.mean_value
            lines.append(f"{key_str}\t{row.mean}\t{other.mean}\t{delta:+.6g}")
    for key, other in sorted(theirs_by_key.items()):
        key_str = f"{other.model}/{other.pair}/{other.metric}/N={other.n}"
        lines.append(f"{key_str}\t<missing>\t{other.mean}\t")
    return lines

"""Command-line entry point.

Pipeline stages communicate only through the documented JSONL/CSV files, so
any stage can be rerun or replaced by external tooling. Outputs are written
atomically; reruns with identical inputs are byte-identical.

Exit codes: 0 success, 2 usage, 3 validation failure, 4 backend failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analysis, codeswitch, compute, scoring, selection
from .backends import OpenAICompatBackend, SimulatorBackend
from .corpus import LangPair, load_dataset
from .errors import BackendError, HarnessError, ValidationError
from .generation import DecodeConfig, QualityLaw, generate_pool, load_pools, save_pools
from .ioutil import atomic_write_text, write_jsonl


def _metric_from_spec(spec: str, role: str) -> scoring.MetricId:
    """Parse 'name[:kind][:lower]' metric specs from the command line."""
    parts = spec.split(":")
    name = parts[0]
    kind = "qe"
    higher = True
    for part in parts[1:]:
        if part in ("qe", "ref_based"):
            kind = part
        elif part == "lower":
            higher = False
        elif part == "higher":
            higher = True
        else:
            raise ValidationError(f"bad metric spec {spec!r}: unknown token {part!r}")
    if name in analysis.CORPUS_METRICS:
        kind = "ref_based"
    tags = frozenset({role}) if role else frozenset()
    return scoring.MetricId(name=name, kind=kind, role_tags=tags, higher_better=higher)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path!r}: {exc}") from None


def _open_dataset(path: str):
    try:
        return load_dataset(path)
    except OSError as exc:
        raise ValidationError(f"cannot read dataset {path!r}: {exc}") from None


def _open_pools(path: str, decode=None):
    try:
        return load_pools(path, decode)
    except OSError as exc:
        raise ValidationError(f"cannot read candidates {path!r}: {exc}") from None


def _open_scores(path: str, metrics: dict[str, scoring.MetricId]):
    try:
        return scoring.load_scores(path, metrics)
    except OSError as exc:
        raise ValidationError(f"cannot read scores {path!r}: {exc}") from None


def _law_from_args(args) -> QualityLaw:
    return QualityLaw(
        family=args.law,
        a=args.law_a,
        b=args.law_b,
        inject_foreign_rate=args.inject_foreign_rate,
    )


def _add_law_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--law", default="uniform", choices=["uniform", "beta"], help="latent quality law (default: uniform)")
    p.add_argument("--law-a", type=float, default=1.0, help="beta law alpha (default: 1.0)")
    p.add_argument("--law-b", type=float, default=1.0, help="beta law beta (default: 1.0)")
    p.add_argument(
        "--inject-foreign-rate",
        type=float,
        default=0.0,
        help="fraction of candidates receiving foreign-script text (default: 0.0)",
    )


def _noise_from_args(args) -> scoring.NoiseModel:
    return scoring.NoiseModel(family=args.noise, sigma=args.sigma)


# --- commands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    ds = _open_dataset(args.dataset)
    cfg = DecodeConfig(
        temperature=args.temperature,
        top_p=args.top_p,
        n_cand=args.n,
        max_new_tokens=args.max_new_tokens,
        seed=args.seed,
    )
    if args.backend == "sim":
        backend = SimulatorBackend(_law_from_args(args))
    else:
        if not args.base_url or not args.model:
            raise ValidationError("http backend needs --base-url and --model")
        backend = OpenAICompatBackend(base_url=args.base_url, model=args.model)
    segments = ds.segments
    if args.pair:
        pair = LangPair.parse(args.pair)
        segments = tuple(s for s in segments if s.pair == pair)
    pools = [generate_pool(seg, cfg, backend) for seg in segments]
    save_pools(pools, args.out, append=args.append)
    print(f"wrote {sum(len(p) for p in pools)} candidates for {len(pools)} segments to {args.out}")
    return 0


def cmd_score(args) -> int:
    ds = _open_dataset(args.dataset)
    pools = _open_pools(args.candidates)
    metric = _metric_from_spec(args.metric, role="")
    if args.scorer == "sim":
        scorer = scoring.SimulatedQEScorer(noise=_noise_from_args(args), seed=args.seed)
    else:
        if not args.base_url:
            raise ValidationError("remote scorer needs --base-url")
        scorer = scoring.RemoteScorer(args.base_url, batch_size=args.batch_size)
    cache = scoring.ScoreCache(args.cache) if args.cache else None
    scoresets = [
        scoring.score_pool(pool, ds.get(seg_id), metric, scorer, cache)
        for seg_id, pool in sorted(pools.items())
    ]
    scoring.save_scores(scoresets, args.out)
    print(f"scored {sum(len(s.scores) for s in scoresets)} candidates with {metric.name}")
    return 0


def cmd_select(args) -> int:
    pools = _open_pools(args.candidates)
    metric = _metric_from_spec(args.metric, role="selection")
    scores = _open_scores(args.scores, {metric.name: metric})
    records = []
    for seg_id, pool in sorted(pools.items()):
        key = (metric.name, seg_id)
        if key not in scores:
            raise ValidationError(f"no {metric.name!r} scores for segment {seg_id!r}")
        scores[key].require_complete(pool)
        result = selection.best_of_n(scores[key], [c.cand_idx for c in pool.candidates])
        records.append(selection.selection_record(result))
    write_jsonl(args.out, records)
    print(f"selected {len(records)} translations to {args.out}")
    return 0


def _build_report_from_args(args) -> analysis.ScalingReport:
    ds = _open_dataset(args.dataset)
    pools = _open_pools(args.candidates)
    sel_metric = _metric_from_spec(args.selection_metric, role="selection")
    eval_metrics = tuple(_metric_from_spec(s, role="evaluation") for s in args.eval_metric)
    metrics = {m.name: m for m in (sel_metric, *eval_metrics)}
    scores = {}
    for path in args.scores:
        scores.update(_open_scores(path, metrics))
    registry = compute.load_registry(args.registry)
    manifest = analysis.RunManifest(
        model=args.model,
        qe_model=args.qe_model,
        pair=LangPair.parse(args.pair),
        schedule=tuple(args.schedule),
        draws=args.draws,
        selection_metric=sel_metric,
        eval_metrics=eval_metrics,
        seed=args.seed,
    )
    return analysis.build_report(manifest, ds, pools, scores, registry)


def cmd_curve(args) -> int:
    report = _build_report_from_args(args)
    atomic_write_text(args.out, report.curve_csv())
    print(f"wrote {args.out}")
    return 0


def cmd_report(args) -> int:
    report = _build_report_from_args(args)
    atomic_write_text(args.out, report.to_json())
    if args.curve_out:
        atomic_write_text(args.curve_out, report.curve_csv())
    print(f"wrote {args.out}")
    return 0


def cmd_flops(args) -> int:
    registry = compute.load_registry(args.registry)
    try:
        gen_spec = registry[args.model]
        qe_spec = registry[args.qe] if args.qe else None
    except KeyError as exc:
        raise ValidationError(f"model {exc} not in registry {args.registry!r}") from None
    usage = compute.UsageProfile(
        prompt_tokens=args.P, gen_tokens=args.T, qe_tokens=args.Sqe, n_cand=args.n
    )
    ledger = compute.total_cost(gen_spec, qe_spec, usage, assumptions=("usage: declared",))
    for key, val in (("c_gen", ledger.c_gen), ("c_qe", ledger.c_qe), ("c_total", ledger.c_total)):
        print(f"{key} {val:.0f}" if val == int(val) else f"{key} {val}")
    print(f"c_total_tflops {ledger.c_total_tflops:.9g}")
    return 0


def cmd_mem(args) -> int:
    registry = compute.load_registry(args.registry)
    try:
        spec = registry[args.model]
    except KeyError:
        raise ValidationError(f"model {args.model!r} not in registry") from None
    estimate = compute.memory_estimate(spec, args.bytes_per_param)
    print(f"weights_bytes {estimate:.0f}")
    print(f"weights_gb {estimate / compute.GB:g}")
    print("note weights-only lower bound (excludes KV cache and activations)")
    return 0


def cmd_detect_cs(args) -> int:
    pools = _open_pools(args.candidates)
    records = []
    for seg_id, pool in sorted(pools.items()):
        for c in pool.candidates:
            verdict = codeswitch.detect(c.text, args.tgt_lang, args.threshold)
            records.append(codeswitch.verdict_record(seg_id, c.cand_idx, verdict))
    write_jsonl(args.out, records)
    flagged = sum(1 for r in records if r["flagged"])
    print(f"flagged {flagged}/{len(records)} candidates")
    return 0


def cmd_ingest(args) -> int:
    try:
        table = analysis.ingest_results(args.results)
    except OSError as exc:
        raise ValidationError(f"cannot read results {args.results!r}: {exc}") from None
    if args.export:
        atomic_write_text(args.export, table.export())
    if args.delta:
        model, pair, metric, n_from, n_to = args.delta
        print(f"{model} {pair} {metric} N={n_from}->N={n_to}: "
              f"{table.delta(model, pair, metric, int(n_from), int(n_to))}")
    print(f"ingested {len(table.rows)} rows")
    return 0


def cmd_diff(args) -> int:
    try:
        ours = analysis.ingest_results(args.ours)
        theirs = analysis.ingest_results(args.theirs)
    except OSError as exc:
        raise ValidationError(f"cannot read results file: {exc}") from None
    lines = analysis.diff_results(ours, theirs, tol=args.tol)
    for line in lines:
        print(line)
    print(f"{len(lines)} differing keys")
    return 0


def cmd_simulate(args) -> int:
    """Full simulator pipeline: gen -> score -> select -> curve -> report."""
    import os

    ds = _open_dataset(args.dataset)
    os.makedirs(args.out_dir, exist_ok=True)
    out = lambda name: os.path.join(args.out_dir, name)

    cfg = DecodeConfig(n_cand=args.n, seed=args.seed)
    backend = SimulatorBackend(_law_from_args(args))
    pools_list = [generate_pool(seg, cfg, backend) for seg in ds.segments]
    save_pools(pools_list, out("candidates.jsonl"))
    pools = {p.seg_id: p for p in pools_list}

    sel_metric = scoring.MetricId("qe-sim", "qe", frozenset({"selection"}))
    eval_metric = scoring.MetricId("eval-sim", "qe", frozenset({"evaluation"}))
    sel_scorer = scoring.SimulatedQEScorer(noise=_noise_from_args(args), seed=args.seed)
    eval_scorer = scoring.SimulatedQEScorer(noise=scoring.NoiseModel(), seed=args.seed)
    scoresets = {}
    all_sets = []
    for seg_id in sorted(pools):
        for metric, scorer in ((sel_metric, sel_scorer), (eval_metric, eval_scorer)):
            ss = scoring.score_pool(pools[seg_id], ds.get(seg_id), metric, scorer)
            scoresets[(metric.name, seg_id)] = ss
            all_sets.append(ss)
    scoring.save_scores(all_sets, out("scores.jsonl"))

    records = []
    for seg_id in sorted(pools):
        result = selection.best_of_n(
            scoresets[(sel_metric.name, seg_id)], list(range(len(pools[seg_id])))
        )
        records.append(selection.selection_record(result))
    write_jsonl(out("selections.jsonl"), records)

    registry = compute.load_registry(args.registry)
    schedule = tuple(n for n in args.schedule if n <= args.n)
    tgt = ds.segments[0].pair.tgt
    manifest = analysis.RunManifest(
        model=args.model,
        qe_model=args.qe_model,
        pair=ds.segments[0].pair,
        schedule=schedule,
        draws=args.draws,
        selection_metric=sel_metric,
        eval_metrics=(eval_metric,),
        seed=args.seed,
    )
    report = analysis.build_report(manifest, ds, pools, scoresets, registry)
    atomic_write_text(out("report.json"), report.to_json())
    atomic_write_text(out("curve.csv"), report.curve_csv())

    cs_records = []
    for seg_id in sorted(pools):
        for c in pools[seg_id].candidates:
            verdict = codeswitch.detect(c.text, tgt)
            cs_records.append(codeswitch.verdict_record(seg_id, c.cand_idx, verdict))
    write_jsonl(out("codeswitch.jsonl"), cs_records)
    print(f"simulated pipeline complete in {args.out_dir}")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bonmt",
        description="Best-of-N test-time-scaling harness for machine translation.",
    )
    parser.add_argument("--config", default=None, help="JSON config file (default: none)")
    parser.add_argument("-v", "--verbose", action="store_true", help="verbose logging (default: off)")
    parser.add_argument("--jobs", type=int, default=8, help="max parallel workers (default: 8)")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("gen", help="generate candidate pools")
    p.add_argument("--dataset", required=True, help="segments.jsonl input")
    p.add_argument("--backend", choices=["sim", "http"], default="sim", help="generation backend (default: sim)")
    p.add_argument("--n", type=int, default=1, help="candidates per segment (default: 1)")
    p.add_argument("--seed", type=int, default=0, help="decode seed (default: 0)")
    p.add_argument("--temperature", type=float, default=1.0, help="sampling temperature (default: 1.0)")
    p.add_argument("--top-p", type=float, default=0.95, help="nucleus sampling p (default: 0.95)")
    p.add_argument("--max-new-tokens", type=int, default=1024, help="generation cap (default: 1024)")
    p.add_argument("--pair", default=None, help="restrict to one language pair, e.g. en-is (default: all)")
    p.add_argument("--base-url", default=None, help="http backend base URL (default: none)")
    p.add_argument("--model", default=None, help="http backend model name (default: none)")
    p.add_argument("--append", action="store_true", help="append to existing candidates file (default: off)")
    p.add_argument("--out", required=True, help="candidates.jsonl output")
    _add_law_args(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("score", help="score candidates with a QE or evaluation metric")
    p.add_argument("--dataset", required=True, help="segments.jsonl input")
    p.add_argument("--candidates", required=True, help="candidates.jsonl input")
    p.add_argument("--metric", required=True, help="metric spec name[:kind][:lower]")
    p.add_argument("--scorer", choices=["sim", "remote"], default="sim", help="scorer backend (default: sim)")
    p.add_argument("--noise", choices=["none", "gaussian", "rank_corrupt"], default="none", help="simulated QE noise (default: none)")
    p.add_argument("--sigma", type=float, default=0.0, help="noise sigma (default: 0.0)")
    p.add_argument("--seed", type=int, default=0, help="noise seed (default: 0)")
    p.add_argument("--base-url", default=None, help="remote scorer base URL (default: none)")
    p.add_argument("--batch-size", type=int, default=64, help="remote scoring batch size (default: 64)")
    p.add_argument("--cache", default=None, help="score cache JSONL path (default: no cache)")
    p.add_argument("--out", required=True, help="scores.jsonl output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("select", help="full-pool best-of-N selection per segment")
    p.add_argument("--candidates", required=True, help="candidates.jsonl input")
    p.add_argument("--scores", required=True, help="scores.jsonl input")
    p.add_argument("--metric", default="qe-sim", help="selection metric name (default: qe-sim)")
    p.add_argument("--out", required=True, help="selections.jsonl output")
    p.set_defaults(func=cmd_select)

    def add_report_args(p):
        p.add_argument("--dataset", required=True, help="segments.jsonl input")
        p.add_argument("--candidates", required=True, help="candidates.jsonl input")
        p.add_argument("--scores", action="append", required=True, help="scores.jsonl input (repeatable)")
        p.add_argument("--selection-metric", required=True, help="selection metric spec")
        p.add_argument("--eval-metric", action="append", required=True, help="evaluation metric spec (repeatable)")
        p.add_argument("--registry", required=True, help="models.toml registry path")
        p.add_argument("--model", required=True, help="generator model name")
        p.add_argument("--qe-model", required=True, help="QE model name")
        p.add_argument("--pair", required=True, help="language pair, e.g. en-zh")
        p.add_argument("--schedule", type=int, nargs="+", default=selection.DEFAULT_SCHEDULE, help="N schedule (default: powers of two 1..1024)")
        p.add_argument("--draws", type=int, default=5, help="subsample draws per N (default: 5)")
        p.add_argument("--seed", type=int, default=0, help="subsampling seed (default: 0)")

    p = sub.add_parser("curve", help="quality-vs-N curve as curve.csv")
    add_report_args(p)
    p.add_argument("--out", required=True, help="curve.csv output")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("report", help="full scaling report as report.json")
    add_report_args(p)
    p.add_argument("--out", required=True, help="report.json output")
    p.add_argument("--curve-out", default=None, help="also write curve.csv here (default: off)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("flops", help="compute ledger for one (model, N) point")
    p.add_argument("--registry", required=True, help="models.toml registry path")
    p.add_argument("--model", required=True, help="generator model name")
    p.add_argument("--qe", default=None, help="QE model name (default: no QE cost)")
    p.add_argument("--P", type=float, required=True, help="prompt tokens per segment")
    p.add_argument("--T", type=float, required=True, help="generated tokens per candidate")
    p.add_argument("--Sqe", type=float, default=0.0, help="QE tokens per candidate (default: 0)")
    p.add_argument("--n", type=int, required=True, help="number of candidates")
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("mem", help="weights-only memory estimate")
    p.add_argument("--registry", required=True, help="models.toml registry path")
    p.add_argument("--model", required=True, help="model name")
    p.add_argument("--bytes-per-param", type=float, default=2.0, help="bytes per parameter (default: 2.0, bf16)")
    p.set_defaults(func=cmd_mem)

    p = sub.add_parser("detect-cs", help="code-switch detection over candidates")
    p.add_argument("--candidates", required=True, help="candidates.jsonl input")
    p.add_argument("--tgt-lang", required=True, help="target language code")
    p.add_argument("--threshold", type=float, default=codeswitch.DEFAULT_THRESHOLD, help="foreign-ratio threshold (default: 0.30)")
    p.add_argument("--out", required=True, help="codeswitch.jsonl output")
    p.set_defaults(func=cmd_detect_cs)

    p = sub.add_parser("simulate", help="end-to-end simulator pipeline")
    p.add_argument("--dataset", required=True, help="segments.jsonl input")
    p.add_argument("--n", type=int, default=16, help="pool size per segment (default: 16)")
    p.add_argument("--seed", type=int, default=0, help="pipeline seed (default: 0)")
    p.add_argument("--noise", choices=["none", "gaussian", "rank_corrupt"], default="none", help="selection QE noise (default: none)")
    p.add_argument("--sigma", type=float, default=0.0, help="noise sigma (default: 0.0)")
    p.add_argument("--schedule", type=int, nargs="+", default=selection.DEFAULT_SCHEDULE, help="N schedule (default: powers of two 1..1024)")
    p.add_argument("--draws", type=int, default=5, help="subsample draws per N (default: 5)")
    p.add_argument("--registry", required=True, help="models.toml registry path")
    p.add_argument("--model", default="toy-dec", help="generator registry entry (default: toy-dec)")
    p.add_argument("--qe-model", default="toy-enc", help="QE registry entry (default: toy-enc)")
    p.add_argument("--out-dir", required=True, help="output directory")
    _add_law_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="load a published results table")
    p.add_argument("--results", required=True, help="results CSV (curve.csv schema)")
    p.add_argument("--export", default=None, help="re-export path, byte-identical (default: off)")
    p.add_argument("--delta", nargs=5, metavar=("MODEL", "PAIR", "METRIC", "N_FROM", "N_TO"), default=None, help="render one delta (default: off)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("diff", help="diff two results tables")
    p.add_argument("--ours", required=True, help="our curve.csv")
    p.add_argument("--theirs", required=True, help="their curve.csv")
    p.add_argument("--tol", type=float, default=0.0, help="absolute tolerance (default: 0.0)")
    p.set_defaults(func=cmd_diff)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    if args.verbose:
        import logging

        logging.basicConfig(level=logging.INFO)
    try:
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write(f"validation: {exc}\n")
        return 3
    except BackendError as exc:
        sys.stderr.write(f"backend: {exc}\n")
        return 4
    except HarnessError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Best-of-N selection and the quality-vs-N subsample estimator.

The estimator draws repeated uniform subsets from one fixed candidate pool;
``expected_bon_exact`` is the closed-form oracle it must converge to: ranking
candidates by selection score, the rank-k candidate wins a uniform size-n
subset with probability C(M-k, n-1) / C(M, n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .generation import Candidate, CandidatePool, _seg_hash
from .scoring import ScoreSet

DEFAULT_SCHEDULE = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]


@dataclass(frozen=True)
class SelectionResult:
    seg_id: str
    n: int
    chosen_idx: int
    chosen_score: float
    draw_id: int = 0


@dataclass(frozen=True)
class CurvePoint:
    n: int
    metric: str
    mean: float
    std: float
    n_draws: int

    def __post_init__(self):
        if self.std < 0:
            raise ValidationError("std must be >= 0")


def best_of_n(scores: ScoreSet, subset: list[int], draw_id: int = 0) -> SelectionResult:
    """Argmax of the oriented selection score over the subset.

    Ties break deterministically to the lowest candidate index.
    """
    if not subset:
        raise ValidationError("best_of_n: empty subset")
    missing = [i for i in subset if i not in scores.scores]
    if missing:
        raise ValidationError(f"best_of_n: unscored candidate indices {missing[:5]}")
    best_idx = None
    best_val = -math.inf
    for idx in sorted(subset):
        val = scores.oriented(idx)
        if val > best_val:
            best_val = val
            best_idx = idx
    return SelectionResult(
        seg_id=scores.seg_id,
        n=len(subset),
        chosen_idx=best_idx,
        chosen_score=scores.scores[best_idx],
        draw_id=draw_id,
    )


def select_final(pool: CandidatePool, scores: ScoreSet) -> Candidate:
    """Production selection: best-of-N over the full pool."""
    scores.require_complete(pool)
    result = best_of_n(scores, [c.cand_idx for c in pool.candidates])
    return pool.candidates[result.chosen_idx]


def rank_top_probabilities(m: int, n: int, exact: bool = False):
    """P(rank-k candidate is the subset maximum), k = 1..m.

    Exact big-integer arithmetic throughout; ``exact=True`` returns Fractions
    instead of floats (Fraction -> float stays correct even when the binomials
    overflow IEEE range).
    """
    if not 1 <= n <= m:
        raise ValidationError(f"need 1 <= n <= m, got n={n}, m={m}")
    denom = math.comb(m, n)
    probs = [Fraction(math.comb(m - k, n - 1), denom) for k in range(1, m + 1)]
    return probs if exact else [float(p) for p in probs]


def expected_bon_exact(sel: ScoreSet, ev: ScoreSet, n: int) -> float:
    """Exact expected evaluation score of best-of-n over uniform subsets."""
    indices = sorted(sel.scores)
    m = len(indices)
    if n > m:
        raise ValidationError(f"n={n} exceeds pool size {m}")
    # ranking: oriented selection score descending, index ascending on ties
    ranked = sorted(indices, key=lambda i: (-sel.oriented(i), i))
    probs = rank_top_probabilities(m, n)
    return float(sum(p * ev.scores[idx] for p, idx in zip(probs, ranked)))


def draw_subsets(m: int, n: int, draws: int, rng: np.random.Generator) -> np.ndarray:
    """(draws, n) matrix of uniform without-replacement subsets, rows sorted.

    n == m collapses to a single deterministic exhaustive draw.
    """
    if n == m:
        return np.arange(m)[None, :]
    keys = rng.random((draws, m))
    part = np.argpartition(keys, n - 1, axis=1)[:, :n]
    part.sort(axis=1)
    return part


def _chosen_for_subsets(sel: ScoreSet, subsets: np.ndarray) -> np.ndarray:
    """Vectorized argmax per row with lowest-index tie-break (rows are sorted)."""
    m = max(sel.scores) + 1
    oriented = np.full(m, -np.inf)
    for idx, _ in sel.scores.items():
        oriented[idx] = sel.oriented(idx)
    vals = oriented[subsets]
    pos = np.argmax(vals, axis=1)  # first occurrence = lowest index
    return subsets[np.arange(subsets.shape[0]), pos]


def subsample_selections(
    sel: ScoreSet,
    n: int,
    draws: int,
    seed: int,
    disjoint: bool = False,
) -> list[SelectionResult]:
    """Draw ``draws`` size-n subsets for one segment and select per subset.

    Draws are independent by default; ``disjoint=True`` partitions the pool
    instead (audit mode, requires draws * n <= pool size). The RNG stream is
    keyed by (seed, seg_id, n) so results are order-independent across
    segments and schedule entries.
    """
    indices = sorted(sel.scores)
    m = len(indices)
    if n > m:
        raise ValidationError(f"subset size {n} exceeds pool size {m}")
    rng = np.random.default_rng([seed, _seg_hash(sel.seg_id), n])
    if disjoint:
        if draws * n > m:
            raise ValidationError(f"disjoint draws need draws*n <= M ({draws}*{n} > {m})")
        perm = rng.permutation(m)
        subsets = np.sort(perm[: draws * n].reshape(draws, n), axis=1)
    else:
        subsets = draw_subsets(m, n, draws, rng)
    chosen = _chosen_for_subsets(sel, subsets)
    return [
        SelectionResult(
            seg_id=sel.seg_id,
            n=n,
            chosen_idx=int(c),
            chosen_score=sel.scores[int(c)],
            draw_id=d,
        )
        for d, c in enumerate(chosen)
    ]


def subsample_curve(
    sel_scores: dict[str, ScoreSet],
    eval_scores: dict[str, ScoreSet],
    schedule: list[int],
    draws: int = 5,
    seed: int = 0,
) -> list[CurvePoint]:
    """Quality-vs-N curve for a segment-level evaluation metric.

    For each draw, the chosen candidates' evaluation scores are averaged over
    segments; mean/std (population) are then taken across draws. At N == pool
    size there is a single deterministic draw, so std is 0.
    """
    if set(sel_scores) != set(eval_scores):
        raise ValidationError("selection and evaluation score sets cover different segments")
    if not sel_scores:
        raise ValidationError("no segments to aggregate")
    metric_name = next(iter(eval_scores.values())).metric.name
    points = []
    for n in sorted(schedule):
        per_draw = None
        for seg_id, sel in sel_scores.items():
            results = subsample_selections(sel, n, draws, seed)
            ev = eval_scores[seg_id]
            vals = np.array([ev.scores[r.chosen_idx] for r in results])
            per_draw = vals if per_draw is None else per_draw[: len(vals)] + vals
        n_draws = len(per_draw)
        per_draw = per_draw / len(sel_scores)
        points.append(
            CurvePoint(
                n=n,
                metric=metric_name,
                mean=float(per_draw.mean()),
                std=float(per_draw.std()),
                n_draws=n_draws,
            )
        )
    return points


def selection_record(r: SelectionResult) -> dict:
    return {
        "seg_id": r.seg_id,
        "n": r.n,
        "draw_id": r.draw_id,
        "chosen_idx": r.chosen_idx,
        "sel_score": r.chosen_score,
    }

"""Choosing ensemble members on a small labeled validation set.

Forward-stepwise selection scores a candidate set by the summed validation
UAS of its members plus ``alpha`` times their diversity; it never has to
decode an ensemble. Ensemble validation instead decodes every candidate
ensemble and keeps the one with the best validation UAS.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

from mbrdep.core import aligned
from mbrdep.diversity import DiversityConfig, from_matrices, head_matrix
from mbrdep.mbr import aggregate_heads
from mbrdep.uas import corpus_uas, matches, uas_counts

METHODS = ("diversity-objective", "quality-only", "ensemble-validation")


@dataclass(frozen=True)
class SelectionConfig:
    alpha: float = 0.0
    size: int = 1
    metric: DiversityConfig = field(default_factory=DiversityConfig)
    method: str = "diversity-objective"
    uas_average: str = "micro"

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.size < 1:
            raise ValueError(f"size must be at least 1, got {self.size}")
        if self.method not in METHODS:
            raise ValueError(f"unknown selection method {self.method!r}; expected one of {METHODS}")
        if self.uas_average not in ("micro", "macro"):
            raise ValueError("uas_average must be 'micro' or 'macro'")


@dataclass(frozen=True)
class SelectionResult:
    chosen: tuple[str, ...]
    step_objectives: tuple[float, ...]
    config: SelectionConfig
    ensembles_evaluated: int = 0


def _names(candidates) -> list[str]:
    names = [getattr(c, "name", None) or str(i) for i, c in enumerate(candidates, start=1)]
    if len(set(names)) != len(names):
        raise ValueError(f"candidate names must be unique: {names}")
    return names


def _uas(candidate, gold, average: str = "micro") -> Fraction:
    """Exact validation UAS, so that greedy comparisons at alpha = 0 never tie by rounding."""
    if average == "micro":
        return Fraction(*uas_counts(candidate, gold))
    pred, ref = aligned(candidate, gold)
    return sum((Fraction(matches(p, g), len(g)) for p, g in zip(pred, ref)), Fraction(0)) / len(ref)


def selection_objective(selected, gold, alpha: float, metric: DiversityConfig | None = None, uas_average: str = "micro") -> float:
    """Summed validation UAS of ``selected`` plus ``alpha`` times their diversity."""
    if not selected:
        raise ValueError("empty selection")
    metric = metric or DiversityConfig()
    quality = sum(_uas(c, gold, uas_average) for c in selected)
    if alpha == 0:
        return float(quality)
    heads = head_matrix([gold, *selected])
    return float(quality + alpha * from_matrices(heads[1:], heads[1:] == heads[0], metric))


def _check_size(candidates, size: int) -> None:
    if not candidates:
        raise ValueError("no candidates")
    if size > len(candidates):
        raise ValueError(f"cannot select {size} of {len(candidates)} candidates")


def forward_stepwise_select(candidates: Sequence, gold, config: SelectionConfig) -> SelectionResult:
    """Greedy selection: best-UAS candidate first, then whichever addition maximizes the objective.

    Ties go to the earlier candidate in input order.
    """
    _check_size(candidates, config.size)
    names = _names(candidates)
    alpha = 0.0 if config.method == "quality-only" else config.alpha
    quality = [_uas(c, gold, config.uas_average) for c in candidates]
    heads = head_matrix([gold, *candidates])
    gold_row, heads = heads[0], heads[1:]
    correct = heads == gold_row

    first = max(range(len(quality)), key=quality.__getitem__)
    chosen = [first]
    objectives = [float(quality[first])]
    while len(chosen) < config.size:
        best, best_value = None, None
        for i in range(len(candidates)):
            if i in chosen:
                continue
            trial = chosen + [i]
            value = sum(quality[t] for t in trial)
            if alpha:
                value += alpha * from_matrices(heads[trial], correct[trial], config.metric)
            if best_value is None or value > best_value:
                best, best_value = i, value
        chosen.append(best)
        objectives.append(float(best_value))
    return SelectionResult(tuple(names[i] for i in chosen), tuple(objectives), config)


def _unit_aggregate(members) -> list:
    return aggregate_heads(members, weights=[1] * len(members))


def ensemble_validation_select(
    candidates: Sequence,
    gold,
    size: int,
    aggregator: Callable[[list], list] | None = None,
) -> SelectionResult:
    """Greedily add the candidate whose aggregated ensemble scores best on ``gold``."""
    _check_size(candidates, size)
    aggregator = aggregator or _unit_aggregate
    names = _names(candidates)
    chosen: list[int] = []
    scores: list[float] = []
    evaluated = 0
    while len(chosen) < size:
        best, best_value = None, None
        for i in range(len(candidates)):
            if i in chosen:
                continue
            ensemble = aggregator([candidates[t] for t in chosen + [i]])
            evaluated += 1
            value = corpus_uas(ensemble, gold)
            if best_value is None or value > best_value:
                best, best_value = i, value
        chosen.append(best)
        scores.append(best_value)
    config = SelectionConfig(size=size, method="ensemble-validation")
    return SelectionResult(tuple(names[i] for i in chosen), tuple(scores), config, evaluated)


def select(candidates: Sequence, gold, config: SelectionConfig) -> SelectionResult:
    if config.method == "ensemble-validation":
        return ensemble_validation_select(candidates, gold, config.size)
    return forward_stepwise_select(candidates, gold, config)


def default_alpha_grid() -> list[float]:
    return [round(0.1 * i, 1) for i in range(51)]


class SweepRow(NamedTuple):
    alpha: float
    result: SelectionResult
    uas: float


def alpha_sweep(
    candidates: Sequence,
    gold,
    metric: DiversityConfig | None = None,
    size: int = 1,
    alpha_grid: Sequence[float] | None = None,
) -> list[SweepRow]:
    """Run forward-stepwise selection for each alpha and report the selected ensemble's validation UAS."""
    grid = default_alpha_grid() if alpha_grid is None else list(alpha_grid)
    if not grid:
        raise ValueError("empty alpha grid")
    metric = metric or DiversityConfig()
    by_name = dict(zip(_names(candidates), candidates))
    cache: dict[tuple[str, ...], float] = {}
    rows = []
    for alpha in sorted(set(grid)):
        result = forward_stepwise_select(candidates, gold, SelectionConfig(alpha, size, metric))
        if result.chosen not in cache:
            cache[result.chosen] = corpus_uas(_unit_aggregate([by_name[n] for n in result.chosen]), gold)
        rows.append(SweepRow(alpha, result, cache[result.chosen]))
    return rows


def incremental_curve(candidates_ordered: Sequence, gold) -> list[tuple[int, float]]:
    """UAS of the unit-weight ensemble of the first t candidates, for t = 1..K."""
    if not candidates_ordered:
        raise ValueError("no candidates")
    return [
        (t, corpus_uas(_unit_aggregate(list(candidates_ordered[:t])), gold))
        for t in range(1, len(candidates_ordered) + 1)
    ]

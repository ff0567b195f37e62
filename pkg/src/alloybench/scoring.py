"""Scoring pipeline: optimal assignment, category scores, weighted overall.

Extracted and target documents are compared category by category:

* measurements: every measurement from either side (material-level plus
  configuration-nested) goes into one pool; an optimal assignment under
  `measurement_cost` yields fractional credit 1 - cost per matched pair.
* process: per matched material pair, the edit-distance alignment of their
  resolved process chains counts aligned equal kinds as true positives.
* materials: optimal assignment under a blend of measurement similarity and
  chain distance; a pair is a true positive when its cost clears a threshold.
* configurations: matched by their own measurement lists first; the nesting
  relation is only a credit multiplier, never a matching gate.

The assignment solver is exact and breaks cost ties lexicographically by
(row, col), so equal documents always score identically and traces are
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from . import composition as comp
from .datamodel import (
    CompMeasurement,
    Configuration,
    Experiment,
    GlobalLatticeParam,
    ResolvedMaterial,
    linearize,
    resolve,
)
from .quantities import quantities_match, values_match


class WeightSumError(ValueError):
    pass


class TooFewRuns(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


# --- optimal assignment -------------------------------------------------------


@dataclass(frozen=True)
class Assignment:
    """Injective row/col pairing of size min(rows, cols), minimal total cost."""

    pairs: tuple[tuple[int, int], ...]
    total_cost: float

    def col_of_row(self) -> dict[int, int]:
        return {r: c for r, c in self.pairs}


def _solve_padded(cost: np.ndarray):
    """Shortest-augmenting-path assignment on a square matrix.

    Returns (row_to_col, u, v) where the dual potentials satisfy
    u[i] + v[j] <= cost[i, j] with equality on matched edges; every optimal
    perfect matching therefore lives inside the tight-edge subgraph.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j] = row matched to col j, 1-based
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            idx = np.nonzero(free)[0]
            cur = cost[i0 - 1, idx - 1] - u[i0] - v[idx]
            improved = cur < minv[idx]
            if improved.any():
                chosen = idx[improved]
                minv[chosen] = cur[improved]
                way[chosen] = j0
            k = int(np.argmin(minv[idx]))
            j1 = int(idx[k])
            delta = minv[j1]
            used_idx = np.nonzero(used)[0]
            u[p[used_idx]] += delta
            v[used_idx] -= delta
            minv[idx] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = int(way[j0])
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.zeros(n, dtype=np.int64)
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col, u[1:], v[1:]


def _refine_lexicographic(
    padded: np.ndarray,
    row_to_col: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    n_rows: int,
    n_cols: int,
    eps: float = 1e-12,
) -> list[tuple[int, int]]:
    """Pick, among all optimal assignments, the lexicographically smallest.

    All optimal perfect matchings of the padded matrix use only tight edges
    (zero reduced cost), and any perfect matching of tight edges is optimal.
    So we fix real rows in ascending order, giving each the smallest real
    column for which the tight-edge graph still has a perfect matching,
    rerouting the current matching with one augmenting-path search per
    attempted column.
    """
    s = padded.shape[0]
    admissible = (padded - u[:, None] - v[None, :]) <= eps
    match = row_to_col.copy()
    holder = np.empty(s, dtype=np.int64)  # col -> row
    holder[match] = np.arange(s)
    fixed_cols: set[int] = set()

    def reroute(row: int, col: int) -> bool:
        """Try to give `col` to `row`, keeping a perfect matching elsewhere."""
        displaced = int(holder[col])
        freed = int(match[row])
        visited: set[int] = {col}

        def dfs(x: int) -> bool:
            for y in np.nonzero(admissible[x])[0]:
                y = int(y)
                if y in visited or y in fixed_cols:
                    continue
                visited.add(y)
                if y == freed or dfs(int(holder[y])):
                    match[x] = y
                    holder[y] = x
                    return True
            return False

        if dfs(displaced):
            match[row] = col
            holder[col] = row
            return True
        return False

    for row in range(min(n_rows, s)):
        current = int(match[row])
        for col in range(n_cols):
            if col in fixed_cols or not admissible[row, col]:
                continue
            if col == current or reroute(row, col):
                break
        fixed_cols.add(int(match[row]))
    return [
        (r, int(match[r]))
        for r in range(n_rows)
        if int(match[r]) < n_cols
    ]


def hungarian(cost_matrix) -> Assignment:
    """Globally minimal assignment; ties broken lexicographically by (row, col)."""
    cost = np.asarray(cost_matrix, dtype=float)
    if cost.ndim != 2:
        raise ValueError("cost matrix must be two-dimensional")
    n, m = cost.shape
    if n == 0 or m == 0:
        return Assignment((), 0.0)
    if cost.min() < -1e-12 or cost.max() > 1.0 + 1e-12:
        raise ValueError("cost entries must lie in [0, 1]")
    s = max(n, m)
    padded = np.zeros((s, s))
    padded[:n, :m] = cost
    row_to_col, u, v = _solve_padded(padded)
    pairs = _refine_lexicographic(padded, row_to_col, u, v, n, m)
    total = math.fsum(cost[r, c] for r, c in pairs)
    return Assignment(tuple(pairs), total)


# --- sequence alignment -------------------------------------------------------


def align_chains(a: Sequence, b: Sequence) -> tuple[int, int]:
    """Levenshtein distance plus matched-step count.

    Among all minimum-edit alignments the one with the most exact matches is
    chosen, so the true-positive count is well defined and deterministic.
    Returns (edit_distance, matches).
    """
    la, lb = len(a), len(b)
    prev = [(j, 0) for j in range(lb + 1)]
    for i in range(1, la + 1):
        cur = [(i, 0)]
        ai = a[i - 1]
        for j in range(1, lb + 1):
            if ai == b[j - 1]:
                sub = (prev[j - 1][0], prev[j - 1][1] - 1)
            else:
                sub = (prev[j - 1][0] + 1, prev[j - 1][1])
            best = sub
            dele = (prev[j][0] + 1, prev[j][1])
            if dele < best:
                best = dele
            ins = (cur[j - 1][0] + 1, cur[j - 1][1])
            if ins < best:
                best = ins
            cur.append(best)
        prev = cur
    distance, neg_matches = prev[lb]
    return distance, -neg_matches


def process_cost(a: ResolvedMaterial, b: ResolvedMaterial) -> float:
    """Edit distance between process-kind chains, normalized by max length."""
    ka, kb = linearize(a), linearize(b)
    longest = max(len(ka), len(kb))
    if longest == 0:
        return 0.0
    distance, _ = align_chains(ka, kb)
    return distance / longest


# --- pairwise costs -----------------------------------------------------------


@dataclass(frozen=True)
class ScoringConfig:
    value_rel_tol: float = 1e-6
    composition_threshold: float = 0.005  # 0.5 at%, EDS round-off scale
    material_threshold: float = 0.5
    parent_penalty: float = 0.5

    @staticmethod
    def from_dict(data: dict) -> "ScoringConfig":
        known = {f for f in ScoringConfig.__dataclass_fields__}
        return ScoringConfig(**{k: v for k, v in data.items() if k in known})


DEFAULT_CONFIG = ScoringConfig()

_QUALIFIER_WEIGHT = 1.0
_TEMPERATURE_WEIGHT = 2.0
_PRESSURE_WEIGHT = 2.0
_UNCERTAINTY_WEIGHT = 1.0
_ATTRIBUTE_DENOMINATOR = 6.0


def _uncertainties_match(a: Optional[float], b: Optional[float], rel_tol: float) -> bool:
    if a is None and b is None:
        return True
    if a is None or b is None:
        return False
    return math.isclose(a, b, rel_tol=rel_tol, abs_tol=0.0)


def measurement_cost(a, b, config: ScoringConfig = DEFAULT_CONFIG) -> float:
    """Cost in [0, 1] of matching two pooled measurements.

    Different kinds (or different measurement classes) are infeasible at
    cost 1, as is a core-value mismatch. Feasible pairs pay a weighted
    fraction for each differing attribute; the denominator stays fixed so
    attributes absent on both sides contribute full credit.
    """
    a_comp = isinstance(a, CompMeasurement)
    b_comp = isinstance(b, CompMeasurement)
    if a_comp or b_comp:
        if not (a_comp and b_comp):
            return 1.0
        close = comp.distance(a.composition, b.composition) <= config.composition_threshold
        return 0.0 if close else 1.0

    a_lat = isinstance(a, GlobalLatticeParam)
    b_lat = isinstance(b, GlobalLatticeParam)
    if a_lat or b_lat:
        if not (a_lat and b_lat):
            return 1.0
        if a.lattice.family != b.lattice.family or a.struct != b.struct:
            return 1.0
        for la, lb in zip(a.lattice.lengths(), b.lattice.lengths()):
            if not math.isclose(la, lb, rel_tol=config.value_rel_tol, abs_tol=0.0):
                return 1.0
        penalty = 0.0
        if not quantities_match(a.phase_fraction, b.phase_fraction, config.value_rel_tol):
            penalty += _PRESSURE_WEIGHT  # quantity-valued attribute, same weight class
        return penalty / _ATTRIBUTE_DENOMINATOR

    if a.kind != b.kind:
        return 1.0
    if a.unit is None or b.unit is None:
        return 1.0
    if not values_match((a.value, a.unit), (b.value, b.unit), config.value_rel_tol):
        return 1.0
    penalty = 0.0
    if a.value.qualifier != b.value.qualifier:
        penalty += _QUALIFIER_WEIGHT
    if not quantities_match(a.temperature, b.temperature, config.value_rel_tol):
        penalty += _TEMPERATURE_WEIGHT
    if not quantities_match(a.pressure, b.pressure, config.value_rel_tol):
        penalty += _PRESSURE_WEIGHT
    if not _uncertainties_match(a.uncertainty, b.uncertainty, config.value_rel_tol):
        penalty += _UNCERTAINTY_WEIGHT
    return penalty / _ATTRIBUTE_DENOMINATOR


# --- category scores ----------------------------------------------------------


@dataclass(frozen=True)
class CategoryScore:
    precision: float
    recall: float
    f1: float
    credit: float = 0.0
    n_extracted: int = 0
    n_target: int = 0

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "credit": self.credit,
            "n_extracted": self.n_extracted,
            "n_target": self.n_target,
        }


def _category(credit: float, n_extracted: int, n_target: int) -> CategoryScore:
    if n_extracted == 0 and n_target == 0:
        # nothing to extract and nothing extracted: perfect abstention
        return CategoryScore(1.0, 1.0, 1.0, 0.0, 0, 0)
    if n_extracted == 0 or n_target == 0:
        return CategoryScore(0.0, 0.0, 0.0, 0.0, n_extracted, n_target)
    precision = credit / n_extracted
    recall = credit / n_target
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return CategoryScore(precision, recall, f1, credit, n_extracted, n_target)


def _as_experiments(doc: Union[Experiment, Sequence[Experiment]]) -> list[Experiment]:
    if isinstance(doc, Experiment):
        return [doc]
    return list(doc)


def _measurement_pool(experiments: list[Experiment]) -> list:
    pool = []
    for experiment in experiments:
        for material in experiment.output_materials:
            pool.extend(material.scalar_pool())
    return pool


def _pool_score(ext_pool: list, tgt_pool: list, config: ScoringConfig) -> CategoryScore:
    if not ext_pool or not tgt_pool:
        return _category(0.0, len(ext_pool), len(tgt_pool))
    cost = np.ones((len(ext_pool), len(tgt_pool)))
    for i, a in enumerate(ext_pool):
        for j, b in enumerate(tgt_pool):
            cost[i, j] = measurement_cost(a, b, config)
    assignment = hungarian(cost)
    credit = math.fsum(1.0 - cost[r, c] for r, c in assignment.pairs)
    return _category(credit, len(ext_pool), len(tgt_pool))


def score_measurements(
    extracted: Union[Experiment, Sequence[Experiment]],
    target: Union[Experiment, Sequence[Experiment]],
    config: ScoringConfig = DEFAULT_CONFIG,
) -> CategoryScore:
    """Pool every measurement on each side, regardless of material."""
    return _pool_score(
        _measurement_pool(_as_experiments(extracted)),
        _measurement_pool(_as_experiments(target)),
        config,
    )


def material_cost(a: ResolvedMaterial, b: ResolvedMaterial, config: ScoringConfig = DEFAULT_CONFIG) -> float:
    """Half measurement dissimilarity, half process-chain distance."""
    meas = _pool_score(a.material.scalar_pool(), b.material.scalar_pool(), config)
    return 0.5 * (1.0 - meas.f1) + 0.5 * process_cost(a, b)


def _resolve_all(experiments: list[Experiment]) -> list[ResolvedMaterial]:
    resolved = []
    for experiment in experiments:
        resolved.extend(resolve(experiment)[0])
    return resolved


@dataclass(frozen=True)
class MaterialTrace:
    """Audit record of the material assignment."""

    matched: tuple[tuple[str, str, float], ...]  # (extracted, target, cost)
    unmatched_extracted: tuple[str, ...]
    unmatched_target: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "matched": [list(entry) for entry in self.matched],
            "unmatched_extracted": list(self.unmatched_extracted),
            "unmatched_target": list(self.unmatched_target),
        }


def score_materials(
    extracted: Union[Experiment, Sequence[Experiment]],
    target: Union[Experiment, Sequence[Experiment]],
    config: ScoringConfig = DEFAULT_CONFIG,
) -> tuple[CategoryScore, Assignment, MaterialTrace]:
    ext = _resolve_all(_as_experiments(extracted))
    tgt = _resolve_all(_as_experiments(target))
    if not ext or not tgt:
        empty = Assignment((), 0.0)
        trace = MaterialTrace((), tuple(r.name for r in ext), tuple(r.name for r in tgt))
        return _category(0.0, len(ext), len(tgt)), empty, trace
    cost = np.ones((len(ext), len(tgt)))
    for i, a in enumerate(ext):
        for j, b in enumerate(tgt):
            cost[i, j] = material_cost(a, b, config)
    assignment = hungarian(cost)
    true_positives = sum(1 for r, c in assignment.pairs if cost[r, c] <= config.material_threshold)
    matched = tuple(
        (ext[r].name, tgt[c].name, float(cost[r, c])) for r, c in assignment.pairs
    )
    used_rows = {r for r, _ in assignment.pairs}
    used_cols = {c for _, c in assignment.pairs}
    trace = MaterialTrace(
        matched=matched,
        unmatched_extracted=tuple(ext[i].name for i in range(len(ext)) if i not in used_rows),
        unmatched_target=tuple(tgt[j].name for j in range(len(tgt)) if j not in used_cols),
    )
    return _category(float(true_positives), len(ext), len(tgt)), assignment, trace


def score_process(
    extracted: Union[Experiment, Sequence[Experiment]],
    target: Union[Experiment, Sequence[Experiment]],
    material_assignment: Optional[Assignment] = None,
    config: ScoringConfig = DEFAULT_CONFIG,
) -> CategoryScore:
    """Aligned equal-kind steps over matched materials, micro-aggregated.

    Steps belonging to unmatched materials still count in the denominators:
    extracting spurious chains costs precision, missing chains cost recall.
    """
    ext = _resolve_all(_as_experiments(extracted))
    tgt = _resolve_all(_as_experiments(target))
    if material_assignment is None:
        _, material_assignment, _ = score_materials(extracted, target, config)
    total_extracted = sum(len(r.linear_chain) for r in ext)
    total_target = sum(len(r.linear_chain) for r in tgt)
    matches = 0
    for r, c in material_assignment.pairs:
        _, matched = align_chains(linearize(ext[r]), linearize(tgt[c]))
        matches += matched
    return _category(float(matches), total_extracted, total_target)


def _configuration_pool(experiments: list[Experiment]) -> list[tuple[int, Configuration]]:
    """(material ordinal, configuration) pairs across the whole document."""
    pool = []
    ordinal = 0
    for experiment in experiments:
        for material in experiment.output_materials:
            for cfg in material.configurations():
                pool.append((ordinal, cfg))
            ordinal += 1
    return pool


def score_configurations(
    extracted: Union[Experiment, Sequence[Experiment]],
    target: Union[Experiment, Sequence[Experiment]],
    config: ScoringConfig = DEFAULT_CONFIG,
) -> CategoryScore:
    """Match configurations by their own measurements, then check nesting.

    The Hungarian pass ignores hierarchy entirely; a matched pair earns
    (1 - cost), multiplied by the parent penalty unless the two parents are
    absent on both sides or matched to each other.
    """
    ext = _configuration_pool(_as_experiments(extracted))
    tgt = _configuration_pool(_as_experiments(target))
    if not ext or not tgt:
        return _category(0.0, len(ext), len(tgt))
    cost = np.ones((len(ext), len(tgt)))
    for i, (_, a) in enumerate(ext):
        for j, (_, b) in enumerate(tgt):
            pair = _pool_score(list(a.measurements), list(b.measurements), config)
            cost[i, j] = 1.0 - pair.f1
    assignment = hungarian(cost)

    def parent_index(pool, idx) -> Optional[int]:
        material, cfg = pool[idx]
        if cfg.within is None:
            return None
        for k, (other_material, other) in enumerate(pool):
            if other_material == material and other.name == cfg.within:
                return k
        return None

    pair_map = {r: c for r, c in assignment.pairs}
    credit = 0.0
    for r, c in assignment.pairs:
        parent_e = parent_index(ext, r)
        parent_t = parent_index(tgt, c)
        if parent_e is None and parent_t is None:
            equivalent = True
        elif parent_e is None or parent_t is None:
            equivalent = False
        else:
            equivalent = pair_map.get(parent_e) == parent_t
        multiplier = 1.0 if equivalent else config.parent_penalty
        credit += (1.0 - cost[r, c]) * multiplier
    return _category(credit, len(ext), len(tgt))


# --- overall ------------------------------------------------------------------


@dataclass(frozen=True)
class Weights:
    measurements: float = 0.5
    process: float = 0.2
    material: float = 0.15
    configuration: float = 0.15

    def __post_init__(self):
        total = math.fsum(
            (self.measurements, self.process, self.material, self.configuration)
        )
        if abs(total - 1.0) > 1e-9:
            raise WeightSumError(f"weights sum to {total}, expected 1")

    def combine(self, by_category: dict[str, float]) -> float:
        return math.fsum(
            (
                self.measurements * by_category["measurements"],
                self.process * by_category["process"],
                self.material * by_category["material"],
                self.configuration * by_category["configuration"],
            )
        )

    def to_dict(self) -> dict:
        return {
            "measurements": self.measurements,
            "process": self.process,
            "material": self.material,
            "configuration": self.configuration,
        }


DEFAULT_WEIGHTS = Weights()

CATEGORIES = ("measurements", "process", "material", "configuration")


@dataclass(frozen=True)
class ScoreReport:
    categories: dict[str, CategoryScore]
    overall_precision: float
    overall_recall: float
    overall_f1: float
    weights: Weights
    material_trace: MaterialTrace

    def to_dict(self) -> dict:
        return {
            "categories": {name: score.to_dict() for name, score in self.categories.items()},
            "overall": {
                "precision": self.overall_precision,
                "recall": self.overall_recall,
                "f1": self.overall_f1,
            },
            "weights": self.weights.to_dict(),
            "material_trace": self.material_trace.to_dict(),
        }


def combine_weighted(weights: Weights, by_category: dict[str, float]) -> float:
    """Weighted sum of per-category values (exact linearity contract)."""
    return weights.combine(by_category)


def score_overall(
    extracted: Union[Experiment, Sequence[Experiment]],
    target: Union[Experiment, Sequence[Experiment]],
    weights: Weights = DEFAULT_WEIGHTS,
    config: ScoringConfig = DEFAULT_CONFIG,
) -> ScoreReport:
    material_score, assignment, trace = score_materials(extracted, target, config)
    categories = {
        "measurements": score_measurements(extracted, target, config),
        "process": score_process(extracted, target, assignment, config),
        "material": material_score,
        "configuration": score_configurations(extracted, target, config),
    }
    return ScoreReport(
        categories=categories,
        overall_precision=weights.combine({k: v.precision for k, v in categories.items()}),
        overall_recall=weights.combine({k: v.recall for k, v in categories.items()}),
        overall_f1=weights.combine({k: v.f1 for k, v in categories.items()}),
        weights=weights,
        material_trace=trace,
    )


# --- sub-task scorers ----------------------------------------------------------


def score_composition_list(
    extracted: Sequence[comp.Composition],
    target: Sequence[comp.Composition],
    threshold: float = DEFAULT_CONFIG.composition_threshold,
) -> CategoryScore:
    if not extracted or not target:
        return _category(0.0, len(extracted), len(target))
    cost = np.ones((len(extracted), len(target)))
    for i, a in enumerate(extracted):
        for j, b in enumerate(target):
            cost[i, j] = min(comp.distance(a, b), 1.0)
    assignment = hungarian(cost)
    true_positives = sum(1 for r, c in assignment.pairs if cost[r, c] <= threshold)
    return _category(float(true_positives), len(extracted), len(target))


def score_property_list(
    extracted: Sequence[float],
    target: Sequence[float],
    rel_tol: float = 1e-9,
) -> CategoryScore:
    """Multiset matching of plain values in the property's canonical unit."""
    if not extracted or not target:
        return _category(0.0, len(extracted), len(target))
    cost = np.ones((len(extracted), len(target)))
    for i, a in enumerate(extracted):
        for j, b in enumerate(target):
            if math.isclose(a, b, rel_tol=rel_tol, abs_tol=0.0):
                cost[i, j] = 0.0
    assignment = hungarian(cost)
    true_positives = sum(1 for r, c in assignment.pairs if cost[r, c] == 0.0)
    return _category(float(true_positives), len(extracted), len(target))


# --- run statistics -------------------------------------------------------------


@dataclass(frozen=True)
class RunStatistics:
    mean: float
    half_width: float
    n: int


def run_ci(scores: Sequence[float], confidence: float = 0.95) -> RunStatistics:
    """Mean with a Student-t confidence half-width across repeated runs."""
    n = len(scores)
    if n < 2:
        raise TooFewRuns(f"need at least 2 runs, got {n}")
    mean = math.fsum(scores) / n
    variance = math.fsum((x - mean) ** 2 for x in scores) / (n - 1)
    spread = math.sqrt(variance)
    t = float(stats.t.ppf(0.5 + confidence / 2.0, n - 1))
    return RunStatistics(mean=mean, half_width=t * spread / math.sqrt(n), n=n)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample correlation coefficient; exact +-1 on exact linear ties."""
    if len(x) != len(y) or len(x) < 2:
        raise DegenerateInput("need two equal-length samples of size >= 2")
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    a = [xi - mx for xi in x]
    b = [yi - my for yi in y]
    saa = math.fsum(ai * ai for ai in a)
    sbb = math.fsum(bi * bi for bi in b)
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateInput("zero variance input")
    if a == b:
        return 1.0
    if all(ai == -bi for ai, bi in zip(a, b)):
        return -1.0
    sab = math.fsum(ai * bi for ai, bi in zip(a, b))
    r = sab / math.sqrt(saa * sbb)
    return max(-1.0, min(1.0, r))

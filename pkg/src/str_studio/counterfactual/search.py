"""Counterfactual search: minimize lambda*(f(x') - y')^2 + d(x, x').

A genetic algorithm works directly in encoded gene space (categorical
genes are codes 1..K, numeric genes live in the schema range inflated by
10%), so every candidate decodes back to real attribute labels: the
reason a numeric-only solver was rejected. The min-max over lambda is
realized as an outer loop that multiplies lambda whenever the elite
candidate is still outside the target tolerance.

Frozen (non-mutable) features are never materialized as genes at all, so
every candidate in every generation carries them bit-identical to the
query instance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..errors import SchemaError
from ..gbdt.training import TreeEnsemble, predict_batch
from ..ingest.types import EncodedInstance, FeatureSchema
from ..uncertainty import DistributionEstimator, prediction_interval
from .distance import DistanceSpec, distance, distance_batch

RANGE_INFLATION = 0.10  # numeric genes may roam 10% beyond the schema range


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 64
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    elite_count: int = 2
    lambda0: float = 1.0
    lambda_multiplier: float = 10.0
    lambda_max_steps: int = 6
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise SchemaError("population_size must be >= 2")
        if not 0 <= self.elite_count < self.population_size:
            raise SchemaError("elite_count must be < population_size")
        if self.lambda0 <= 0 or self.lambda_multiplier <= 1:
            raise SchemaError("lambda schedule needs lambda0 > 0 and multiplier > 1")
        if self.lambda_max_steps < 1:
            raise SchemaError("lambda_max_steps must be >= 1")


@dataclass
class CfRequest:
    instance: EncodedInstance
    target: float
    mutable_features: list[int]
    schema: FeatureSchema
    distance_spec: Optional[DistanceSpec] = None
    epsilon: float = 0.02
    ga: GaConfig = field(default_factory=GaConfig)
    #: feature index -> relative-change threshold under which the feature
    #: snaps back to its original value (price changes below 0.1% are noise)
    negligible: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.mutable_features:
            raise SchemaError("mutable feature set must be non-empty")
        if self.epsilon <= 0:
            raise SchemaError("target tolerance epsilon must be > 0")
        bad = [i for i in self.mutable_features if not 0 <= i < self.schema.d]
        if bad:
            raise SchemaError(f"mutable feature indices out of range: {bad}")
        if self.distance_spec is None:
            self.distance_spec = DistanceSpec.from_schema(self.schema)


@dataclass
class FeatureChange:
    feature_index: int
    name: str
    from_encoded: float
    to_encoded: float
    from_value: object  # decoded label / number / None
    to_value: object

    def display(self) -> tuple[str, str]:
        return _display(self.from_value), _display(self.to_value)


@dataclass
class CounterfactualResult:
    x_prime: EncodedInstance
    predicted: float
    original_predicted: float
    target: float
    distance: float
    feasible: bool
    diffs: list[FeatureChange]
    generations_run: int
    lambda_final: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "x_prime": [None if np.isnan(v) else float(v) for v in self.x_prime.values],
            "predicted": self.predicted,
            "original_predicted": self.original_predicted,
            "target": self.target,
            "distance": self.distance,
            "feasible": self.feasible,
            "diffs": [
                {
                    "feature": c.name,
                    "from": _jsonable(c.from_value),
                    "to": _jsonable(c.to_value),
                }
                for c in self.diffs
            ],
            "generations_run": self.generations_run,
            "lambda_final": self.lambda_final,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _jsonable(v):
    if v is None or isinstance(v, str):
        return v
    return float(v)


def _display(v) -> str:
    if v is None:
        return "missing"
    if isinstance(v, str):
        return v
    return _sig4(float(v))


def _sig4(x: float) -> str:
    if x == 0:
        return "0"
    rounded = round(x, max(0, 3 - int(math.floor(math.log10(abs(x))))))
    if rounded == int(rounded) and abs(rounded) < 1e15:
        return str(int(rounded))
    return repr(rounded)


def _point_model(model) -> TreeEnsemble:
    return model.base_model if isinstance(model, DistributionEstimator) else model


def _gene_bounds(schema: FeatureSchema, feature: int) -> tuple[float, float]:
    spec = schema.features[feature]
    if spec.kind == "categorical":
        return 1.0, float(spec.n_codes)
    lo, hi = spec.value_range
    r = hi - lo
    return lo - RANGE_INFLATION / 2 * r, hi + RANGE_INFLATION / 2 * r


def what_if_sweep(model, instance, feature: int, candidate_values, schema: FeatureSchema):
    """Predictions (and intervals, given an estimator) for single-feature
    substitutions; the original value is always included and marked."""
    x = instance.values if isinstance(instance, EncodedInstance) else np.asarray(instance, dtype=float)
    spec = schema.features[feature]
    candidates = [float(v) for v in candidate_values]
    for v in candidates:
        if spec.kind == "categorical":
            if v != int(v) or not 1 <= v <= spec.n_codes:
                raise SchemaError(
                    f"candidate {v} invalid for categorical '{spec.name}' (codes 1..{spec.n_codes})"
                )
        else:
            lo, hi = _gene_bounds(schema, feature)
            if not lo <= v <= hi:
                raise SchemaError(
                    f"candidate {v} outside extended range [{lo}, {hi}] for '{spec.name}'"
                )
    original = float(x[feature]) if not np.isnan(x[feature]) else None
    if original is not None and original not in candidates:
        candidates = [original] + candidates

    point = _point_model(model)
    rows = np.tile(x, (len(candidates), 1))
    rows[:, feature] = candidates
    preds = predict_batch(point, rows)
    out = []
    for i, v in enumerate(candidates):
        entry = {
            "value": v,
            "prediction": float(preds[i]),
            "is_original": original is not None and v == original,
        }
        if isinstance(model, DistributionEstimator):
            lo_hi = prediction_interval(model, rows[i], 0.9)
            entry["lo"], entry["hi"] = lo_hi
        out.append(entry)
    return out


def diff(x, x_prime, schema: FeatureSchema) -> list[FeatureChange]:
    """Decoded (feature, from, to) rows for every slot where x' != x."""
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    if x.shape != x_prime.shape:
        raise SchemaError("diff requires equal-length vectors")
    changes = []
    for i, spec in enumerate(schema.features):
        a, b = x[i], x_prime[i]
        if (np.isnan(a) and np.isnan(b)) or a == b:
            continue
        changes.append(
            FeatureChange(
                feature_index=i,
                name=spec.name,
                from_encoded=float(a),
                to_encoded=float(b),
                from_value=_decode_one(spec, a),
                to_value=_decode_one(spec, b),
            )
        )
    return changes


def _decode_one(spec, value):
    if np.isnan(value):
        return None
    if spec.kind == "categorical":
        return spec.label_of(int(round(value)))
    return float(value)


def apply_diff(x, changes: list[FeatureChange]) -> np.ndarray:
    out = np.asarray(x, dtype=float).copy()
    for c in changes:
        out[c.feature_index] = c.to_encoded
    return out


def render_diff_markdown(result: CounterfactualResult, as_percent: bool = True) -> str:
    """Markdown table in the feature-inputs -> explanation layout."""
    lines = [
        "| Product features | Feature inputs |  | Counterfactual explanation |",
        "|---|---|---|---|",
    ]
    for c in result.diffs:
        frm, to = c.display()
        lines.append(f"| {c.name} | {frm} | → | {to} |")
    if as_percent:
        before = f"{100 * result.original_predicted:.2f}%"
        after = f"{100 * result.predicted:.2f}%"
    else:
        before, after = _sig4(result.original_predicted), _sig4(result.predicted)
    lines.append(f"| **STR forecast:** | {before} |  | {after} |")
    return "\n".join(lines) + "\n"


def solve_counterfactual(model, request: CfRequest) -> CounterfactualResult:
    """GA over mutable-feature genes; returns the minimum-distance feasible
    candidate ever seen, else the best-fitness candidate flagged infeasible."""
    point = _point_model(model)
    x = request.instance.values
    if len(x) != point.n_features:
        raise SchemaError("instance length does not match model")
    schema = request.schema
    ga = request.ga
    rng = np.random.default_rng(ga.seed)
    mutable = sorted(request.mutable_features)
    n_genes = len(mutable)
    dspec = request.distance_spec

    kinds = [schema.features[i].kind for i in mutable]
    n_codes = [schema.features[i].n_codes for i in mutable]
    bounds = [_gene_bounds(schema, i) for i in mutable]
    sigmas = []
    for i in mutable:
        spec = schema.features[i]
        if spec.kind == "numeric":
            lo, hi = spec.value_range
            sigmas.append((hi - lo) / 10.0)
        else:
            sigmas.append(0.0)

    def random_gene(slot: int) -> float:
        if kinds[slot] == "categorical":
            return float(rng.integers(1, n_codes[slot] + 1))
        lo, hi = bounds[slot]
        return float(rng.uniform(lo, hi))

    def to_rows(pop: np.ndarray) -> np.ndarray:
        rows = np.tile(x, (pop.shape[0], 1))
        rows[:, mutable] = pop
        return rows

    original_pred = float(predict_batch(point, x.reshape(1, -1))[0])

    # Population: the query instance itself plus random candidates.
    pop = np.empty((ga.population_size, n_genes))
    pop[0] = x[mutable]
    for p in range(1, ga.population_size):
        pop[p] = [random_gene(s) for s in range(n_genes)]

    best_feasible: Optional[tuple[float, np.ndarray, float]] = None  # (distance, genes, pred)
    best_overall: Optional[tuple[float, np.ndarray, float]] = None  # (fitness, genes, pred)

    lam = ga.lambda0
    generations_run = 0
    for step in range(ga.lambda_max_steps):
        # Fitness scales change with lambda; the infeasible fallback should
        # be the best candidate under the tightest lambda reached.
        best_overall = None
        for _ in range(ga.generations):
            generations_run += 1
            rows = to_rows(pop)
            preds = predict_batch(point, rows)
            dists = distance_batch(x, rows, dspec)
            fitness = lam * (preds - request.target) ** 2 + dists

            for p in range(len(pop)):
                if abs(preds[p] - request.target) <= request.epsilon:
                    if best_feasible is None or dists[p] < best_feasible[0]:
                        best_feasible = (float(dists[p]), pop[p].copy(), float(preds[p]))
                if best_overall is None or fitness[p] < best_overall[0]:
                    best_overall = (float(fitness[p]), pop[p].copy(), float(preds[p]))

            order = np.argsort(fitness, kind="stable")
            elite = pop[order[: ga.elite_count]].copy()
            children = [elite[e] for e in range(len(elite))]
            while len(children) < ga.population_size:
                a = _tournament(rng, fitness)
                b = _tournament(rng, fitness)
                if rng.random() < ga.crossover_rate:
                    mask = rng.random(n_genes) < 0.5
                    child = np.where(mask, pop[a], pop[b])
                else:
                    child = pop[a].copy()
                for s in range(n_genes):
                    if rng.random() < ga.mutation_rate:
                        if kinds[s] == "categorical":
                            child[s] = random_gene(s)
                        elif sigmas[s] > 0:
                            lo, hi = bounds[s]
                            child[s] = float(np.clip(child[s] + rng.normal(0.0, sigmas[s]), lo, hi))
                children.append(child)
            pop = np.array(children)

        # Elite after this lambda step: feasible -> stop tightening.
        rows = to_rows(pop)
        preds = predict_batch(point, rows)
        fitness = lam * (preds - request.target) ** 2 + distance_batch(x, rows, dspec)
        elite_idx = int(np.argmin(fitness))
        if abs(preds[elite_idx] - request.target) <= request.epsilon:
            break
        lam *= ga.lambda_multiplier

    if best_feasible is not None:
        genes, pred = best_feasible[1], best_feasible[2]
        feasible = True
    else:
        genes, pred = best_overall[1], best_overall[2]
        feasible = False

    x_prime = x.copy()
    x_prime[mutable] = genes
    x_prime, pred = _snap_negligible(point, request, x, x_prime, pred)
    dist = distance(x, x_prime, dspec)
    feasible = abs(pred - request.target) <= request.epsilon if feasible else feasible
    return CounterfactualResult(
        x_prime=EncodedInstance(x_prime, product_id=request.instance.product_id),
        predicted=pred,
        original_predicted=original_pred,
        target=request.target,
        distance=dist,
        feasible=feasible,
        diffs=diff(x, x_prime, schema),
        generations_run=generations_run,
        lambda_final=lam,
        seed=ga.seed,
    )


def _tournament(rng, fitness, size: int = 3) -> int:
    picks = rng.integers(0, len(fitness), size=size)
    return int(picks[np.argmin(fitness[picks])])


def _snap_negligible(point, request, x, x_prime, pred):
    """Revert sub-threshold relative changes (e.g. a 0.05% price nudge),
    keeping the snap only if it does not break feasibility."""
    if not request.negligible:
        return x_prime, pred
    snapped = x_prime.copy()
    changed = False
    for i, threshold in request.negligible.items():
        a, b = x[i], snapped[i]
        if np.isnan(a) or np.isnan(b) or a == b or a == 0:
            continue
        if abs(b - a) / abs(a) < threshold:
            snapped[i] = a
            changed = True
    if not changed:
        return x_prime, pred
    new_pred = float(predict_batch(point, snapped.reshape(1, -1))[0])
    was_feasible = abs(pred - request.target) <= request.epsilon
    if was_feasible and abs(new_pred - request.target) > request.epsilon:
        return x_prime, pred
    return snapped, new_pred

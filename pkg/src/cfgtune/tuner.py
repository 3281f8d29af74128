"""Multi-objective evolutionary tuner over a pruned configuration space.

Minimizes (model size, forward GFLOPs, negated predicted effectiveness)
with a generational loop: distance-maximizing random initialization,
two-point crossover over the canonical dimension order, per-dimension
boundary random mutation, divisibility correction, binary tournament
selection from parents plus offspring, and an elitist archive of all
non-dominated evaluated configurations. Deterministic for a fixed seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .costs import forward_gflops, model_size_mb
from .space import Configuration, ConfigurationSpace, correct


class ObjectiveVector(NamedTuple):
    """One point in minimization space; effectiveness enters negated."""

    size_mb: float
    gflops: float
    neg_effectiveness: float

    @property
    def effectiveness(self) -> float:
        return -self.neg_effectiveness


@dataclass(frozen=True)
class Individual:
    config: Configuration
    objectives: ObjectiveVector


def dominates(u: ObjectiveVector, v: ObjectiveVector) -> bool:
    """u is at least as good everywhere and strictly better somewhere."""
    return (
        u[0] <= v[0]
        and u[1] <= v[1]
        and u[2] <= v[2]
        and (u[0] < v[0] or u[1] < v[1] or u[2] < v[2])
    )


class ParetoArchive:
    """Mutually non-dominated individuals, one per objective vector.

    A candidate enters iff no member dominates it and no member already has
    an identical objective vector (first insert wins); entering candidates
    evict every member they dominate. The final vector set is independent of
    insertion order for a fixed candidate multiset.
    """

    def __init__(self):
        self._members: list[Individual] = []

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self):
        return iter(self._members)

    @property
    def members(self) -> tuple[Individual, ...]:
        return tuple(self._members)

    def objective_vectors(self) -> list[ObjectiveVector]:
        return [m.objectives for m in self._members]

    def insert(self, candidate: Individual) -> bool:
        """Returns True iff the candidate was admitted."""
        cu0, cu1, cu2 = candidate.objectives
        survivors = []
        for member in self._members:
            m0, m1, m2 = member.objectives
            if (
                m0 <= cu0 and m1 <= cu1 and m2 <= cu2
                and (m0 < cu0 or m1 < cu1 or m2 < cu2)
            ):
                return False  # dominated by an existing member
            if m0 == cu0 and m1 == cu1 and m2 == cu2:
                return False  # objective duplicate: first insert wins
            if not (
                cu0 <= m0 and cu1 <= m1 and cu2 <= m2
                and (cu0 < m0 or cu1 < m1 or cu2 < m2)
            ):
                survivors.append(member)
        survivors.append(candidate)
        self._members = survivors
        return True

    def update(self, candidates) -> "ParetoArchive":
        for candidate in candidates:
            self.insert(candidate)
        return self


def update_archive(archive: ParetoArchive, candidates) -> ParetoArchive:
    return archive.update(candidates)


@dataclass(frozen=True)
class TunerParams:
    population_size: int = 20
    generations: int = 50
    crossover_rate: float = 0.6
    mutation_rate: float = 0.1
    tournament_size: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")


def _normalized_distance(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def adaptive_random_init(
    space: ConfigurationSpace,
    n: int,
    seed: int | random.Random,
    candidate_pool: int = 10,
) -> list[Configuration]:
    """Distance-maximizing random population.

    The first member is a plain uniform sample; each later member is the best
    of ``candidate_pool`` uniform samples, maximizing its minimum Euclidean
    distance (over normalized encodings) to the members chosen so far. All
    samples pass through correction, so every member validates.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    chosen = [space.sample_one(rng)]
    encodings = [space.encode(chosen[0], normalize=True)]
    while len(chosen) < n:
        best_config = None
        best_encoding = None
        best_score = -1.0
        for _ in range(candidate_pool):
            candidate = space.sample_one(rng)
            encoding = space.encode(candidate, normalize=True)
            score = min(_normalized_distance(encoding, e) for e in encodings)
            if score > best_score:
                best_config, best_encoding, best_score = candidate, encoding, score
        chosen.append(best_config)
        encodings.append(best_encoding)
    return chosen


def crossover_at(
    p1: Configuration, p2: Configuration, x1: int, x2: int
) -> tuple[Configuration, Configuration]:
    """Swap the canonical-order segment [x1, x2) between the parents."""
    if not 0 <= x1 < x2 <= 13:
        raise ValueError("cut points must satisfy 0 <= x1 < x2 <= 13")
    d1, d2 = p1.as_dict(), p2.as_dict()
    names = list(d1)
    c1, c2 = dict(d1), dict(d2)
    for name in names[x1:x2]:
        c1[name], c2[name] = d2[name], d1[name]
    return Configuration.from_dict(c1), Configuration.from_dict(c2)


def two_point_crossover(
    p1: Configuration, p2: Configuration, rng: random.Random
) -> tuple[Configuration, Configuration]:
    """Children swap a random middle segment; cut points 0 <= x1 < x2 <= 13.
    Children are returned uncorrected; the caller corrects after mutation."""
    x1, x2 = sorted(rng.sample(range(14), 2))
    return crossover_at(p1, p2, x1, x2)


def boundary_random_mutation(
    config: Configuration,
    space: ConfigurationSpace,
    rate: float,
    rng: random.Random,
) -> Configuration:
    """Independently resample each dimension with probability ``rate`` from
    its (pruned) range. Uncorrected; the caller corrects afterwards."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be in [0, 1]")
    changes = {}
    for dim in space.dimensions:
        if rng.random() < rate:
            changes[dim.name] = dim.sample(rng)
    return config.replace(**changes) if changes else config


def crowding_distances(objectives: list[ObjectiveVector]) -> list[float]:
    """NSGA-style crowding distance over one pool of objective vectors;
    boundary points per objective get infinity."""
    n = len(objectives)
    distances = [0.0] * n
    if n <= 2:
        return [math.inf] * n
    for axis in range(3):
        order = sorted(range(n), key=lambda idx: objectives[idx][axis])
        lo = objectives[order[0]][axis]
        hi = objectives[order[-1]][axis]
        distances[order[0]] = math.inf
        distances[order[-1]] = math.inf
        if hi == lo:
            continue
        for rank in range(1, n - 1):
            gap = (
                objectives[order[rank + 1]][axis] - objectives[order[rank - 1]][axis]
            ) / (hi - lo)
            if distances[order[rank]] != math.inf:
                distances[order[rank]] += gap
    return distances


def tournament_select(
    pool: list[Individual],
    count: int,
    tournament_size: int,
    rng: random.Random,
    crowding: list[float] | None = None,
) -> list[Individual]:
    """``count`` winners of independent tournaments drawn without replacement
    from the pool. Within a tournament, dominated entrants lose; mutually
    non-dominated entrants tie-break by larger pool-level crowding distance,
    then uniformly at random."""
    if not pool:
        raise ValueError("selection pool must be non-empty")
    if crowding is None:
        crowding = crowding_distances([ind.objectives for ind in pool])
    k = min(tournament_size, len(pool))
    winners = []
    for _ in range(count):
        entrant_indices = rng.sample(range(len(pool)), k)
        non_dominated = [
            i
            for i in entrant_indices
            if not any(
                dominates(pool[j].objectives, pool[i].objectives)
                for j in entrant_indices
                if j != i
            )
        ]
        best_crowding = max(crowding[i] for i in non_dominated)
        finalists = [i for i in non_dominated if crowding[i] == best_crowding]
        winners.append(pool[rng.choice(finalists)])
    return winners


def _staircase_area(points: list[tuple[float, float]], rx: float, ry: float) -> float:
    """Area dominated (toward +inf) by 2-d minimization points within the
    reference box corner (rx, ry)."""
    frontier = []
    min_y = math.inf
    for x, y in sorted(points):
        # x ascending: a point joins the staircase iff it strictly improves y.
        if y < min_y:
            frontier.append((x, y))
            min_y = y
    area = 0.0
    for idx, (x, y) in enumerate(frontier):
        next_x = frontier[idx + 1][0] if idx + 1 < len(frontier) else rx
        area += max(0.0, next_x - x) * max(0.0, ry - y)
    return area


def hypervolume(points: list[ObjectiveVector], reference: tuple[float, float, float]) -> float:
    """Volume dominated by the point set within the reference box
    (3 objectives, minimization), by sweeping distinct third-coordinate
    levels and accumulating 2-d staircase areas."""
    rx, ry, rz = reference
    clipped = [p for p in points if p[0] <= rx and p[1] <= ry and p[2] <= rz]
    if not clipped:
        return 0.0
    levels = sorted({p[2] for p in clipped})
    volume = 0.0
    for idx, z in enumerate(levels):
        upper = levels[idx + 1] if idx + 1 < len(levels) else rz
        active = [(p[0], p[1]) for p in clipped if p[2] <= z]
        volume += _staircase_area(active, rx, ry) * max(0.0, upper - z)
    return volume


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    archive_size: int
    hypervolume: float
    best_size_mb: float
    best_gflops: float
    best_effectiveness: float


@dataclass
class TuneResult:
    archive: ParetoArchive
    records: list[GenerationRecord]
    evaluations: dict[Configuration, ObjectiveVector]
    reference_point: tuple[float, float, float]
    params: TunerParams

    @property
    def evaluation_count(self) -> int:
        return len(self.evaluations)


def _effectiveness_callable(indicator, space: ConfigurationSpace) -> Callable[[Configuration], float]:
    """Accepts a fitted surrogate, an oracle, or a plain callable."""
    if hasattr(indicator, "predict_mean"):
        return lambda config: float(indicator.predict_mean(space.encode(config)))
    if hasattr(indicator, "evaluate"):
        return indicator.evaluate
    if callable(indicator):
        return indicator
    raise TypeError(
        "indicator must be a fitted surrogate, an oracle, or a callable"
    )


def tune(
    space: ConfigurationSpace,
    indicator,
    params: TunerParams,
    size_budget_mb: float | None = None,
) -> TuneResult:
    """Run the full generational loop and return the archive plus telemetry.

    ``indicator`` provides predicted effectiveness per configuration (fitted
    surrogate, oracle, or callable). When ``size_budget_mb`` is given, only
    individuals within the budget may enter the archive, so every front
    member honors the size constraint even where single-dimension pruning
    cannot exclude a combination.
    """
    effectiveness_of = _effectiveness_callable(indicator, space)
    rng = random.Random(params.seed)
    memo: dict[Configuration, ObjectiveVector] = {}

    def evaluate(config: Configuration) -> Individual:
        cached = memo.get(config)
        if cached is None:
            effectiveness = min(1.0, max(0.0, float(effectiveness_of(config))))
            cached = ObjectiveVector(
                size_mb=model_size_mb(config),
                gflops=forward_gflops(config),
                neg_effectiveness=-effectiveness,
            )
            if not all(math.isfinite(v) for v in cached):
                raise ValueError(f"non-finite objectives for {config}")
            memo[config] = cached
        return Individual(config=config, objectives=cached)

    def admissible(individual: Individual) -> bool:
        return size_budget_mb is None or individual.objectives.size_mb <= size_budget_mb

    archive = ParetoArchive()
    snapshots: list[list[ObjectiveVector]] = []

    population = [
        evaluate(config)
        for config in adaptive_random_init(space, params.population_size, rng)
    ]
    update_archive(archive, [ind for ind in population if admissible(ind)])
    snapshots.append(archive.objective_vectors())

    for _ in range(params.generations):
        order = list(range(len(population)))
        rng.shuffle(order)
        children: list[Configuration] = []
        for pair_start in range(0, len(order) - 1, 2):
            p1 = population[order[pair_start]].config
            p2 = population[order[pair_start + 1]].config
            if rng.random() < params.crossover_rate:
                c1, c2 = two_point_crossover(p1, p2, rng)
            else:
                c1, c2 = p1, p2
            children.extend((c1, c2))
        if len(order) % 2 == 1:
            children.append(population[order[-1]].config)

        offspring = []
        for child in children:
            mutated = boundary_random_mutation(child, space, params.mutation_rate, rng)
            offspring.append(evaluate(correct(mutated, space, rng)))

        update_archive(archive, [ind for ind in offspring if admissible(ind)])
        snapshots.append(archive.objective_vectors())

        pool = population + offspring
        population = tournament_select(
            pool, params.population_size, params.tournament_size, rng
        )

    # Telemetry: hypervolume uses one run-wide reference (the per-objective
    # maxima over every evaluation), so the per-generation series is
    # comparable and non-decreasing.
    all_points = list(memo.values())
    reference = (
        max(p[0] for p in all_points),
        max(p[1] for p in all_points),
        max(p[2] for p in all_points),
    )
    records = []
    for generation, snapshot in enumerate(snapshots):
        best_size = min((p[0] for p in snapshot), default=math.nan)
        best_gflops = min((p[1] for p in snapshot), default=math.nan)
        best_eff = max((-p[2] for p in snapshot), default=math.nan)
        records.append(
            GenerationRecord(
                generation=generation,
                archive_size=len(snapshot),
                hypervolume=hypervolume(snapshot, reference),
                best_size_mb=best_size,
                best_gflops=best_gflops,
                best_effectiveness=best_eff,
            )
        )
    return TuneResult(
        archive=archive,
        records=records,
        evaluations=memo,
        reference_point=reference,
        params=params,
    )


def select_deployment_config(archive: ParetoArchive, target_mb: float) -> Individual:
    """Archive member with size closest to the target; ties prefer higher
    predicted effectiveness, then lower GFLOPs."""
    members = list(archive)
    if not members:
        raise ValueError("archive is empty")
    return min(
        members,
        key=lambda ind: (
            abs(ind.objectives.size_mb - target_mb),
            ind.objectives.neg_effectiveness,
            ind.objectives.gflops,
        ),
    )

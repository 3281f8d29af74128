"""Size-budget pruning of a configuration space.

A value of a size-relevant dimension survives iff at least one configuration
containing it fits the byte budget. The size model is strictly increasing in
each size-relevant dimension, so that minimum is attained at the all-minimum
corner of the remaining dimensions and feasibility is a single closed-form
evaluation, no solver needed. The space is split along its largest integer
dimension into disjoint subspaces which are pruned in parallel and merged by
per-dimension union; the result is independent of the partition count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .costs import MEGABYTE, SIZE_RELEVANT_DIMENSIONS, parameter_file_bytes
from .space import (
    CANONICAL_DIMENSIONS,
    DISCRETE_NUMERIC_SET,
    INTEGER_RANGE,
    ConfigurationSpace,
    Dimension,
)


class EmptyFeasibleSpaceError(ValueError):
    """No configuration in the space satisfies the size budget."""


@dataclass(frozen=True)
class SizeConstraint:
    budget_mb: float = 3.0

    def __post_init__(self):
        if self.budget_mb <= 0:
            raise ValueError("budget_mb must be positive")

    def admits(self, size_bytes: int) -> bool:
        # Exact-byte comparison; scaling by 2**20 is lossless in binary floats.
        return size_bytes <= self.budget_mb * MEGABYTE


def min_corner_bytes(space: ConfigurationSpace, dim_name: str, value) -> int:
    """Smallest achievable size (bytes) over configurations fixing dim=value."""
    corner = {
        name: space.dimension(name).min_value() for name in SIZE_RELEVANT_DIMENSIONS
    }
    if dim_name in corner:
        corner[dim_name] = value
    return parameter_file_bytes(
        vocab_size=corner["vocab_size"],
        num_hidden_layers=corner["num_hidden_layers"],
        hidden_size=corner["hidden_size"],
        intermediate_size=corner["intermediate_size"],
        max_sequence_length=corner["max_sequence_length"],
    )


def is_feasible_value(space: ConfigurationSpace, dim_name: str, value, constraint: SizeConstraint) -> bool:
    """True iff some configuration with dim=value fits the budget."""
    if dim_name not in CANONICAL_DIMENSIONS:
        raise KeyError(f"unknown dimension {dim_name!r}")
    return constraint.admits(min_corner_bytes(space, dim_name, value))


def _largest_integer_dimension(space: ConfigurationSpace) -> Dimension:
    candidates = [d for d in space.dimensions if d.kind == INTEGER_RANGE]
    if not candidates:
        raise ValueError("space has no integer-range dimension to partition along")
    return max(candidates, key=lambda d: d.size())


def partition(space: ConfigurationSpace, n: int) -> list[ConfigurationSpace]:
    """n disjoint subspaces covering the space, split along the largest
    integer dimension into contiguous chunks; fewer when n exceeds it."""
    if n < 1:
        raise ValueError("partition count must be >= 1")
    split_dim = _largest_integer_dimension(space)
    total = split_dim.size()
    n = min(n, total)
    subspaces = []
    for k in range(n):
        lo = split_dim.lower + k * total // n
        hi = split_dim.lower + (k + 1) * total // n - 1
        chunk = Dimension(name=split_dim.name, kind=INTEGER_RANGE, lower=lo, upper=hi)
        subspaces.append(space.replace_dimension(chunk))
    return subspaces


def _feasible_values(subspace: ConfigurationSpace, constraint: SizeConstraint) -> dict:
    """Per size-relevant dimension, the values feasible within this subspace."""
    kept: dict[str, list] = {}
    for name in SIZE_RELEVANT_DIMENSIONS:
        dim = subspace.dimension(name)
        kept[name] = [
            v for v in dim.iter_values()
            if constraint.admits(min_corner_bytes(subspace, name, v))
        ]
    return kept


def prune(
    space: ConfigurationSpace,
    constraint: SizeConstraint,
    partitions: int = 1,
    max_workers: int | None = None,
) -> ConfigurationSpace:
    """Drop every size-relevant value that cannot appear in any configuration
    within budget. Non-size dimensions pass through unchanged. Deterministic
    and independent of the partition count."""
    subspaces = partition(space, partitions)
    if max_workers is None:
        max_workers = min(len(subspaces), os.cpu_count() or 1)
    if len(subspaces) == 1:
        results = [_feasible_values(subspaces[0], constraint)]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(
                pool.map(lambda sub: _feasible_values(sub, constraint), subspaces)
            )

    merged = {name: set() for name in SIZE_RELEVANT_DIMENSIONS}
    for chunk_result in results:
        for name, values in chunk_result.items():
            merged[name].update(values)

    new_dims = []
    for dim in space.dimensions:
        if dim.name not in merged:
            new_dims.append(dim)
            continue
        kept = merged[dim.name]
        if not kept:
            raise EmptyFeasibleSpaceError(
                f"no configuration fits {constraint.budget_mb} MB; even the "
                f"all-minimum corner exceeds the budget"
            )
        if dim.kind == INTEGER_RANGE:
            ordered = sorted(kept)
            # Monotone size model => feasible set is a prefix of the range.
            assert ordered[0] == dim.lower, f"{dim.name}: feasible set not a prefix"
            assert ordered[-1] - ordered[0] + 1 == len(ordered), (
                f"{dim.name}: feasible set not contiguous"
            )
            new_dims.append(
                Dimension(name=dim.name, kind=INTEGER_RANGE, lower=ordered[0], upper=ordered[-1])
            )
        else:
            assert dim.kind == DISCRETE_NUMERIC_SET
            cutoff = max(kept)
            assert kept == {v for v in dim.values if v <= cutoff}, (
                f"{dim.name}: feasible set not a prefix under value order"
            )
            new_dims.append(
                Dimension(
                    name=dim.name,
                    kind=DISCRETE_NUMERIC_SET,
                    values=tuple(v for v in dim.values if v in kept),
                )
            )
    return ConfigurationSpace(tuple(new_dims))


@dataclass(frozen=True)
class DimensionRetention:
    name: str
    original_count: int
    kept_count: int
    retained: str


@dataclass(frozen=True)
class PruneReport:
    budget_mb: float
    partitions: int
    original_cardinality: int
    pruned_cardinality: int
    retention: tuple[DimensionRetention, ...]

    @property
    def cardinality_ratio(self) -> float:
        return self.pruned_cardinality / self.original_cardinality

    def as_dict(self) -> dict:
        return {
            "budget_mb": self.budget_mb,
            "partitions": self.partitions,
            "original_cardinality": str(self.original_cardinality),
            "pruned_cardinality": str(self.pruned_cardinality),
            "cardinality_ratio": self.cardinality_ratio,
            "dimensions": [
                {
                    "name": r.name,
                    "original_count": r.original_count,
                    "kept_count": r.kept_count,
                    "retained": r.retained,
                }
                for r in self.retention
            ],
        }


def _describe(dim: Dimension) -> str:
    if dim.kind == INTEGER_RANGE:
        return f"[{dim.lower}, {dim.upper}]"
    if dim.kind == DISCRETE_NUMERIC_SET:
        return "{" + ", ".join(str(v) for v in dim.values) + "}"
    return "{" + ", ".join(dim.options) + "}"


def prune_report(
    original: ConfigurationSpace,
    pruned: ConfigurationSpace,
    constraint: SizeConstraint,
    partitions: int,
) -> PruneReport:
    retention = tuple(
        DimensionRetention(
            name=old.name,
            original_count=old.size(),
            kept_count=new.size(),
            retained=_describe(new),
        )
        for old, new in zip(original.dimensions, pruned.dimensions)
    )
    return PruneReport(
        budget_mb=constraint.budget_mb,
        partitions=partitions,
        original_cardinality=original.cardinality(),
        pruned_cardinality=pruned.cardinality(),
        retention=retention,
    )

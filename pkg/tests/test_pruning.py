import numpy as np
import pytest

from cfgtune import (
    EmptyFeasibleSpaceError,
    MEGABYTE,
    SIZE_RELEVANT_DIMENSIONS,
    SizeConstraint,
    is_feasible_value,
    min_corner_bytes,
    partition,
    prune,
    prune_report,
    space_from_mapping,
)
from conftest import MINI_SPACE_DOCUMENT


def downscaled_space():
    """Size-relevant dimensions restricted to small spread-out value sets so
    every configuration can be enumerated."""
    return space_from_mapping(
        {
            "tokenizer": ["Byte-Pair Encoding", "WordPiece"],
            "vocab_size": [1000, 2000, 4000, 8000, 16000, 32000],
            "num_hidden_layers": {"min": 1, "max": 12},
            "hidden_size": [16, 32, 64, 128, 256, 512],
            "hidden_act": ["GELU", "ReLU"],
            "hidden_dropout_prob": [0.1, 0.5],
            "intermediate_size": [16, 256, 1024, 3072],
            "num_attention_heads": {"min": 1, "max": 4},
            "attention_probs_dropout_prob": [0.1, 0.5],
            "max_sequence_length": [256, 384, 512],
            "position_embedding_type": ["absolute"],
            "learning_rate": [0.001],
            "batch_size": [16, 32],
        }
    )


def brute_force_retained_values(space, budget_mb):
    """Per size-relevant dimension, the values that occur in at least one
    within-budget combination, found by full vectorized enumeration."""
    axes = {
        name: np.array(list(space.dimension(name).iter_values()), dtype=np.int64)
        for name in SIZE_RELEVANT_DIMENSIONS
    }
    v, l, h, i, s = (
        axes["vocab_size"][:, None, None, None, None],
        axes["num_hidden_layers"][None, :, None, None, None],
        axes["hidden_size"][None, None, :, None, None],
        axes["intermediate_size"][None, None, None, :, None],
        axes["max_sequence_length"][None, None, None, None, :],
    )
    size = (
        4 * (v + s + 3) * h
        + 4 * (4 * h * h + (9 + 2 * i) * h + i) * l
        + 2 * h * h + 4 * h + 2
    )
    feasible = size <= budget_mb * MEGABYTE
    retained = {}
    for axis_index, name in enumerate(
        ["vocab_size", "num_hidden_layers", "hidden_size", "intermediate_size", "max_sequence_length"]
    ):
        reduce_axes = tuple(a for a in range(5) if a != axis_index)
        mask = feasible.any(axis=reduce_axes)
        retained[name] = [int(x) for x in axes[name][mask]]
    return retained


@pytest.mark.parametrize("partitions", [1, 3, 7])
def test_prune_equals_brute_force_on_downscaled_space(partitions):
    space = downscaled_space()
    budget = 0.35
    pruned = prune(space, SizeConstraint(budget), partitions=partitions)
    expected = brute_force_retained_values(space, budget)
    for name in SIZE_RELEVANT_DIMENSIONS:
        assert list(pruned.dimension(name).iter_values()) == expected[name], name
    # the budget actually bites in more than one dimension
    cut = [
        name
        for name in SIZE_RELEVANT_DIMENSIONS
        if pruned.dimension(name).size() < space.dimension(name).size()
    ]
    assert len(cut) >= 2


def test_prune_partition_invariance_full_space(canonical_space):
    results = [
        prune(canonical_space, SizeConstraint(3.0), partitions=k) for k in (1, 2, 13, 50)
    ]
    assert all(r == results[0] for r in results[1:])


def test_prune_full_space_known_bounds(canonical_space, pruned_space):
    vocab = pruned_space.dimension("vocab_size")
    hidden = pruned_space.dimension("hidden_size")
    assert vocab.upper < 50265  # the top of the vocabulary range cannot fit
    assert vocab.lower == 1000
    assert hidden.upper < 768
    # boundary witnesses: retained uppers fit, the next value would not
    budget_bytes = 3.0 * MEGABYTE
    for name in ("vocab_size", "hidden_size"):
        dim = pruned_space.dimension(name)
        assert min_corner_bytes(canonical_space, name, dim.upper) <= budget_bytes
        assert min_corner_bytes(canonical_space, name, dim.upper + 1) > budget_bytes
    # these dimensions survive whole
    for name in ("num_hidden_layers", "intermediate_size", "max_sequence_length"):
        assert pruned_space.dimension(name) == canonical_space.dimension(name)


def test_prune_leaves_non_size_dimensions_untouched(canonical_space, pruned_space):
    for name in (
        "tokenizer",
        "hidden_act",
        "hidden_dropout_prob",
        "num_attention_heads",
        "attention_probs_dropout_prob",
        "position_embedding_type",
        "learning_rate",
        "batch_size",
    ):
        assert pruned_space.dimension(name) == canonical_space.dimension(name)


def test_prune_with_huge_budget_is_identity(canonical_space):
    assert prune(canonical_space, SizeConstraint(1e6), partitions=4) == canonical_space


def test_prune_empty_feasible_set(canonical_space):
    with pytest.raises(EmptyFeasibleSpaceError):
        prune(canonical_space, SizeConstraint(0.00001))


def test_pruned_space_is_dimension_wise_subset(canonical_space, pruned_space):
    for old, new in zip(canonical_space.dimensions, pruned_space.dimensions):
        assert set(new.iter_values()) <= set(old.iter_values())


def test_prune_is_idempotent(canonical_space, pruned_space):
    assert prune(pruned_space, SizeConstraint(3.0), partitions=5) == pruned_space


def test_is_feasible_value_examples(canonical_space):
    c3 = SizeConstraint(3.0)
    assert is_feasible_value(canonical_space, "vocab_size", 1000, c3)
    assert not is_feasible_value(canonical_space, "vocab_size", 50265, c3)
    assert not is_feasible_value(canonical_space, "hidden_size", 768, c3)
    tiny = SizeConstraint(0.00001)
    assert not is_feasible_value(canonical_space, "vocab_size", 1000, tiny)
    with pytest.raises(KeyError):
        is_feasible_value(canonical_space, "unknown", 1, c3)


def test_is_feasible_value_size_irrelevant_dimension(canonical_space):
    # feasibility of a non-size dimension reduces to the global minimum corner
    assert is_feasible_value(canonical_space, "batch_size", 64, SizeConstraint(3.0))
    assert not is_feasible_value(
        canonical_space, "batch_size", 64, SizeConstraint(0.00001)
    )


def test_min_corner_bytes_anchor(canonical_space):
    assert min_corner_bytes(canonical_space, "vocab_size", 1000) == 87_938


def test_partition_covers_and_is_disjoint():
    # vocab is the widest integer range here, so it is the split dimension
    doc = dict(MINI_SPACE_DOCUMENT)
    doc["vocab_size"] = {"min": 1000, "max": 1099}  # 100 values
    space = space_from_mapping(doc)
    parts = partition(space, 7)
    assert len(parts) == 7
    chunks = [list(p.dimension("vocab_size").iter_values()) for p in parts]
    flat = [v for chunk in chunks for v in chunk]
    assert flat == list(range(1000, 1100))  # union = parent, order-contiguous
    assert len(set(flat)) == len(flat)  # pairwise disjoint
    for p in parts:  # only the split dimension changes
        for name in (n for n in MINI_SPACE_DOCUMENT if n != "vocab_size"):
            assert p.dimension(name) == space.dimension(name)


def test_partition_identity_and_oversubscription(canonical_space):
    assert partition(canonical_space, 1) == [canonical_space]
    doc = dict(MINI_SPACE_DOCUMENT)
    doc["vocab_size"] = {"min": 1000, "max": 1009}
    space = space_from_mapping(doc)
    parts = partition(space, 50)
    assert len(parts) == 10  # cannot split 10 values into more than 10 chunks
    assert all(p.dimension("vocab_size").size() == 1 for p in parts)


def test_partition_splits_largest_integer_dimension(canonical_space):
    parts = partition(canonical_space, 5)
    assert all(
        p.dimension("hidden_size") == canonical_space.dimension("hidden_size")
        for p in parts
    )
    sizes = [p.dimension("vocab_size").size() for p in parts]
    assert sum(sizes) == canonical_space.dimension("vocab_size").size()


def test_size_constraint_validation():
    with pytest.raises(ValueError):
        SizeConstraint(0.0)
    with pytest.raises(ValueError):
        SizeConstraint(-1.0)
    with pytest.raises(ValueError):
        prune(space_from_mapping(MINI_SPACE_DOCUMENT), SizeConstraint(1.0), partitions=0)


def test_prune_report_contents(canonical_space, pruned_space):
    report = prune_report(canonical_space, pruned_space, SizeConstraint(3.0), 13)
    assert report.budget_mb == 3.0
    assert report.partitions == 13
    assert 0.0 < report.cardinality_ratio < 1.0
    by_name = {r.name: r for r in report.retention}
    assert by_name["vocab_size"].kept_count < by_name["vocab_size"].original_count
    assert by_name["batch_size"].kept_count == 3
    payload = report.as_dict()
    assert payload["pruned_cardinality"] == str(pruned_space.cardinality())

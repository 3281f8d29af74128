"""Declarative model-configuration space: dimensions, validation, encoding, sampling.

The space is a flat product of 13 tunable settings of an encoder-style
transformer (tokenizer choice, vocabulary size, depth, widths, dropout rates,
sequence length, embedding type, and two training knobs). Spaces are loaded
from JSON documents, configurations are validated against them, and every
configuration can be encoded to a 13-component numeric vector for distance
computations and regression.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import random
from dataclasses import dataclass

CANONICAL_DIMENSIONS = (
    "tokenizer",
    "vocab_size",
    "num_hidden_layers",
    "hidden_size",
    "hidden_act",
    "hidden_dropout_prob",
    "intermediate_size",
    "num_attention_heads",
    "attention_probs_dropout_prob",
    "max_sequence_length",
    "position_embedding_type",
    "learning_rate",
    "batch_size",
)

# Dimensions whose values are strings; everything else is numeric.
CATEGORICAL_DIMENSIONS = frozenset(
    {"tokenizer", "hidden_act", "position_embedding_type"}
)

INTEGER_RANGE = "integer_range"
DISCRETE_NUMERIC_SET = "discrete_numeric_set"
CATEGORICAL = "categorical"


class SpaceFormatError(ValueError):
    """A space document is malformed. ``dimension`` names the offending entry."""

    def __init__(self, message: str, dimension: str | None = None):
        super().__init__(message)
        self.dimension = dimension


class UnsatisfiableSpaceError(ValueError):
    """No (hidden_size, num_attention_heads) pair in the space is valid."""


@dataclass(frozen=True)
class Dimension:
    """One tunable setting: an inclusive integer range, a fixed set of numbers,
    or a list of named options. Option/value order is fixed and defines the
    encoding index of each entry."""

    name: str
    kind: str
    lower: int = 0
    upper: int = 0
    values: tuple = ()
    options: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind == INTEGER_RANGE:
            if self.lower > self.upper:
                raise SpaceFormatError(
                    f"{self.name}: range lower bound {self.lower} exceeds upper "
                    f"bound {self.upper}",
                    dimension=self.name,
                )
        elif self.kind == DISCRETE_NUMERIC_SET:
            if not self.values:
                raise SpaceFormatError(
                    f"{self.name}: empty value set", dimension=self.name
                )
            if len(set(self.values)) != len(self.values):
                raise SpaceFormatError(
                    f"{self.name}: duplicate values", dimension=self.name
                )
        elif self.kind == CATEGORICAL:
            if not self.options:
                raise SpaceFormatError(
                    f"{self.name}: empty option list", dimension=self.name
                )
            if len(set(self.options)) != len(self.options):
                raise SpaceFormatError(
                    f"{self.name}: duplicate options", dimension=self.name
                )
        else:
            raise SpaceFormatError(
                f"{self.name}: unknown dimension kind {self.kind!r}",
                dimension=self.name,
            )

    def size(self) -> int:
        if self.kind == INTEGER_RANGE:
            return self.upper - self.lower + 1
        if self.kind == DISCRETE_NUMERIC_SET:
            return len(self.values)
        return len(self.options)

    def contains(self, value) -> bool:
        if self.kind == INTEGER_RANGE:
            return isinstance(value, int) and not isinstance(value, bool) and (
                self.lower <= value <= self.upper
            )
        if self.kind == DISCRETE_NUMERIC_SET:
            return value in self.values
        return value in self.options

    def iter_values(self):
        if self.kind == INTEGER_RANGE:
            return range(self.lower, self.upper + 1)
        if self.kind == DISCRETE_NUMERIC_SET:
            return iter(self.values)
        return iter(self.options)

    def min_value(self):
        if self.kind == INTEGER_RANGE:
            return self.lower
        if self.kind == DISCRETE_NUMERIC_SET:
            return min(self.values)
        raise TypeError(f"{self.name} is categorical; it has no numeric minimum")

    def max_value(self):
        if self.kind == INTEGER_RANGE:
            return self.upper
        if self.kind == DISCRETE_NUMERIC_SET:
            return max(self.values)
        raise TypeError(f"{self.name} is categorical; it has no numeric maximum")

    def sample(self, rng: random.Random):
        if self.kind == INTEGER_RANGE:
            return rng.randint(self.lower, self.upper)
        if self.kind == DISCRETE_NUMERIC_SET:
            return rng.choice(self.values)
        return rng.choice(self.options)

    def to_component(self, value) -> float:
        """Raw numeric encoding: categorical entries map to their option index."""
        if self.kind == CATEGORICAL:
            return float(self.options.index(value))
        return float(value)

    def from_component(self, component: float):
        if self.kind == CATEGORICAL:
            index = int(round(component))
            if not 0 <= index < len(self.options):
                raise ValueError(f"{self.name}: option index {component} out of range")
            return self.options[index]
        if self.kind == INTEGER_RANGE:
            return int(round(component))
        # discrete set: snap to the nearest stored value so members round-trip
        return min(self.values, key=lambda v: abs(float(v) - component))

    def normalize(self, value) -> float:
        """Affine map onto [0, 1]; single-valued dimensions map to 0."""
        if self.kind == CATEGORICAL:
            lo, hi = 0.0, float(len(self.options) - 1)
        else:
            lo, hi = float(self.min_value()), float(self.max_value())
        if hi <= lo:
            return 0.0
        return (self.to_component(value) - lo) / (hi - lo)

    def denormalize(self, unit: float):
        if self.kind == CATEGORICAL:
            if len(self.options) == 1:
                return self.options[0]
            return self.from_component(unit * (len(self.options) - 1))
        lo, hi = float(self.min_value()), float(self.max_value())
        if hi <= lo:
            return self.from_component(lo)
        return self.from_component(lo + unit * (hi - lo))

    def to_entry(self):
        """Entry in the JSON document form."""
        if self.kind == INTEGER_RANGE:
            return {"min": self.lower, "max": self.upper}
        if self.kind == DISCRETE_NUMERIC_SET:
            return list(self.values)
        return list(self.options)


@dataclass(frozen=True)
class Configuration:
    """One concrete assignment of all 13 dimensions."""

    tokenizer: str
    vocab_size: int
    num_hidden_layers: int
    hidden_size: int
    hidden_act: str
    hidden_dropout_prob: float
    intermediate_size: int
    num_attention_heads: int
    attention_probs_dropout_prob: float
    max_sequence_length: int
    position_embedding_type: str
    learning_rate: float
    batch_size: int

    def value(self, dimension_name: str):
        return getattr(self, dimension_name)

    def replace(self, **changes) -> "Configuration":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in CANONICAL_DIMENSIONS}

    @classmethod
    def from_dict(cls, mapping: dict) -> "Configuration":
        missing = [name for name in CANONICAL_DIMENSIONS if name not in mapping]
        if missing:
            raise ValueError(f"configuration missing fields: {', '.join(missing)}")
        return cls(**{name: mapping[name] for name in CANONICAL_DIMENSIONS})


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class ConfigurationSpace:
    """The 13 dimensions in canonical order, with encoding and sampling."""

    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        names = tuple(d.name for d in self.dimensions)
        if names != CANONICAL_DIMENSIONS:
            raise SpaceFormatError(
                "dimensions must be exactly the 13 canonical entries in canonical "
                f"order; got {names}"
            )

    def dimension(self, name: str) -> Dimension:
        for dim in self.dimensions:
            if dim.name == name:
                return dim
        raise KeyError(f"unknown dimension {name!r}")

    def replace_dimension(self, new_dim: Dimension) -> "ConfigurationSpace":
        dims = tuple(new_dim if d.name == new_dim.name else d for d in self.dimensions)
        return ConfigurationSpace(dims)

    def cardinality(self) -> int:
        """Exact number of distinct configurations (arbitrary-precision)."""
        product = 1
        for dim in self.dimensions:
            product *= dim.size()
        return product

    def validate(self, config: Configuration) -> ValidationResult:
        violations = []
        for dim in self.dimensions:
            value = config.value(dim.name)
            if not dim.contains(value):
                violations.append(f"{dim.name}: value {value!r} not in dimension")
        heads = config.num_attention_heads
        if not isinstance(heads, int) or heads < 1 or config.hidden_size % heads != 0:
            violations.append(
                f"hidden_size {config.hidden_size} not divisible by "
                f"num_attention_heads {heads}"
            )
        return ValidationResult(valid=not violations, violations=tuple(violations))

    def encode(self, config: Configuration, normalize: bool = False) -> tuple[float, ...]:
        """13-component numeric vector; categorical values become option indices.

        With ``normalize`` each component is mapped affinely onto [0, 1] using
        the dimension bounds (single-valued dimensions map to 0).
        """
        result = self.validate(config)
        if not result:
            raise ValueError(f"cannot encode invalid configuration: {result.violations}")
        if normalize:
            return tuple(dim.normalize(config.value(dim.name)) for dim in self.dimensions)
        return tuple(dim.to_component(config.value(dim.name)) for dim in self.dimensions)

    def decode(self, vector, normalized: bool = False) -> Configuration:
        components = list(vector)
        if len(components) != len(self.dimensions):
            raise ValueError(
                f"expected {len(self.dimensions)} components, got {len(components)}"
            )
        values = {}
        for dim, component in zip(self.dimensions, components):
            if normalized:
                values[dim.name] = dim.denormalize(component)
            else:
                values[dim.name] = dim.from_component(component)
        return Configuration.from_dict(values)

    def sample_uniform(self, n: int, seed: int) -> list[Configuration]:
        """n valid configurations, each dimension drawn independently and
        uniformly, then repaired by :func:`correct`. Deterministic per seed."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = random.Random(seed)
        return [self.sample_one(rng) for _ in range(n)]

    def sample_one(self, rng: random.Random) -> Configuration:
        raw = Configuration.from_dict(
            {dim.name: dim.sample(rng) for dim in self.dimensions}
        )
        return correct(raw, self, rng)

    def to_document(self) -> dict:
        return {dim.name: dim.to_entry() for dim in self.dimensions}

    def checksum(self) -> str:
        canonical = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _dimension_from_entry(name: str, entry) -> Dimension:
    if name in CATEGORICAL_DIMENSIONS:
        if not isinstance(entry, list) or not entry or not all(
            isinstance(x, str) for x in entry
        ):
            raise SpaceFormatError(
                f"{name}: expected a non-empty array of option strings",
                dimension=name,
            )
        return Dimension(name=name, kind=CATEGORICAL, options=tuple(entry))
    if isinstance(entry, dict):
        if set(entry) != {"min", "max"}:
            raise SpaceFormatError(
                f"{name}: range object must have exactly 'min' and 'max'",
                dimension=name,
            )
        lower, upper = entry["min"], entry["max"]
        if not isinstance(lower, int) or not isinstance(upper, int):
            raise SpaceFormatError(
                f"{name}: range bounds must be integers", dimension=name
            )
        return Dimension(name=name, kind=INTEGER_RANGE, lower=lower, upper=upper)
    if isinstance(entry, list):
        if not entry or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry
        ):
            raise SpaceFormatError(
                f"{name}: expected a non-empty array of numbers", dimension=name
            )
        return Dimension(name=name, kind=DISCRETE_NUMERIC_SET, values=tuple(entry))
    raise SpaceFormatError(
        f"{name}: entry must be a range object or an array", dimension=name
    )


def space_from_mapping(document: dict) -> ConfigurationSpace:
    """Build a space from a parsed JSON object; key order in the document is
    irrelevant, the canonical dimension order governs."""
    if not isinstance(document, dict):
        raise SpaceFormatError("space document must be a JSON object")
    unknown = set(document) - set(CANONICAL_DIMENSIONS)
    if unknown:
        name = sorted(unknown)[0]
        raise SpaceFormatError(f"unknown dimension {name!r}", dimension=name)
    missing = [name for name in CANONICAL_DIMENSIONS if name not in document]
    if missing:
        raise SpaceFormatError(
            f"missing dimension {missing[0]!r}", dimension=missing[0]
        )
    dims = tuple(
        _dimension_from_entry(name, document[name]) for name in CANONICAL_DIMENSIONS
    )
    return ConfigurationSpace(dims)


def parse_space(text: str) -> ConfigurationSpace:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpaceFormatError(f"space document is not valid JSON: {err}") from err
    return space_from_mapping(document)


def load_space(path) -> ConfigurationSpace:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_space(handle.read())


def save_space(space: ConfigurationSpace, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(space.to_document(), handle, indent=2)
        handle.write("\n")


def _divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, int(math.isqrt(n)) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def correct(config: Configuration, space: ConfigurationSpace, rng: random.Random) -> Configuration:
    """Repair a configuration so it satisfies :meth:`ConfigurationSpace.validate`.

    Out-of-dimension values are resampled uniformly from their dimension. If
    hidden_size is not divisible by the head count, the head count is redrawn
    uniformly from the in-range divisors of hidden_size; when no divisor is in
    range, hidden_size itself is redrawn as a multiple of an in-range head
    count. Already-valid configurations are returned unchanged.
    """
    changes = {}
    for dim in space.dimensions:
        if not dim.contains(config.value(dim.name)):
            changes[dim.name] = dim.sample(rng)
    if changes:
        config = config.replace(**changes)

    heads_dim = space.dimension("num_attention_heads")
    hidden_dim = space.dimension("hidden_size")
    heads = config.num_attention_heads
    hidden = config.hidden_size
    if isinstance(heads, int) and heads >= 1 and hidden % heads == 0:
        return config

    for _ in range(100):
        candidates = [d for d in _divisors(hidden) if heads_dim.contains(d)]
        if candidates:
            return config.replace(hidden_size=hidden, num_attention_heads=rng.choice(candidates))
        # No in-range divisor: draw a head count, then a multiple of it, so the
        # repaired pair is valid by construction.
        head_choices = [
            h for h in heads_dim.iter_values()
            if isinstance(h, int) and h >= 1 and _has_multiple_in(hidden_dim, h)
        ]
        if not head_choices:
            raise UnsatisfiableSpaceError(
                "no hidden_size in range is divisible by any in-range head count"
            )
        head = rng.choice(head_choices)
        hidden = _sample_multiple(hidden_dim, head, rng)

    candidates = [d for d in _divisors(config.hidden_size) if heads_dim.contains(d)]
    if candidates:
        return config.replace(num_attention_heads=max(candidates))
    if heads_dim.contains(1):
        return config.replace(num_attention_heads=1)
    raise UnsatisfiableSpaceError(
        "no hidden_size in range is divisible by any in-range head count"
    )


def _has_multiple_in(dim: Dimension, factor: int) -> bool:
    if dim.kind == INTEGER_RANGE:
        return (dim.lower + factor - 1) // factor * factor <= dim.upper
    return any(isinstance(v, int) and v % factor == 0 for v in dim.values)


def _sample_multiple(dim: Dimension, factor: int, rng: random.Random) -> int:
    if dim.kind == INTEGER_RANGE:
        first = (dim.lower + factor - 1) // factor
        last = dim.upper // factor
        return factor * rng.randint(first, last)
    multiples = [v for v in dim.values if isinstance(v, int) and v % factor == 0]
    return rng.choice(multiples)

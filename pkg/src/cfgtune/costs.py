"""Analytic cost models: parameter-file size, forward-pass FLOPs, emissions.

Size is computed in exact integer bytes from closed-form parameter counts
(float32 weights, float16 classifier head) and only converted to MB at the
edge; 1 MB = 2**20 bytes. The FLOPs model is a standard per-layer count of
the dense matrix multiplies in an encoder forward pass at full sequence
length, reported in units of 1e9.
"""

from __future__ import annotations

from dataclasses import dataclass

from .space import Configuration

MEGABYTE = 1 << 20

# Dimensions that the size model actually reads. The head count only reshapes
# the projection matrices, it does not change the parameter count.
SIZE_RELEVANT_DIMENSIONS = (
    "vocab_size",
    "num_hidden_layers",
    "hidden_size",
    "intermediate_size",
    "max_sequence_length",
)

# kg CO2 per kWh. Chosen so a 0.32 kWh training run emits 0.14 kg.
DEFAULT_CARBON_INTENSITY = 0.4375


def embedding_bytes(vocab_size: int, hidden_size: int, max_sequence_length: int) -> int:
    """Token + position + type embeddings, their LayerNorm, all float32.

    Rows: vocab_size token vectors, max_sequence_length position vectors,
    2 token-type vectors, plus 2 LayerNorm parameter vectors, and one spare
    row kept for padding-index compatibility is already folded into the +3
    term together with the norm vectors: total (v + s + 3) vectors of width h.
    """
    return 4 * (vocab_size + max_sequence_length + 3) * hidden_size


def transformer_bytes(num_hidden_layers: int, hidden_size: int, intermediate_size: int) -> int:
    """All encoder layers, float32.

    Per layer: 4 attention projection matrices (4h^2) with biases (4h), the
    attention-output LayerNorm (2h), the feed-forward up/down projections
    (2ih) with biases (i + h), and the output LayerNorm (2h): in total
    4h^2 + (9 + 2i)h + i parameters.
    """
    h, i = hidden_size, intermediate_size
    per_layer = 4 * h * h + (9 + 2 * i) * h + i
    return 4 * per_layer * num_hidden_layers


def classifier_bytes(hidden_size: int) -> int:
    """Pooler (h^2 + h) plus a binary head (2h + 2), stored in float16."""
    h = hidden_size
    return 2 * h * h + 4 * h + 2


@dataclass(frozen=True)
class SizeBreakdown:
    """Exact byte counts per model part; MB views divide by 2**20 at the edge."""

    embedding_bytes: int
    transformer_bytes: int
    classifier_bytes: int

    @property
    def total_bytes(self) -> int:
        return self.embedding_bytes + self.transformer_bytes + self.classifier_bytes

    @property
    def embedding_mb(self) -> float:
        return self.embedding_bytes / MEGABYTE

    @property
    def transformer_mb(self) -> float:
        return self.transformer_bytes / MEGABYTE

    @property
    def classifier_mb(self) -> float:
        return self.classifier_bytes / MEGABYTE

    @property
    def total_mb(self) -> float:
        return self.total_bytes / MEGABYTE


def parameter_file_bytes(
    vocab_size: int,
    num_hidden_layers: int,
    hidden_size: int,
    intermediate_size: int,
    max_sequence_length: int,
) -> int:
    return (
        embedding_bytes(vocab_size, hidden_size, max_sequence_length)
        + transformer_bytes(num_hidden_layers, hidden_size, intermediate_size)
        + classifier_bytes(hidden_size)
    )


def model_size_breakdown(config: Configuration) -> SizeBreakdown:
    return SizeBreakdown(
        embedding_bytes=embedding_bytes(
            config.vocab_size, config.hidden_size, config.max_sequence_length
        ),
        transformer_bytes=transformer_bytes(
            config.num_hidden_layers, config.hidden_size, config.intermediate_size
        ),
        classifier_bytes=classifier_bytes(config.hidden_size),
    )


def model_size_mb(config: Configuration) -> float:
    return model_size_breakdown(config).total_mb


def forward_pass_flops(config: Configuration) -> int:
    """Dense multiply-add count for one forward pass at full sequence length.

    Per layer: QKV + output projections 8sh^2, attention score and mixing
    matmuls 4s^2h, feed-forward 4shi; plus the pooler/classifier 4h^2.
    """
    s = config.max_sequence_length
    h = config.hidden_size
    i = config.intermediate_size
    l = config.num_hidden_layers
    per_layer = 8 * s * h * h + 4 * s * s * h + 4 * s * h * i
    return l * per_layer + 4 * h * h


def forward_gflops(config: Configuration) -> float:
    return forward_pass_flops(config) / 1e9


def training_energy_kwh(runtime_hours: float, average_power_kw: float) -> float:
    if runtime_hours < 0 or average_power_kw < 0:
        raise ValueError("runtime and power must be non-negative")
    return runtime_hours * average_power_kw


def co2_emissions_kg(
    energy_kwh: float, carbon_intensity: float = DEFAULT_CARBON_INTENSITY
) -> float:
    if energy_kwh < 0 or carbon_intensity < 0:
        raise ValueError("energy and carbon intensity must be non-negative")
    return energy_kwh * carbon_intensity


@dataclass(frozen=True)
class CostReport:
    """All analytic costs of one configuration, plus optional emissions."""

    size: SizeBreakdown
    gflops: float
    energy_kwh: float | None = None
    co2_kg: float | None = None


def cost_report(
    config: Configuration,
    runtime_hours: float | None = None,
    average_power_kw: float | None = None,
    carbon_intensity: float = DEFAULT_CARBON_INTENSITY,
) -> CostReport:
    energy = co2 = None
    if runtime_hours is not None and average_power_kw is not None:
        energy = training_energy_kwh(runtime_hours, average_power_kw)
        co2 = co2_emissions_kg(energy, carbon_intensity)
    return CostReport(
        size=model_size_breakdown(config),
        gflops=forward_gflops(config),
        energy_kwh=energy,
        co2_kg=co2,
    )

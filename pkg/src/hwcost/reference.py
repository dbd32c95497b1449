"""Embedded published reference numbers for the compare command.

Two read-only tables: network-level runtime predictions (ms) of the Paleo
and NeuralPower model families against measured runtimes on common CNNs,
and the layer-level model comparison (model size, RMSPE %, RMSE ms). These
anchor the regression tests; any edit here fails the suite.
"""

from __future__ import annotations

from dataclasses import dataclass

# (network, paleo_ms, neuralpower_ms, actual_ms)
NETWORK_RUNTIMES: tuple[tuple[str, float, float, float], ...] = (
    ("VGG-16", 345.83, 373.82, 368.42),
    ("AlexNet", 33.16, 43.41, 39.02),
    ("NIN", 45.68, 62.62, 50.66),
    ("Overfeat", 114.71, 195.21, 197.99),
    ("CIFAR10-6conv", 28.75, 51.13, 50.09),
)

# (layer kind, np model size, np rmspe %, np rmse ms, paleo rmspe %, paleo rmse ms)
LAYER_MODELS: tuple[tuple[str, int, float, float, float, float], ...] = (
    ("CONV", 60, 39.97, 1.019, 58.29, 4.304),
    ("FC", 17, 41.92, 0.7474, 73.76, 0.8265),
    ("Pool", 31, 11.41, 0.0686, 79.91, 1.763),
)


@dataclass(frozen=True)
class NetworkErrorRow:
    network: str
    paleo_ms: float
    neuralpower_ms: float
    actual_ms: float
    paleo_error_pct: float
    neuralpower_error_pct: float


def relative_errors() -> tuple[NetworkErrorRow, ...]:
    """Signed relative error (%) of each family against the measured runtime."""
    rows = []
    for network, paleo, neuralpower, actual in NETWORK_RUNTIMES:
        rows.append(NetworkErrorRow(
            network, paleo, neuralpower, actual,
            100.0 * (paleo - actual) / actual,
            100.0 * (neuralpower - actual) / actual,
        ))
    return tuple(rows)

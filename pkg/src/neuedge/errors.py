"""Shared exception types."""


class NeuEdgeError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(NeuEdgeError):
    """Shape mismatch between connected components (layer chain, train vs net)."""


class SimulationError(NeuEdgeError):
    """Invalid state encountered while simulating (NaN weights, bad params)."""


class EncodingError(NeuEdgeError):
    """Invalid encoder input or configuration."""


class CapacityError(NeuEdgeError):
    """Chip cannot hold the network under the given capacity constraints."""


class MappingError(NeuEdgeError):
    """Invalid neuron-to-core assignment."""


class ConfigError(NeuEdgeError):
    """Malformed config, dataset, or network file."""

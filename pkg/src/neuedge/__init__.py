"""NeuEdge toolkit: hybrid spike encoding, LIF simulation, hardware-aware
surrogate-gradient training, core mapping, runtime threshold adaptation, and
event-driven energy accounting on a modeled neuromorphic chip."""

from .adapt import ActivityStat, AdaptConfig, adapt_threshold, run_adaptive
from .encoding import (
    EfficiencyReport,
    EncoderConfig,
    decode,
    decode_rate,
    encode,
    encode_hybrid,
    encode_latency,
    encode_rate,
    spike_efficiency,
)
from .energy import EnergyReport, account, compare
from .errors import (
    CapacityError,
    ConfigError,
    DimensionError,
    EncodingError,
    MappingError,
    NeuEdgeError,
    SimulationError,
)
from .mapping import (
    CHIP_PRESETS,
    ChipModel,
    Mapping,
    MapperConfig,
    build_graph,
    hw_loss,
    map_greedy,
    map_optimize,
    utilization_report,
)
from .snn import (
    LayerSpec,
    NetworkTopology,
    NeuronParams,
    SimState,
    SpikeTrain,
    classify,
    conv2d_layer,
    dense_layer,
    pool2x2_layer,
    run_network,
)
from .training import (
    LossBreakdown,
    TrainConfig,
    backward,
    forward_with_trace,
    train,
)

__version__ = "0.1.0"

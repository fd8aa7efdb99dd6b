"""wotble: WoT protocol binding toolkit for Bluetooth LE GATT.

Parses Thing Descriptions annotated with the Simple Bluetooth and Binary
Data vocabularies, maps abstract WoT operations onto GATT methods, encodes
and decodes application/x.binary-data-stream payloads, and executes
interactions over a pluggable transport. Ships with a deterministic
simulated peripheral network and a latency benchmark harness.
"""

from . import errors
from .bench import BenchPlan, BenchStats, load_bench_plan, run_bench, time_operation
from .binding import (
    GattMethod,
    ResolvedRequest,
    WotOperation,
    map_operation,
    resolve_form,
)
from .clock import RealClock, VirtualClock
from .codec import (
    BINARY_DATA_STREAM,
    BdoSpec,
    Endianess,
    VariableSpec,
    VariableType,
    compile_pattern,
    decode,
    encode,
    get_codec,
    register_codec,
)
from .consumer import ConnectionPolicy, ConsumedThing, Subscription, consume, expose
from .td import (
    Affordance,
    BleMetadata,
    Diagnostic,
    DiagnosticCode,
    Form,
    GapRole,
    Severity,
    ThingDescription,
    parse_td,
    parse_td_file,
    validate_td,
)
from .transport import (
    GattTree,
    SimCharacteristic,
    SimNetwork,
    SimPeripheral,
    SimTransport,
    TransportContract,
    create_host_transport,
    load_sim_config,
    register_host_backend,
)
from .uris import GattUri, expand_uuid, format_gatt_uri, parse_gatt_uri

__version__ = "0.1.0"

__all__ = [
    "Affordance",
    "BdoSpec",
    "BenchPlan",
    "BenchStats",
    "BINARY_DATA_STREAM",
    "BleMetadata",
    "ConnectionPolicy",
    "ConsumedThing",
    "Diagnostic",
    "DiagnosticCode",
    "Endianess",
    "Form",
    "GapRole",
    "GattMethod",
    "GattTree",
    "GattUri",
    "RealClock",
    "ResolvedRequest",
    "Severity",
    "SimCharacteristic",
    "SimNetwork",
    "SimPeripheral",
    "SimTransport",
    "Subscription",
    "ThingDescription",
    "TransportContract",
    "VariableSpec",
    "VariableType",
    "VirtualClock",
    "WotOperation",
    "compile_pattern",
    "consume",
    "create_host_transport",
    "decode",
    "encode",
    "errors",
    "expand_uuid",
    "expose",
    "format_gatt_uri",
    "get_codec",
    "load_bench_plan",
    "load_sim_config",
    "map_operation",
    "parse_gatt_uri",
    "parse_td",
    "parse_td_file",
    "register_codec",
    "register_host_backend",
    "resolve_form",
    "run_bench",
    "time_operation",
    "validate_td",
]

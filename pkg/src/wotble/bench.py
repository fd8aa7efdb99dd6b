"""Latency benchmark harness.

Times the three session operations the way a user experiences them, on
elapsed real time rather than process time:

* connect: from issuing the command until characteristics are usable, which
  covers finding the device, establishing the connection, and exploring the
  GATT structure;
* disconnect: from the command until the session is confirmed down;
* read: from the command until the decoded value is available.

Each operation runs a configurable number of repetitions after discarded
warmup runs; results report the arithmetic mean and the standard error of
the mean (sample standard deviation over the square root of the count).
"""

from __future__ import annotations

import io
import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .clock import RealClock
from .consumer import ConnectionPolicy, ConsumedThing, consume
from .errors import AllSamplesFailed, NotConnected, PlanError
from .td import parse_td_file
from .transport import SimTransport, create_host_transport, load_sim_config

BENCH_OPERATIONS = ("connect", "disconnect", "read")

CSV_HEADER = "operation,n,mean_ms,sem_ms"


@dataclass(frozen=True)
class BenchStats:
    """Summary of N timed runs of one operation."""

    operation: str
    n: int
    mean_ms: float
    sem_ms: float
    samples: tuple[float, ...] = ()
    failures: int = 0

    @classmethod
    def from_samples(cls, operation: str, samples, failures: int = 0) -> "BenchStats":
        samples = tuple(samples)
        if not samples:
            raise AllSamplesFailed(f"no successful {operation!r} samples")
        mean = statistics.fmean(samples)
        sem = statistics.stdev(samples) / math.sqrt(len(samples)) if len(samples) > 1 else 0.0
        return cls(operation=operation, n=len(samples), mean_ms=mean, sem_ms=sem,
                   samples=samples, failures=failures)


@dataclass(frozen=True)
class BenchPlan:
    """What to measure: TD, operations, repetitions, transport, seed."""

    td_path: Path
    operations: tuple[str, ...]
    repetitions: int = 25
    warmup: int = 1
    transport: str = "sim:network.sim.json"
    seed: int | None = None
    property: str | None = None
    policy: ConnectionPolicy = ConnectionPolicy.KEEP_CONNECTED
    timeout_ms: float = 10_000.0

    def __post_init__(self):
        if self.repetitions < 1:
            raise PlanError("repetitions must be >= 1")
        if self.warmup < 0:
            raise PlanError("warmup must be >= 0")
        unknown = [op for op in self.operations if op not in BENCH_OPERATIONS]
        if unknown or not self.operations:
            raise PlanError(
                f"operations must be a non-empty subset of {BENCH_OPERATIONS}, "
                f"got {list(self.operations)}"
            )
        if "read" in self.operations and not self.property:
            raise PlanError("a 'read' benchmark needs a property name")


def load_bench_plan(path) -> BenchPlan:
    """Read a plan file; relative td/config paths resolve against its folder."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PlanError(f"cannot read bench plan {path}: {exc}") from exc
    if not isinstance(raw, dict) or "td" not in raw:
        raise PlanError("bench plan must be an object with a 'td' path")
    base = path.parent

    transport = raw.get("transport", "sim:network.sim.json")
    if transport.startswith("sim:"):
        transport = "sim:" + str((base / transport[4:]).resolve())

    operations = raw.get("operations", list(BENCH_OPERATIONS))
    if isinstance(operations, str):
        operations = [operations]

    try:
        policy = ConnectionPolicy(raw.get("policy", "keep_connected"))
    except ValueError as exc:
        raise PlanError(f"unknown policy {raw.get('policy')!r}") from exc

    try:
        return BenchPlan(
            td_path=(base / raw["td"]).resolve(),
            operations=tuple(operations),
            repetitions=raw.get("repetitions", 25),
            warmup=raw.get("warmup", 1),
            transport=transport,
            seed=raw.get("seed"),
            property=raw.get("property"),
            policy=policy,
            timeout_ms=raw.get("timeoutMs", 10_000.0),
        )
    except TypeError as exc:
        raise PlanError(f"bad bench plan field: {exc}") from exc


def time_operation(operation: str, thing: ConsumedThing, clock,
                   property_name: str | None = None) -> float:
    """Time one run of an operation; returns elapsed milliseconds."""
    if operation == "connect":
        start = clock.monotonic()
        thing.connect()
    elif operation == "disconnect":
        if not thing.connected:
            raise NotConnected("disconnect timed while not connected")
        start = clock.monotonic()
        thing.disconnect()
    elif operation == "read":
        start = clock.monotonic()
        thing.read_property(property_name)
    else:
        raise PlanError(f"unknown benchmark operation {operation!r}")
    return (clock.monotonic() - start) * 1000.0


def _prepare(operation: str, thing: ConsumedThing) -> None:
    if operation == "connect":
        thing.disconnect()
    elif operation == "disconnect":
        thing.connect()


def run_bench(plan: BenchPlan, clock=None, transport=None) -> list[BenchStats]:
    """Execute a plan and return one BenchStats per operation.

    ``clock`` switches the simulated network (and the timers) onto virtual
    time; the default is the real monotonic clock. Failed repetitions are
    excluded from the statistics and counted separately.
    """
    if transport is None:
        transport = _create_transport(plan, clock)
    timer = getattr(transport, "clock", None) or clock or RealClock()
    thing = consume(parse_td_file(plan.td_path), transport, plan.policy)

    results: list[BenchStats] = []
    for operation in plan.operations:
        if operation == "read" and plan.policy is ConnectionPolicy.KEEP_CONNECTED:
            thing.connect()  # keep the timed window free of connection setup
        samples: list[float] = []
        failures = 0
        for index in range(plan.warmup + plan.repetitions):
            _prepare(operation, thing)
            try:
                elapsed = time_operation(operation, thing, timer, plan.property)
            except Exception:
                if index >= plan.warmup:
                    failures += 1
                continue
            if index >= plan.warmup:
                samples.append(elapsed)
        if not samples:
            raise AllSamplesFailed(
                f"all {plan.repetitions} {operation!r} repetitions failed"
            )
        results.append(BenchStats.from_samples(operation, samples, failures))
        thing.disconnect()
    return results


def _create_transport(plan: BenchPlan, clock):
    if plan.transport.startswith("sim:"):
        network = load_sim_config(plan.transport[4:], clock=clock, seed=plan.seed)
        return SimTransport(network, timeout_s=plan.timeout_ms / 1000.0)
    if plan.transport == "host":
        return create_host_transport()
    raise PlanError(f"unknown transport {plan.transport!r}; use 'sim:<path>' or 'host'")


# --- output formats ------------------------------------------------------------


def format_table(stats: list[BenchStats], device: str) -> str:
    """Render the device row layout: one column per operation, mean ± sem."""
    by_op = {s.operation: s for s in stats}
    headers = ["Device"] + [f"{op.capitalize() if op != 'read' else op} / ms"
                            for op in BENCH_OPERATIONS if op in by_op]
    cells = [device]
    for op in BENCH_OPERATIONS:
        if op in by_op:
            s = by_op[op]
            cells.append(f"{s.mean_ms:.2f} ± {s.sem_ms:.2f}")
    widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
    lines = [
        " | ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "-+-".join("-" * w for w in widths),
        " | ".join(c.ljust(w) for c, w in zip(cells, widths)),
    ]
    footnotes = [f"{s.operation}: N={s.n}" + (f", failures={s.failures}" if s.failures else "")
                 for s in stats]
    lines.append("(" + "; ".join(footnotes) + ")")
    return "\n".join(lines)


def to_csv(stats: list[BenchStats]) -> str:
    """Machine-readable summary; floats use shortest round-trip repr."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for s in stats:
        out.write(f"{s.operation},{s.n},{s.mean_ms!r},{s.sem_ms!r}\n")
    return out.getvalue()


def from_csv(text: str) -> list[BenchStats]:
    lines = [line for line in text.strip().splitlines() if line]
    if not lines or lines[0] != CSV_HEADER:
        raise PlanError(f"expected CSV header {CSV_HEADER!r}")
    stats = []
    for line in lines[1:]:
        operation, n, mean_ms, sem_ms = line.split(",")
        stats.append(BenchStats(operation=operation, n=int(n),
                                mean_ms=float(mean_ms), sem_ms=float(sem_ms)))
    return stats


def to_json(stats: list[BenchStats]) -> str:
    return json.dumps([
        {
            "operation": s.operation,
            "n": s.n,
            "mean_ms": s.mean_ms,
            "sem_ms": s.sem_ms,
            "failures": s.failures,
            "samples_ms": list(s.samples),
        }
        for s in stats
    ], indent=2)

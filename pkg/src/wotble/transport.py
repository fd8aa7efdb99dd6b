"""GATT central transport contract and the in-process simulated backend.

:class:`TransportContract` is the portable surface every backend implements.
The shipped backend is :class:`SimTransport`, a central talking to a
:class:`SimNetwork` of simulated peripherals. The simulation models the one
latency that dominates connection establishment: a scanning central first
observes a peripheral after a delay uniformly distributed over its
advertising interval, plus a configurable fixed processing delay. All waits
go through a pluggable clock, so tests can run on virtual time.

A host-OS Bluetooth backend can be plugged in through
:func:`register_host_backend`; none ships with the package.
"""

from __future__ import annotations

import abc
import json
import random
import threading
import uuid as uuidlib
from dataclasses import dataclass, field
from pathlib import Path
from queue import SimpleQueue
from typing import Callable

from .binding import GattMethod
from .clock import RealClock
from .errors import (
    Busy,
    DuplicateDevice,
    InvalidConfig,
    MethodNotPermitted,
    NoSuchAttribute,
    NotConnectable,
    NotConnected,
    NotFound,
    Timeout,
    TransportUnavailable,
    ValueTooLong,
)
from .uris import GattUri, normalize_mac, parse_uuid

MAX_VALUE_OCTETS = 512

Sink = Callable[[bytes], None]


@dataclass(frozen=True)
class Session:
    """Handle for one established central-to-peripheral connection."""

    device_id: str


@dataclass(frozen=True)
class GattTree:
    """Services and characteristics found while exploring a device."""

    services: dict

    def characteristics(self, service: uuidlib.UUID):
        return self.services.get(service, ())


class TransportContract(abc.ABC):
    """Abstract GATT central.

    read/write/subscribe require a prior successful connect; a write with
    response completes only after the server confirms, without response on
    send.
    """

    @abc.abstractmethod
    def start_discovery(self) -> None: ...

    @abc.abstractmethod
    def stop_discovery(self) -> None: ...

    @abc.abstractmethod
    def connect(self, device_id: str) -> Session: ...

    @abc.abstractmethod
    def disconnect(self, device_id: str) -> None: ...

    @abc.abstractmethod
    def discover_gatt(self, device_id: str) -> GattTree: ...

    @abc.abstractmethod
    def read(self, uri: GattUri) -> bytes: ...

    @abc.abstractmethod
    def write(self, uri: GattUri, payload: bytes, with_response: bool) -> None: ...

    @abc.abstractmethod
    def subscribe(self, uri: GattUri, sink: Sink): ...

    @abc.abstractmethod
    def unsubscribe(self, handle) -> None: ...


# --- simulated peripherals ------------------------------------------------------


@dataclass
class WriteRecord:
    timestamp_s: float
    payload: bytes
    with_response: bool


class SimCharacteristic:
    """One characteristic: a value, its allowed methods, and a write log."""

    def __init__(self, value: bytes = b"", allowed=(GattMethod.READ,),
                 notify_source: tuple[bytes, ...] = ()):
        value = bytes(value)
        if len(value) > MAX_VALUE_OCTETS:
            raise InvalidConfig(
                f"characteristic value is {len(value)} octets, max {MAX_VALUE_OCTETS}"
            )
        self.value = value
        self.allowed = frozenset(allowed)
        self.notify_source = tuple(bytes(v) for v in notify_source)
        self.write_log: list[WriteRecord] = []
        self._notify_cursor = 0


class SimPeripheral:
    """Definition plus runtime state of one simulated device."""

    def __init__(self, device_id: str, advertising_interval_ms: float,
                 connectable: bool = True, services: dict | None = None):
        self.device_id = normalize_mac(device_id)
        if advertising_interval_ms <= 0:
            raise InvalidConfig("advertising interval must be > 0 ms")
        self.advertising_interval_ms = float(advertising_interval_ms)
        self.connectable = bool(connectable)
        self.services: dict = services or {}
        self.connected_by = None  # the SimTransport holding the single connection

    def characteristic(self, service: uuidlib.UUID, characteristic: uuidlib.UUID
                       ) -> SimCharacteristic:
        try:
            return self.services[service][characteristic]
        except KeyError:
            raise NoSuchAttribute(
                f"{self.device_id} has no characteristic {characteristic} "
                f"under service {service}"
            ) from None

    def gatt_tree(self) -> GattTree:
        return GattTree(services={
            svc: tuple((char, chr_obj.allowed) for char, chr_obj in chars.items())
            for svc, chars in self.services.items()
        })


class _Subscription:
    def __init__(self, uri: GattUri, sink: Sink, transport: "SimTransport"):
        self.uri = uri
        self.sink = sink
        self.transport = transport
        self.active = True
        self.delivering = False


class SimNetwork:
    """A set of simulated peripherals sharing one clock and RNG.

    Any number of :class:`SimTransport` centrals may attach; each peripheral
    accepts a single connection at a time. Notification delivery runs on a
    dedicated worker thread, never on the subscriber's calling thread.
    """

    def __init__(self, clock=None, seed: int | None = None, auto_notify: bool = True,
                 processing_delay_ms: float = 0.0, connect_setup_ms: float = 0.0,
                 read_latency_ms: float = 0.0, write_latency_ms: float = 0.0,
                 disconnect_latency_ms: float = 0.0):
        self.clock = clock if clock is not None else RealClock()
        self.auto_notify = auto_notify
        self.processing_delay_ms = processing_delay_ms
        self.connect_setup_ms = connect_setup_ms
        self.read_latency_ms = read_latency_ms
        self.write_latency_ms = write_latency_ms
        self.disconnect_latency_ms = disconnect_latency_ms
        self._rng = random.Random(seed)
        self._rng_lock = threading.Lock()
        self._peripherals: dict[str, SimPeripheral] = {}
        self._lock = threading.RLock()
        self._cond = threading.Condition(self._lock)
        self._subscriptions: dict[tuple, list[_Subscription]] = {}
        self._queue: SimpleQueue = SimpleQueue()
        self._worker = threading.Thread(target=self._deliver_loop, daemon=True)
        self._worker.start()

    # -- definition

    def define_peripheral(self, peripheral: SimPeripheral) -> SimPeripheral:
        with self._lock:
            if peripheral.device_id in self._peripherals:
                raise DuplicateDevice(f"device {peripheral.device_id} already defined")
            self._peripherals[peripheral.device_id] = peripheral
        return peripheral

    def peripheral(self, device_id: str) -> SimPeripheral:
        mac = normalize_mac(device_id)
        with self._lock:
            try:
                return self._peripherals[mac]
            except KeyError:
                raise NotFound(f"no simulated device {mac}") from None

    def peripherals(self) -> list[SimPeripheral]:
        with self._lock:
            return list(self._peripherals.values())

    def characteristic(self, device_id: str, service, characteristic) -> SimCharacteristic:
        svc = service if isinstance(service, uuidlib.UUID) else parse_uuid(str(service))
        chr_ = (characteristic if isinstance(characteristic, uuidlib.UUID)
                else parse_uuid(str(characteristic)))
        return self.peripheral(device_id).characteristic(svc, chr_)

    def has_device(self, device_id: str) -> bool:
        with self._lock:
            return normalize_mac(device_id) in self._peripherals

    # -- discovery latency model

    def discovery_delay_s(self, peripheral: SimPeripheral) -> float:
        with self._rng_lock:
            phase_ms = self._rng.uniform(0.0, peripheral.advertising_interval_ms)
        return (phase_ms + self.processing_delay_ms) / 1000.0

    # -- notifications

    def _register(self, sub: _Subscription) -> None:
        key = (sub.uri.device_id, sub.uri.service, sub.uri.characteristic)
        with self._lock:
            self._subscriptions.setdefault(key, []).append(sub)

    def _subscribers(self, device_id: str, service, characteristic) -> list[_Subscription]:
        key = (device_id, service, characteristic)
        with self._lock:
            return [s for s in self._subscriptions.get(key, []) if s.active]

    def emit(self, device_id: str, service, characteristic, payload: bytes) -> None:
        """Deliver one notification value to all active subscribers."""
        char = self.characteristic(device_id, service, characteristic)
        if GattMethod.NOTIFY not in char.allowed:
            raise MethodNotPermitted("characteristic does not allow notify")
        mac = normalize_mac(device_id)
        svc = service if isinstance(service, uuidlib.UUID) else parse_uuid(str(service))
        chr_ = (characteristic if isinstance(characteristic, uuidlib.UUID)
                else parse_uuid(str(characteristic)))
        for sub in self._subscribers(mac, svc, chr_):
            self._queue.put((sub, bytes(payload)))

    def emit_next(self, device_id: str, service, characteristic) -> bytes | None:
        """Deliver the next scripted value; None when the script is exhausted."""
        char = self.characteristic(device_id, service, characteristic)
        with self._lock:
            if char._notify_cursor >= len(char.notify_source):
                return None
            payload = char.notify_source[char._notify_cursor]
            char._notify_cursor += 1
        self.emit(device_id, service, characteristic, payload)
        return payload

    def _cancel_subscription(self, sub: _Subscription) -> None:
        on_worker = threading.get_ident() == self._worker.ident
        with self._cond:
            sub.active = False
            # Guarantees nothing is delivered after unsubscribe returns;
            # skip the wait when called from the delivery thread itself.
            while sub.delivering and not on_worker:
                self._cond.wait()

    def _cancel_device_subscriptions(self, device_id: str, transport) -> None:
        with self._lock:
            subs = [s for lst in self._subscriptions.values() for s in lst
                    if s.transport is transport and s.uri.device_id == device_id]
        for sub in subs:
            self._cancel_subscription(sub)

    def _deliver_loop(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            sub, payload = item
            with self._cond:
                if not sub.active:
                    continue
                sub.delivering = True
            try:
                sub.sink(payload)
            except Exception:
                pass  # a failing sink must not stall delivery to others
            finally:
                with self._cond:
                    sub.delivering = False
                    self._cond.notify_all()

    def close(self) -> None:
        self._queue.put(None)


class SimTransport(TransportContract):
    """A simulated central attached to a :class:`SimNetwork`.

    Safe for concurrent use; every public call is appended to ``trace`` as a
    ``(operation, detail)`` tuple for test inspection.
    """

    def __init__(self, network: SimNetwork, timeout_s: float = 10.0):
        self.network = network
        self.timeout_s = timeout_s
        self.trace: list[tuple] = []
        self._scanning = False
        self._sessions: dict[str, Session] = {}
        self._lock = threading.RLock()

    @property
    def clock(self):
        return self.network.clock

    # -- discovery

    def start_discovery(self) -> None:
        with self._lock:
            self._scanning = True
        self.trace.append(("start_discovery", None))

    def stop_discovery(self) -> None:
        with self._lock:
            self._scanning = False
        self.trace.append(("stop_discovery", None))

    # -- connections

    def connect(self, device_id: str) -> Session:
        mac = normalize_mac(device_id)
        with self._lock:
            if not self._scanning:
                self._scanning = True  # consumers need not start scans themselves
        if not self.network.has_device(mac):
            self.clock.sleep(self.timeout_s)
            self.trace.append(("connect_failed", mac))
            raise NotFound(f"device {mac} never advertised within "
                           f"{self.timeout_s:.3f} s")
        peripheral = self.network.peripheral(mac)
        delay_s = self.network.discovery_delay_s(peripheral)
        if delay_s > self.timeout_s:
            self.clock.sleep(self.timeout_s)
            self.trace.append(("connect_failed", mac))
            raise Timeout(f"device {mac} not discovered within {self.timeout_s:.3f} s")
        self.clock.sleep(delay_s)
        with self.network._lock:
            if not peripheral.connectable:
                self.trace.append(("connect_failed", mac))
                raise NotConnectable(f"device {mac} does not accept connections")
            if peripheral.connected_by is not None:
                self.trace.append(("connect_failed", mac))
                raise Busy(f"device {mac} already holds its single connection")
            peripheral.connected_by = self
        self.clock.sleep(self.network.connect_setup_ms / 1000.0)
        session = Session(device_id=mac)
        with self._lock:
            self._sessions[mac] = session
        self.trace.append(("connect", mac))
        return session

    def disconnect(self, device_id: str) -> None:
        mac = normalize_mac(device_id)
        with self._lock:
            session = self._sessions.get(mac)
        if session is None:
            raise NotConnected(f"not connected to {mac}")
        self.network._cancel_device_subscriptions(mac, self)
        self.clock.sleep(self.network.disconnect_latency_ms / 1000.0)
        peripheral = self.network.peripheral(mac)
        with self.network._lock:
            if peripheral.connected_by is self:
                peripheral.connected_by = None
        with self._lock:
            self._sessions.pop(mac, None)
        self.trace.append(("disconnect", mac))

    def is_connected(self, device_id: str) -> bool:
        with self._lock:
            return normalize_mac(device_id) in self._sessions

    def discover_gatt(self, device_id: str) -> GattTree:
        mac = normalize_mac(device_id)
        self._require_session(mac)
        self.trace.append(("discover_gatt", mac))
        return self.network.peripheral(mac).gatt_tree()

    # -- attribute operations

    def read(self, uri: GattUri) -> bytes:
        char = self._attribute(uri, GattMethod.READ)
        self.clock.sleep(self.network.read_latency_ms / 1000.0)
        self.trace.append(("read", str(uri)))
        return bytes(char.value)

    def write(self, uri: GattUri, payload: bytes, with_response: bool) -> None:
        method = GattMethod.WRITE if with_response else GattMethod.WRITE_WITHOUT_RESPONSE
        char = self._attribute(uri, method)
        payload = bytes(payload)
        if len(payload) > MAX_VALUE_OCTETS:
            raise ValueTooLong(
                f"payload is {len(payload)} octets, ATT allows at most {MAX_VALUE_OCTETS}"
            )
        if with_response:
            # Confirmation round trip; write-without-response completes on send.
            self.clock.sleep(self.network.write_latency_ms / 1000.0)
        with self.network._lock:
            char.value = payload
            char.write_log.append(
                WriteRecord(self.clock.monotonic(), payload, with_response)
            )
        self.trace.append(("write", str(uri), payload.hex(), with_response))

    def subscribe(self, uri: GattUri, sink: Sink):
        char = self._attribute(uri, GattMethod.NOTIFY)
        sub = _Subscription(uri, sink, self)
        self.network._register(sub)
        self.trace.append(("subscribe", str(uri)))
        if self.network.auto_notify:
            for payload in char.notify_source:
                self.network._queue.put((sub, payload))
        return sub

    def unsubscribe(self, handle) -> None:
        if isinstance(handle, _Subscription):
            self.network._cancel_subscription(handle)
            self.trace.append(("unsubscribe", str(handle.uri)))

    # -- helpers

    def _require_session(self, mac: str) -> None:
        with self._lock:
            if mac not in self._sessions:
                raise NotConnected(f"not connected to {mac}")

    def _attribute(self, uri: GattUri, method: GattMethod) -> SimCharacteristic:
        self._require_session(uri.device_id)
        char = self.network.peripheral(uri.device_id).characteristic(
            uri.service, uri.characteristic
        )
        if method not in char.allowed:
            raise MethodNotPermitted(
                f"{method.value} not permitted on {uri.characteristic}; "
                f"allowed: {sorted(m.value for m in char.allowed)}"
            )
        return char


# --- simulated network config files ----------------------------------------------


def load_sim_config(source, clock=None, seed: int | None = None,
                    auto_notify: bool = True) -> SimNetwork:
    """Build a SimNetwork from a config mapping, JSON text, or file path.

    Schema (docs/sim-config.md): ``{"devices": [{"mac", "advertisingIntervalMs",
    "connectable", "services": {service-uuid: {char-uuid: {"valueHex",
    "allowed", "notifySequenceHex"}}}}]}`` plus optional latency knobs.
    """
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        text = Path(source).read_text(encoding="utf-8")
        config = _loads_config(text)
    elif isinstance(source, str):
        config = _loads_config(source)
    else:
        config = source
    if not isinstance(config, dict) or not isinstance(config.get("devices"), list):
        raise InvalidConfig("config must be an object with a 'devices' array")

    network = SimNetwork(
        clock=clock,
        seed=seed,
        auto_notify=auto_notify,
        processing_delay_ms=_number(config, "processingDelayMs", 0.0),
        connect_setup_ms=_number(config, "connectSetupMs", 0.0),
        read_latency_ms=_number(config, "readLatencyMs", 0.0),
        write_latency_ms=_number(config, "writeLatencyMs", 0.0),
        disconnect_latency_ms=_number(config, "disconnectLatencyMs", 0.0),
    )
    for device in config["devices"]:
        network.define_peripheral(_parse_device(device))
    return network


def _loads_config(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config is not JSON: {exc}") from exc


def _number(config: dict, key: str, default: float) -> float:
    value = config.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfig(f"{key} must be a number")
    return float(value)


def _parse_device(body) -> SimPeripheral:
    if not isinstance(body, dict) or "mac" not in body:
        raise InvalidConfig("each device needs at least a 'mac'")
    try:
        mac = normalize_mac(body["mac"])
    except Exception as exc:
        raise InvalidConfig(f"bad device mac {body.get('mac')!r}: {exc}") from exc
    interval = body.get("advertisingIntervalMs", 100.0)
    if isinstance(interval, bool) or not isinstance(interval, (int, float)) or interval <= 0:
        raise InvalidConfig(f"device {mac}: advertisingIntervalMs must be > 0")

    services: dict = {}
    for svc_text, chars in (body.get("services") or {}).items():
        svc = _config_uuid(svc_text)
        services[svc] = {}
        if not isinstance(chars, dict):
            raise InvalidConfig(f"device {mac}: services must map uuid to objects")
        for chr_text, char_body in chars.items():
            services[svc][_config_uuid(chr_text)] = _parse_characteristic(char_body, mac)

    return SimPeripheral(
        device_id=mac,
        advertising_interval_ms=float(interval),
        connectable=body.get("connectable", True),
        services=services,
    )


def _config_uuid(text: str) -> uuidlib.UUID:
    try:
        return parse_uuid(str(text))
    except Exception as exc:
        raise InvalidConfig(f"bad UUID {text!r}: {exc}") from exc


def _parse_characteristic(body, mac: str) -> SimCharacteristic:
    if not isinstance(body, dict):
        raise InvalidConfig(f"device {mac}: characteristic entries must be objects")
    try:
        value = bytes.fromhex(body.get("valueHex", ""))
        notify = tuple(bytes.fromhex(h) for h in body.get("notifySequenceHex", []))
    except ValueError as exc:
        raise InvalidConfig(f"device {mac}: bad hex value: {exc}") from exc
    allowed = []
    for method in body.get("allowed", ["read"]):
        try:
            allowed.append(GattMethod(method))
        except ValueError:
            raise InvalidConfig(f"device {mac}: unknown method {method!r}") from None
    return SimCharacteristic(value=value, allowed=allowed, notify_source=notify)


# --- host backend slot --------------------------------------------------------------

_host_backend_factory: Callable[..., TransportContract] | None = None


def register_host_backend(factory: Callable[..., TransportContract]) -> None:
    """Install a factory for the host-OS Bluetooth backend."""
    global _host_backend_factory
    _host_backend_factory = factory


def create_host_transport(**kwargs) -> TransportContract:
    if _host_backend_factory is None:
        raise TransportUnavailable(
            "no host Bluetooth backend registered; use the simulated transport "
            "or call register_host_backend() with a platform implementation"
        )
    return _host_backend_factory(**kwargs)

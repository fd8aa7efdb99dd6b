"""ConsumedThing: high-level interactions over a Thing Description.

``consume`` turns a parsed TD plus a transport into a handle exposing
read/write/invoke/subscribe calls. Every interaction runs through form
resolution and the content-type codec; raw octets only cross the public API
via the explicit ``read_raw``/``write_raw`` escape hatch.

A connection policy governs session lifetime per device: stay connected,
reconnect around every operation, or drop the link after each operation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Mapping

from .binding import GattMethod, ResolvedRequest, WotOperation, resolve_form
from .codec import get_codec
from .errors import (
    InvalidTd,
    MixedDevices,
    MultiPropertyError,
    NotSupported,
    OutOfRange,
    UnknownAffordance,
    UriError,
)
from .td import Affordance, Severity, ThingDescription, validate_td
from .transport import TransportContract
from .uris import parse_gatt_uri

Listener = Callable[[object], None]


class ConnectionPolicy(str, Enum):
    #: Connect on first use, stay connected until an explicit disconnect.
    KEEP_CONNECTED = "keep_connected"
    #: Establish a fresh connection for every operation and drop it after.
    RECONNECT_PER_OPERATION = "reconnect_per_operation"
    #: Reuse an existing connection but drop the link after each operation.
    DISCONNECT_AFTER = "disconnect_after"


_TEARDOWN_POLICIES = (
    ConnectionPolicy.RECONNECT_PER_OPERATION,
    ConnectionPolicy.DISCONNECT_AFTER,
)


@dataclass
class Subscription:
    thing: "ConsumedThing"
    event: str
    handle: object
    active: bool = True


def consume(td: ThingDescription, transport: TransportContract,
            policy: ConnectionPolicy = ConnectionPolicy.KEEP_CONNECTED
            ) -> "ConsumedThing":
    """Create a ConsumedThing; performs no I/O.

    The TD must validate cleanly: error-severity diagnostics raise
    ``InvalidTd``, warnings are tolerated.
    """
    errors = [d for d in validate_td(td) if d.severity is Severity.ERROR]
    if errors:
        raise InvalidTd(
            f"TD {td.title!r} failed validation: " + "; ".join(str(d) for d in errors),
            diagnostics=errors,
        )
    return ConsumedThing(td, transport, policy)


def expose(*_args, **_kwargs):
    """Server-side exposing is not part of this client-only binding."""
    raise NotSupported("this binding is a GATT client; it cannot expose Things")


produce = expose


class ConsumedThing:
    """Client-side handle over one Bluetooth LE Thing.

    All forms of the TD must point at a single device; operations on the
    thing are serialized so the connection policy stays coherent under
    concurrent callers.
    """

    def __init__(self, td: ThingDescription, transport: TransportContract,
                 policy: ConnectionPolicy = ConnectionPolicy.KEEP_CONNECTED):
        self.td = td
        self.transport = transport
        self.policy = ConnectionPolicy(policy)
        self._lock = threading.RLock()
        self._connected = False
        self._device_id: str | None = None
        self._gatt_tree = None

    # -- connection management

    @property
    def device_id(self) -> str:
        """The single MAC all gatt:// forms of this TD agree on."""
        with self._lock:
            if self._device_id is None:
                self._device_id = self._resolve_device_id()
            return self._device_id

    def _resolve_device_id(self) -> str:
        macs = set()
        for category in ("properties", "actions", "events"):
            for affordance in getattr(self.td, category).values():
                for form in affordance.forms:
                    try:
                        macs.add(parse_gatt_uri(form.href).device_id)
                    except UriError:
                        continue  # non-gatt forms were reported by validate_td
        if len(macs) > 1:
            raise MixedDevices(
                f"TD {self.td.title!r} references several devices: "
                + ", ".join(sorted(macs))
            )
        if not macs:
            raise InvalidTd(f"TD {self.td.title!r} declares no gatt:// forms")
        return macs.pop()

    @property
    def connected(self) -> bool:
        with self._lock:
            return self._connected

    def connect(self) -> None:
        """Connect to the TD's device and explore its GATT structure."""
        with self._lock:
            if self._connected:
                return
            self.transport.connect(self.device_id)
            self._gatt_tree = self.transport.discover_gatt(self.device_id)
            self._connected = True

    def disconnect(self) -> None:
        """Tear the session down; a no-op when not connected."""
        with self._lock:
            if not self._connected:
                return
            self.transport.disconnect(self.device_id)
            self._connected = False
            self._gatt_tree = None

    def _ensure_connected(self) -> None:
        if self.policy is ConnectionPolicy.RECONNECT_PER_OPERATION and self._connected:
            self.disconnect()
        if not self._connected:
            self.connect()

    def _after_operation(self) -> None:
        if self.policy in _TEARDOWN_POLICIES:
            self.disconnect()

    # -- single-affordance interactions

    def read_property(self, name: str):
        request = self._resolve("properties", name, WotOperation.READPROPERTY)
        return self._run_read(request)

    def write_property(self, name: str, value) -> None:
        affordance = self._affordance("properties", name)
        request = resolve_form(affordance, WotOperation.WRITEPROPERTY)
        self._check_bounds(affordance, value)
        self._run_write(request, value)

    def invoke_action(self, name: str, value) -> None:
        affordance = self._affordance("actions", name)
        request = resolve_form(affordance, WotOperation.INVOKEACTION)
        self._check_bounds(affordance, value)
        self._run_write(request, value)

    def subscribe_event(self, name: str, listener: Listener) -> Subscription:
        """Register a listener for decoded notification values.

        The listener runs on the transport's delivery thread and its
        exceptions are swallowed so one bad callback cannot kill the
        subscription. Policy teardown does not apply; an active subscription
        pins the connection.
        """
        request = self._resolve("events", name, WotOperation.SUBSCRIBEEVENT)
        codec = get_codec(request.content_type)

        def sink(payload: bytes) -> None:
            try:
                value = codec.decode(payload, request.spec)
            except Exception:
                return
            try:
                listener(value)
            except Exception:
                pass

        with self._lock:
            self._ensure_connected()
            handle = self.transport.subscribe(request.uri, sink)
        return Subscription(thing=self, event=name, handle=handle)

    def unsubscribe_event(self, subscription: Subscription) -> None:
        if not subscription.active:
            return
        self.transport.unsubscribe(subscription.handle)
        subscription.active = False

    # -- multi-property interactions

    def read_all_properties(self) -> dict:
        return self._read_sequence(self.td.properties.keys())

    def read_multiple_properties(self, names: Iterable[str]) -> dict:
        return self._read_sequence(names)

    def write_multiple_properties(self, values: Mapping[str, object]) -> None:
        self._write_sequence(values.items())

    def write_all_properties(self, values: Mapping[str, object]) -> None:
        done: dict = {}
        for name in self.td.properties:  # TD declaration order
            if name not in values:
                raise MultiPropertyError(
                    name, done,
                    UnknownAffordance(f"no value supplied for property {name!r}"),
                )
            try:
                self.write_property(name, values[name])
            except Exception as exc:
                raise MultiPropertyError(name, done, exc) from exc
            done[name] = values[name]
        for extra in values:
            if extra not in self.td.properties:
                raise MultiPropertyError(
                    extra, done,
                    UnknownAffordance(f"TD {self.td.title!r} has no property "
                                      f"named {extra!r}"),
                )

    def _read_sequence(self, names: Iterable[str]) -> dict:
        results: dict = {}
        for name in names:
            try:
                results[name] = self.read_property(name)
            except Exception as exc:
                raise MultiPropertyError(name, results, exc) from exc
        return results

    def _write_sequence(self, pairs) -> None:
        done: dict = {}
        for name, value in pairs:
            try:
                self.write_property(name, value)
            except Exception as exc:
                raise MultiPropertyError(name, done, exc) from exc
            done[name] = value

    # -- raw escape hatch

    def read_raw(self, name: str) -> bytes:
        """Escape hatch: read a property's octets without decoding."""
        request = self._resolve("properties", name, WotOperation.READPROPERTY)
        with self._lock:
            self._ensure_connected()
            try:
                return self.transport.read(request.uri)
            finally:
                self._after_operation()

    def write_raw(self, name: str, payload: bytes,
                  with_response: bool | None = None) -> None:
        """Escape hatch: write raw octets, bypassing the codec."""
        request = self._resolve("properties", name, WotOperation.WRITEPROPERTY)
        if with_response is None:
            with_response = request.method is GattMethod.WRITE
        with self._lock:
            self._ensure_connected()
            try:
                self.transport.write(request.uri, payload, with_response)
            finally:
                self._after_operation()

    # -- internals

    def _affordance(self, category: str, name: str) -> Affordance:
        affordance = getattr(self.td, category).get(name)
        if affordance is None:
            raise UnknownAffordance(f"TD {self.td.title!r} has no {category[:-1]}"
                                    f" named {name!r}")
        return affordance

    def _resolve(self, category: str, name: str, op: WotOperation) -> ResolvedRequest:
        return resolve_form(self._affordance(category, name), op)

    def _check_bounds(self, affordance: Affordance, value) -> None:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return
        if affordance.minimum is not None and value < affordance.minimum:
            raise OutOfRange(f"{affordance.name!r}: {value} below minimum "
                             f"{affordance.minimum}")
        if affordance.maximum is not None and value > affordance.maximum:
            raise OutOfRange(f"{affordance.name!r}: {value} above maximum "
                             f"{affordance.maximum}")

    def _run_read(self, request: ResolvedRequest):
        codec = get_codec(request.content_type)
        with self._lock:
            self._ensure_connected()
            try:
                payload = self.transport.read(request.uri)
            finally:
                self._after_operation()
        return codec.decode(payload, request.spec)

    def _run_write(self, request: ResolvedRequest, value) -> None:
        codec = get_codec(request.content_type)
        payload = codec.encode(value, request.spec)
        with_response = request.method is GattMethod.WRITE
        with self._lock:
            self._ensure_connected()
            try:
                self.transport.write(request.uri, payload, with_response)
            finally:
                self._after_operation()

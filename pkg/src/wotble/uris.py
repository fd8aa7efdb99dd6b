"""gatt:// URI scheme: locate a characteristic on a device.

Grammar (see docs/uri-scheme.md):

    gatt://<deviceID>/<service>/<characteristic>

The device segment is a 6-octet MAC address with ``:`` or ``-`` separators;
the service and characteristic segments are full 128-bit UUIDs or 4-hex-digit
short UUIDs that expand against the Bluetooth Base UUID.
"""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass

from .errors import BadDeviceId, BadScheme, BadStructure, BadUuid

#: 128-bit base against which 16-bit short UUIDs are expanded.
BLUETOOTH_BASE_UUID = uuid.UUID("00000000-0000-1000-8000-00805f9b34fb")

_SCHEME_RE = re.compile(r"^([A-Za-z][A-Za-z0-9+.-]*)://")
_MAC_RE = re.compile(r"^[0-9A-Fa-f]{2}(?:[:-][0-9A-Fa-f]{2}){5}$")
_UUID128_RE = re.compile(
    r"^[0-9A-Fa-f]{8}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{12}$"
)
_UUID16_RE = re.compile(r"^[0-9A-Fa-f]{4}$")


@dataclass(frozen=True)
class GattUri:
    """A parsed gatt:// resource locator.

    ``device_id`` is the canonical uppercase colon-separated MAC; ``service``
    and ``characteristic`` are full 128-bit UUIDs.
    """

    device_id: str
    service: uuid.UUID
    characteristic: uuid.UUID

    def __str__(self) -> str:
        return format_gatt_uri(self)


def normalize_mac(text: str) -> str:
    """Return the canonical ``HH:HH:HH:HH:HH:HH`` uppercase form of a MAC."""
    if not _MAC_RE.match(text):
        raise BadDeviceId(f"not a 6-octet MAC address: {text!r}")
    return text.replace("-", ":").upper()


def expand_uuid(short: int) -> uuid.UUID:
    """Expand a 16-bit short UUID into the Bluetooth Base UUID."""
    if not 0 <= short <= 0xFFFF:
        raise BadUuid(f"short UUID out of 16-bit range: {short:#x}")
    return uuid.UUID(f"0000{short:04x}-0000-1000-8000-00805f9b34fb")


def parse_uuid(text: str) -> uuid.UUID:
    """Parse a UUID segment: canonical 128-bit form or 4-hex-digit short form."""
    if _UUID16_RE.match(text):
        return expand_uuid(int(text, 16))
    if _UUID128_RE.match(text):
        return uuid.UUID(text.lower())
    raise BadUuid(f"not a 4-hex short UUID or canonical 128-bit UUID: {text!r}")


def parse_gatt_uri(text: str) -> GattUri:
    """Parse a gatt:// URI into its device, service, and characteristic."""
    m = _SCHEME_RE.match(text)
    if m is None:
        raise BadStructure(f"no URI scheme in {text!r}")
    if m.group(1).lower() != "gatt":
        raise BadScheme(f"expected scheme 'gatt', got {m.group(1)!r}")
    segments = text[m.end():].split("/")
    if len(segments) != 3 or any(s == "" for s in segments):
        raise BadStructure(
            "expected gatt://<deviceID>/<service>/<characteristic>, "
            f"got {len(segments)} segment(s)"
        )
    device, service, characteristic = segments
    return GattUri(
        device_id=normalize_mac(device),
        service=parse_uuid(service),
        characteristic=parse_uuid(characteristic),
    )


def format_gatt_uri(uri: GattUri) -> str:
    """Serialize to canonical text: dash-separated MAC, full lowercase UUIDs.

    Dashes keep the device segment clear of the URI authority's ``:`` port
    syntax; ``parse_gatt_uri(format_gatt_uri(u)) == u`` for every valid value.
    """
    device = uri.device_id.replace(":", "-")
    return f"gatt://{device}/{uri.service}/{uri.characteristic}"

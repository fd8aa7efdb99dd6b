from pathlib import Path

import pytest

from wotble import SimTransport, load_sim_config

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

LAMP_TD = FIXTURES / "ble-lamp.td.json"
SENSOR_TD = FIXTURES / "flower-sensor.td.json"
BEACON_TD = FIXTURES / "thermo-beacon.td.json"
NETWORK_CONFIG = FIXTURES / "network.sim.json"
BENCH_PLAN = FIXTURES / "bench-plan.json"

LAMP_MAC = "BE:58:30:00:CC:11"
LAMP_SERVICE = "0000fff0-0000-1000-8000-00805f9b34fb"
LAMP_CHAR = "0000fff3-0000-1000-8000-00805f9b34fb"
SENSOR_MAC = "C4:7C:8D:6A:10:2E"
BEACON_MAC = "D0:F0:18:44:23:02"
BEACON_SERVICE = "0000ffe0-0000-1000-8000-00805f9b34fb"
BEACON_CHAR = "0000ffe1-0000-1000-8000-00805f9b34fb"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def make_network(clock=None, seed=0, auto_notify=True, **latencies):
    network = load_sim_config(NETWORK_CONFIG, clock=clock, seed=seed,
                              auto_notify=auto_notify)
    for name, value in latencies.items():
        setattr(network, name, value)
    return network


@pytest.fixture
def network():
    net = make_network()
    yield net
    net.close()


@pytest.fixture
def transport(network):
    return SimTransport(network, timeout_s=1.0)


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\n[acceptance] {name}: {outcome}", flush=True)

"""Shared fixtures.

The expensive resource is the zero inventory: strip scans for derivative
orders 0..3 up to height 500 (order 1 up to 550 for the off-line sum
diagnostic).  Those run once per session into a shared store; every test
that needs zeros reads from it.  Winding residuals from all shared-state
runs accumulate into one TraceStats so the integrality criterion can
audit the whole session at the end.
"""

from __future__ import annotations

import time

import pytest

from zdl.argtrace import EdgeCache, TraceStats
from zdl.config import LabConfig
from zdl.evalcore import PrecisionPolicy
from zdl.zeroscan import scan_strip
from zdl.zerostore import ZeroStore

SCAN_T = 500.0
SCAN_T_EXTENDED = 550.0


@pytest.fixture(scope="session")
def policy():
    return PrecisionPolicy()


@pytest.fixture(scope="session")
def lab_config():
    return LabConfig()


@pytest.fixture(scope="session")
def session_stats():
    return TraceStats()


@pytest.fixture(scope="session")
def session_store(tmp_path_factory):
    path = tmp_path_factory.mktemp("store") / "session.jsonl"
    return ZeroStore(str(path))


@pytest.fixture(scope="session")
def scanned_store(session_store, policy, lab_config, session_stats):
    """Store populated with all zeros needed by the shared tests.

    Caches are per derivative order and die with the scan: the store
    carries the expensive knowledge across tests, the caches only help
    adjacent slabs share their cut edges within one scan.
    """
    for k, t_max in ((0, SCAN_T), (1, SCAN_T_EXTENDED), (2, SCAN_T), (3, SCAN_T)):
        cache = EdgeCache()
        t0 = time.monotonic()
        records = scan_strip(
            k,
            t_max,
            policy,
            lab_config,
            store=session_store,
            cache=cache,
            stats=session_stats,
        )
        print(
            f"scan k={k} to T={t_max}: {len(records)} zeros "
            f"in {time.monotonic() - t0:.1f}s"
        )
    return session_store

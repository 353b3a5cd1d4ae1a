"""Shared fixtures: the expensive solves run once per session."""
from __future__ import annotations

import time

import pytest

from monopole.integrator import IntegratorControls
from monopole.shooter import bisect_beta


@pytest.fixture(scope="session")
def lam0():
    t0 = time.perf_counter()
    rep = bisect_beta(0.0)
    rep.wall_seconds = time.perf_counter() - t0
    return rep


@pytest.fixture(scope="session")
def lam1():
    return bisect_beta(1.0)


@pytest.fixture(scope="session")
def lam1_fine_handoff():
    return bisect_beta(1.0, controls=IntegratorControls(t0=5e-4))

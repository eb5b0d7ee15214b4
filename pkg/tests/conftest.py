"""Shared fixtures: the expensive band hierarchies are built once per session."""

from __future__ import annotations

import pytest

from fibspec.bands import compute_bands
from fibspec.report import full_report

BAND_COUPLINGS = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
CHAIN_COUPLINGS = (1.0, 2.0, 4.0, 8.0, 16.0)
DEEP_K_MAX = 18


@pytest.fixture(scope="session")
def hierarchies():
    """Level-18 band hierarchies for the couplings the audits run on."""
    return {lam: compute_bands(lam, DEEP_K_MAX) for lam in BAND_COUPLINGS}


@pytest.fixture(scope="session")
def reports(hierarchies):
    """Full spectral reports at k_max = 18 for the chain couplings."""
    return {
        lam: full_report(lam, DEEP_K_MAX, hierarchies[lam])
        for lam in CHAIN_COUPLINGS
    }

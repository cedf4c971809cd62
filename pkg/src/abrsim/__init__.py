"""Discrete-event simulator of ATM ABR explicit-rate congestion control.

Models both conventional per-class-queue switches and Virtual Source /
Virtual Destination (VS/VD) switches with a configurable coupling-option
matrix, driven by the ERICA rate-allocation scheme.
"""

from abrsim.engine import Engine, MS, US, SEC
from abrsim.switches import VsVdOptions, preset, PRESETS, MISCONFIG_ROW4

__all__ = [
    "Engine",
    "MS",
    "US",
    "SEC",
    "VsVdOptions",
    "preset",
    "PRESETS",
    "MISCONFIG_ROW4",
]

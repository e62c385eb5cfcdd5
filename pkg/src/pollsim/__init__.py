"""Discrete-event simulator of a centralized polling WLAN MAC framework."""

from .engine import run, sweep, with_ftp
from .scenario import ScenarioConfig, load, validate

__all__ = ["run", "sweep", "with_ftp", "ScenarioConfig", "load", "validate"]
__version__ = "0.1.0"

"""Numerical and exact checks for real symplectic structures on S2 x S2."""
from . import charclass, compatible, geometry, maps, winding
from ._accel import USE_NUMBA, backend_name
from .errors import RskError
from .maps import MapSpec
from .report import CheckResult, Report

__version__ = "0.1.0"

__all__ = [
    "CheckResult", "MapSpec", "Report", "RskError", "USE_NUMBA", "backend_name", "charclass", "compatible",
    "geometry", "maps", "winding",
]

"""Gaussian-state simulation of a continuous-variable ((2,3)) quantum secret sharing protocol."""

from .gaussian import GaussianError, GaussianState, SymplecticOp
from .metrics import fidelity, mutual_information, negativity, purity
from .protocol import DeviceModel, ProtocolParams, run_protocol

__all__ = [
    "DeviceModel",
    "GaussianError",
    "GaussianState",
    "ProtocolParams",
    "SymplecticOp",
    "fidelity",
    "mutual_information",
    "negativity",
    "purity",
    "run_protocol",
]

__version__ = "0.1.0"

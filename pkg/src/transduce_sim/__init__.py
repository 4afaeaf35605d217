"""Efficiency, noise and design tools for ensemble-based microwave-optical converters."""

__version__ = "0.1.0"

from .model import CavityMode, CenterClass, DomainError, OperatingPoint, susceptibilities  # noqa: E402
from .system import TransducerSystem  # noqa: E402

__all__ = ["CavityMode", "CenterClass", "DomainError", "OperatingPoint", "TransducerSystem",
           "susceptibilities", "__version__"]

"""Simulator and library for power-side-channel attestation of untrusted machines."""

__version__ = "0.1.0"

from . import exceptions, gf2  # noqa: E402

__all__ = ["__version__", "exceptions", "gf2"]

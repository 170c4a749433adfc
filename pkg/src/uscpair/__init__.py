"""Simulator for photon-pair conversion in an ultrastrongly coupled
atom-cavity system.

A three-level artificial atom (levels u, g, e) couples to a single
truncated cavity mode.  The g-e transition carries the ultrastrong
coupling; u is an ancilla level used by two-tone STIRAP protocols that
convert the virtual photon pairs dressing the ground state into real
ones.  Dynamics are open-system (Lindblad), integrated in the lab frame
without rotating-wave approximations on the drive.
"""

from .hilbert import SpaceDef
from .model import SystemParams, PulseSpec, assemble_static, assemble_stray
from .spectrum import EigenSystem, diagonalize, stirap_carriers, virtual_amplitude
from .dynamics import (
    DissipationParams,
    IntegratorConfig,
    IntegrationError,
    LindbladModel,
    PopulationHistory,
    integrate,
)
from .protocol import ProtocolRun, run, efficiency, kappa_scan, stray_falsification

__version__ = "0.1.0"

__all__ = [
    "SpaceDef",
    "SystemParams",
    "PulseSpec",
    "assemble_static",
    "assemble_stray",
    "EigenSystem",
    "diagonalize",
    "stirap_carriers",
    "virtual_amplitude",
    "DissipationParams",
    "IntegratorConfig",
    "IntegrationError",
    "LindbladModel",
    "PopulationHistory",
    "integrate",
    "ProtocolRun",
    "run",
    "efficiency",
    "kappa_scan",
    "stray_falsification",
    "__version__",
]

"""Coverage, throughput and spectral-efficiency analysis of cache-enabled mmWave
heterogeneous networks with integrated access and backhaul."""

from .config import (BACKHAUL, LOS, MBS, NLOS, SBS, ConfigError, LinkState, NetworkConfig, Tier,
                     TierLink)

__version__ = "0.1.0"

__all__ = [
    "NetworkConfig", "ConfigError", "LinkState", "Tier", "TierLink",
    "LOS", "NLOS", "SBS", "MBS", "BACKHAUL", "__version__",
]

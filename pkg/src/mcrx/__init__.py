"""Multi-carrier (OFDM/GFDM) link simulation with classical and neural receivers."""

__version__ = "0.1.0"

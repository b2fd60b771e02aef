"""Generate qubit mapping and routing compilers from Marol problem definitions."""

__version__ = "0.1.0"

"""S-matrix poles and transport of tight-binding billiards from an energy-dependent effective Hamiltonian."""

__version__ = "0.1.0"

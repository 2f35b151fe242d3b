"""Numerical models of two-photon interference experiments.

Submodules:

- ``spectral``   energy-anticorrelated photon-pair states on a detuning grid
- ``optics``     dispersive materials, scalar transfers, Jones matrices
- ``multilayer`` transfer-matrix stacks and tunneling times
- ``hom``        Hong-Ou-Mandel coincidence engine and dip fitting
- ``franson``    Franson interferometer event classes and CHSH
- ``eraser``     polarization-resolved HOM (quantum eraser)
- ``runner``     config-driven batch runs, shot noise, CSV/JSON output
"""

__version__ = "0.1.0"

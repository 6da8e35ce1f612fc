"""
Planar TNS Sampler - Scripts Package

Command-line scripts organized by functionality:
- lattice/ - Graph construction
- simulation/ - Trotter circuits and gate application
- sampling/ - Boundary-MPS bitstring sampling
- analysis/ - Expectation values and BP error reports
"""

__version__ = "1.0.0"

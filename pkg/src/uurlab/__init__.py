"""Numerical toolkit for unitary and overlap uncertainty relations.

Modules: ``qlinalg`` (states, operators, sampling), ``uur`` (Gram-matrix
relations), ``overlap`` (pure-state overlap relation and its geometry),
``otoc`` (out-of-time-order correlator bounds), ``interferometer`` (simulated
Sagnac interferometer and fringe fitting), ``pipelines``/``checks`` (sweeps
and the acceptance suite) and ``cli``.
"""

__version__ = "0.1.0"

"""Time-bin entangled photon pairs from spontaneous four-wave mixing in a waveguide.

Closed-form and Monte Carlo models of pair generation, gated detection and
two-photon interference, plus the estimators used to analyse the counts.
"""

__version__ = "0.1.0"

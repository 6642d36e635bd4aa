"""
polspeckle - Degree of Polarization Under Speckle
=================================================
Estimates the squared degree of polarization of coherent light from
polarimetric intensity images degraded by fully developed speckle, and
benchmarks the four-image, OSCI and correlated two-image estimators with
Monte Carlo campaigns.
"""

__version__ = "0.1.0"

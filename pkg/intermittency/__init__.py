"""
Weak-intermittency laboratory
Analytic moment bounds, renewal solvers and Monte Carlo simulation for
parabolic SPDEs driven by space-time white noise.
"""

__version__ = "1.0.0"

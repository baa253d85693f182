"""
Simulation and estimation toolkit for the fractional stochastic heat equation.
"""
__version__ = '0.1.0'

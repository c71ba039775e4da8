"""Conditional correlations and Leggett-Garg tests for decaying quantum states."""

from .errors import *  # noqa: F401,F403
from .spectral import RealSpacePotential, SpectralDensity
from .pseudomode import PseudomodeParams
from .curve import CorrelationCurve

__version__ = "0.1.0"

"""Simulator for the viscous Cahn-Hilliard system with a singular potential."""
from .config import SimConfig, parse_config
from .grid import Grid
from .potential import PotentialSpec
from .stepper import State, StepParams, simulate, step

__all__ = ["Grid", "PotentialSpec", "SimConfig", "State", "StepParams", "parse_config", "simulate", "step"]
__version__ = "0.1.0"

"""Boussinesq-Coriolis system and its KP-type scalar reductions on periodic grids."""

__version__ = "0.1.0"

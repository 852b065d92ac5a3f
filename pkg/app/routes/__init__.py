"""
Module des routes de l'application.
"""

from . import experiment_routes

__all__ = ["experiment_routes"]

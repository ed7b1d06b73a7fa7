"""Stable reduction of elliptic surface families with exact arithmetic.

The package models the central fibre of a degenerating family of elliptic
surfaces as a dual graph of fibred components, runs the log minimal model
program on it (contractions, log flips, section contractions) and checks
the result for stability.  All numbers are exact rationals.
"""

__version__ = "0.1.0"

from .component import ComponentKind, FibreRecord, JClass, StabilityClass, SurfaceComponent, stability_class
from .engine import Edge, FamilyGraph, MMPStep, MMPTrace, reduce_family, replay, stable_reduce, verify_stable
from .familyio import dump_family, load_family, parse_family
from .lattice import Cone, Fan, Lattice
from .weierstrass import KodairaType, LocalFibreData, classify_fibre, parse_fibre

__all__ = [
    "ComponentKind", "FibreRecord", "JClass", "StabilityClass", "SurfaceComponent", "stability_class",
    "Edge", "FamilyGraph", "MMPStep", "MMPTrace", "reduce_family", "replay", "stable_reduce",
    "verify_stable", "dump_family", "load_family", "parse_family", "Cone", "Fan", "Lattice",
    "KodairaType", "LocalFibreData", "classify_fibre", "parse_fibre",
]

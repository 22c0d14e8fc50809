"""Heisenberg uniqueness pairs for quadrics and unions of hyperplanes, with checkable certificates."""

from .decision import Decision, Verdict
from .hup_decide import Settings, decide
from .measures import AtomicMeasure, char_fn, verify_vanishing
from .quadrics import Hyperplane, QuadricSurface, classify_surface
from .reflections import QReflection

__all__ = [
    "AtomicMeasure",
    "Decision",
    "Hyperplane",
    "QReflection",
    "QuadricSurface",
    "Settings",
    "Verdict",
    "char_fn",
    "classify_surface",
    "decide",
    "verify_vanishing",
]

"""Generalized functions as computable epsilon-nets of smooth functions.

A net is represented by a symbolic expression in the coordinates and ``eps``;
classification, association and geometry run over a geometric eps-grid.
"""

from .asymptotics import (DEFAULT_TOL, GeneralizedNumber, GeneralizedPoint, Tolerances, Tri, Verdict,
                          classify_moderate, classify_negligible, point_eval)
from .association import TestFunction, battery, ck_associated, is_associated, pairing_sequence
from .config import RunConfig
from .dsl import parse, to_text
from .embedding import embed_distribution, embed_smooth
from .errors import ColombeauError
from .mollifier import make_mollifier
from .nets import ChartDomain, EpsilonGrid, Representative
from .tape import get_backend, set_backend

__all__ = [
    "DEFAULT_TOL", "GeneralizedNumber", "GeneralizedPoint", "Tolerances", "Tri", "Verdict",
    "classify_moderate", "classify_negligible", "point_eval", "TestFunction", "battery",
    "ck_associated", "is_associated", "pairing_sequence", "RunConfig", "parse", "to_text",
    "embed_distribution", "embed_smooth", "ColombeauError", "make_mollifier", "ChartDomain",
    "EpsilonGrid", "Representative", "get_backend", "set_backend",
]

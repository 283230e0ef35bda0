"""Thin-film flow between a curved, possibly moving surface and a second
surface at normal distance h: surface geometry, the generalized Reynolds
(lubrication) solver and the curved shallow-water solver."""
from .charts import (Chart, Cylinder, FiniteDifferenceChart, Paraboloid, Plane, Sphere,
                     TabulatedChart, TranslatingPlane, WavyPlane, named_chart)
from .geometry import GeometrySample, sample_geometry
from .grid import Field, Grid

__version__ = "0.1.0"

__all__ = [
    "Chart", "Plane", "Cylinder", "Sphere", "Paraboloid", "TranslatingPlane", "WavyPlane",
    "FiniteDifferenceChart", "TabulatedChart", "named_chart",
    "GeometrySample", "sample_geometry", "Grid", "Field",
]

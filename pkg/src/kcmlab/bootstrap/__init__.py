"""Monotone U-bootstrap closure on boxes, tori and polygons."""
from .closure import bootstrap_tau0, closure, evolve_rounds, infection_times
from .regions import Box, Configuration, Polygon, Region, SiteSet, Torus
from .sampling import BoxPolicy, sample_bootstrap_tau

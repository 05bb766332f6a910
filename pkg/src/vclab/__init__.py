"""Finite concept classes: VC-dimension, teaching sets, packings and sample compression."""

from .concept_core import ConceptClass, LabeledSample, dual, parse_class, vc_dimension

__all__ = ["ConceptClass", "LabeledSample", "dual", "parse_class", "vc_dimension"]
__version__ = "0.1.0"

"""Generalized multiresolution analyses from multiplicity functions on the circle."""
from .circle import Partition, StepFunction, kernel, preimages, reduce, refine, section

__all__ = ["Partition", "StepFunction", "kernel", "preimages", "reduce", "refine", "section"]

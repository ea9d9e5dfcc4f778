"""Worked examples shipped as JSON payloads with exact rational breakpoints."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .filterbank import FilterMatrix
from .multiplicity import MultiplicityFunction

FILTERS = ("journe_rank2", "example2_rank2a", "example2_rank2b", "example2_rank3", "haar",
           "identity", "example2_rank2b_fixed")
# rank of the low-pass block each shipped filter claims
STATED_RANKS = {"journe_rank2": 2, "example2_rank2a": 2, "example2_rank2b": 2,
                "example2_rank3": 3, "haar": 1, "example2_rank2b_fixed": 2}


@lru_cache(maxsize=None)
def raw(name: str) -> dict:
    return json.loads(resources.files("gmra.data").joinpath(f"{name}.json").read_text())


def multiplicity(name: str) -> MultiplicityFunction:
    return MultiplicityFunction.from_json(raw(name))


def journe_m() -> MultiplicityFunction:
    return multiplicity("journe_m")


def example2_m() -> MultiplicityFunction:
    return multiplicity("example2_m")


def filter_matrix(name: str) -> FilterMatrix:
    doc = dict(raw(name))
    doc.pop("name", None)
    return FilterMatrix.from_json(doc)


def journe_rank2() -> FilterMatrix:
    return filter_matrix("journe_rank2")


def example2_filters() -> dict[str, FilterMatrix]:
    return {k: filter_matrix(k) for k in ("example2_rank2a", "example2_rank2b", "example2_rank3")}


def haar() -> FilterMatrix:
    return filter_matrix("haar")


def identity_filter() -> FilterMatrix:
    return filter_matrix("identity")

"""Bundled example polytopes used by the CLI docs and the test suite."""

from __future__ import annotations

import importlib.resources as resources

from ..polytope import LabelledPolytope, load_polytope

EXAMPLES = (
    "interval01",
    "intervalC",
    "simplex2",
    "square",
    "interval-third",
    "perturbed-simplex",
)


def example_path(name: str):
    if name not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; choices: {EXAMPLES}")
    return resources.files(__package__) / f"{name}.json"


def example_polytope(name: str) -> LabelledPolytope:
    return load_polytope(example_path(name))

"""Bundled example models.

`ecs_model()` returns the e-commerce system used throughout the test suite
and the CLI walkthrough.  Its service demands were produced by
scripts/calibrate_ecs.py (committed output, see that script for provenance).
"""

from importlib import resources

from ..model import SoftwareModel
from ..modelio import load_model


def ecs_bytes() -> bytes:
    return resources.files(__package__).joinpath("ecs.json").read_bytes()


def ecs_model() -> SoftwareModel:
    return load_model(ecs_bytes())

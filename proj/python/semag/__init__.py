"""Python front end for the semag C++ engine."""

import json as _json

from . import _core
from ._core import (
    BackendError,
    InfrastructureError,
    ParseError,
    PreconditionError,
    SemagError,
    ValidationError,
    edit_distance,
    report,
    similarity,
    softmax_weights,
    threshold,
    vote,
)

__all__ = [
    "BackendError",
    "InfrastructureError",
    "ParseError",
    "PreconditionError",
    "SemagError",
    "ValidationError",
    "edit_distance",
    "load_config",
    "load_dataset",
    "report",
    "select_backbone",
    "similarity",
    "softmax_weights",
    "solve",
    "threshold",
    "vote",
]


def load_dataset(path, schema="generic", seed=0):
    return _json.loads(_core.load_dataset_json(str(path), schema, seed))


def load_config(path=""):
    """Engine config as a dict; an empty path gives the built-in defaults."""
    return _json.loads(_core.load_config_json(str(path)))


def solve(dataset, schema="generic", backend="mock-scenario", config="", endpoint="", auth_env="",
          parallel=1, seed=0, strict_infra=False, out_dir=""):
    """Run the controller over a dataset. Returns {"manifest", "metrics", "timing"}."""
    return _json.loads(_core.solve_json(str(dataset), schema, backend, str(config), endpoint, auth_env,
                                        parallel, seed, strict_infra, str(out_dir)))


def select_backbone(profile, registry, fixture, sample="", n_links=0, seed=0, config=""):
    return _json.loads(_core.select_backbone_json(str(profile), str(registry), str(fixture), str(sample),
                                                  n_links, seed, str(config)))

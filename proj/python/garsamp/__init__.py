"""Rejection sampling with likelihood bounds and generalized adaptive envelopes.

Config arguments accept a path, a JSON string, a dict or a built-in example id (1-3).
"""

import json
import os

from . import _garsamp
from ._garsamp import ContractError, Error, Expression, ModelError, ParameterError, ParseError

__all__ = [
    "ContractError", "Error", "Expression", "ModelError", "ParameterError", "ParseError",
    "bound", "bound_table", "builtin_config", "gibbs", "run_example", "sample", "verify",
]


def _text(config):
    if isinstance(config, int):
        return _garsamp.builtin_config(config)
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config, encoding="utf-8") as f:
            return f.read()
    if isinstance(config, str):
        return config
    raise TypeError(f"unsupported config argument: {config!r}")


def builtin_config(example_id):
    return json.loads(_garsamp.builtin_config(example_id))


def bound(config, method="bm2", iters=3):
    return _garsamp.bound(_text(config), method, iters)


def bound_table(config):
    return _garsamp.bound_table(_text(config))


def sample(config, algorithm="gars", n=1000, seed=1):
    return _garsamp.sample(_text(config), algorithm, n, seed)


def gibbs(config, n=1000, seed=1, variant="gars", burn=0):
    return _garsamp.gibbs(_text(config), n, seed, variant, burn)


def verify(config):
    return json.loads(_garsamp.verify(_text(config)))


def run_example(example_id, out_dir, overrides=None):
    return json.loads(_garsamp.run_example(example_id, os.fspath(out_dir), json.dumps(overrides or {})))

"""Python front end to the stokolmo C++ core."""

import json

from ._stokolmo import ModelError, __version__, logistic_mean, maximin_weights
from . import _stokolmo


def _text(model):
    return model if isinstance(model, str) else json.dumps(model)


def classify(model, seed=1):
    """Verdict, boundary measures and invasion rates as a dict."""
    return json.loads(_stokolmo.classify_json(_text(model), seed))


def check(model):
    return json.loads(_stokolmo.check_json(_text(model)))


def simulate(model, x0, t, dt=1e-3, seed=1, every=1):
    """One path in log coordinates: dict with "t", "log_x" and "blowup"."""
    return _stokolmo.simulate(_text(model), list(x0), t, dt, seed, every)


def food_chain(params):
    return json.loads(_stokolmo.food_chain_json(_text(params)))


__all__ = [
    "ModelError",
    "__version__",
    "check",
    "classify",
    "food_chain",
    "logistic_mean",
    "maximin_weights",
    "simulate",
]

import json
import os
import pathlib

import pytest

import stokolmo

MODELS = pathlib.Path(os.environ.get("STOKOLMO_MODELS_DIR", pathlib.Path(__file__).resolve().parents[2] / "models"))


def load(name):
    return json.loads((MODELS / f"{name}.json").read_text())


def test_classify_regimes():
    assert stokolmo.classify(load("lv_coexist"))["verdict"]["kind"] == "Persistent"
    ext = stokolmo.classify(load("lv_extinction"))
    assert ext["verdict"]["kind"] == "Extinction"
    rate = ext["verdict"]["predicted_rates"][0]["rates"][0]
    assert rate["species"] == 2
    assert rate["lambda"] == pytest.approx(-6.5)


def test_check_flags_cooperation():
    report = stokolmo.check(load("coop_blowup"))
    assert report["tightness"]["status"] == "fail"


def test_bad_model_raises():
    with pytest.raises(stokolmo.ModelError):
        stokolmo.classify({"n": 1, "lv": {"a": [1], "B": [[-1]], "g": [1]}, "sigma": [[1]], "colour": 1})


def test_maximin_and_logistic_mean():
    p, t = stokolmo.maximin_weights([[-1.0, 2.0], [2.0, -1.0]])
    assert p == pytest.approx([0.5, 0.5])
    assert t == pytest.approx(0.5)
    assert stokolmo.logistic_mean(2.0, 1.0, 1.0) == pytest.approx(1.5, rel=1e-6)


def test_simulate_is_reproducible():
    model = load("logistic")
    a = stokolmo.simulate(model, [1.0], 1.0, 0.01, 3, 10)
    b = stokolmo.simulate(model, [1.0], 1.0, 0.01, 3, 10)
    assert a["log_x"] == b["log_x"]
    assert not a["blowup"]
    assert len(a["t"]) == len(a["log_x"])


def test_food_chain():
    v = stokolmo.food_chain(load("food_chain_apex_extinct"))
    assert v["kind"] == "Extinction"
    assert v["j_star"] == 2

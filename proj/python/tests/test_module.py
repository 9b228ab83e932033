import json

import pytest

import crowdlens


@pytest.fixture(scope="module")
def city():
    return crowdlens.synth(seed=3, users=2000, antennas=50, days=7, events=2)


def test_params_defaults_and_validation():
    p = crowdlens.Params()
    assert (p.epsilon_n, p.epsilon_lt, p.epsilon_ci) == (20, 4, 10)
    assert p.epsilon_p == pytest.approx(0.2)
    assert p.window_minutes == 30
    assert crowdlens.validate_params(p) == []
    bad = crowdlens.Params(epsilon_lt=1, epsilon_p=1.5)
    problems = crowdlens.validate_params(bad)
    assert "lifetime below 2" in problems
    assert len(problems) == 2
    assert p.to_dict()["epsilon_si"] == pytest.approx(0.2)


def test_existence_step():
    assert crowdlens.existence_step(0.5, 2, 4, False) == pytest.approx(0.25)
    assert crowdlens.existence_step(0.1, 0, 4, True) == 1.0
    with pytest.raises(crowdlens.Error):
        crowdlens.existence_step(1.0, 1, 0, False)


def test_synth_is_deterministic(city):
    again = crowdlens.synth(seed=3, users=2000, antennas=50, days=7, events=2)
    assert again["calls_csv"] == city["calls_csv"]
    assert len(city["ground_truth"]["events"]) == 2
    assert city["rows"] == city["calls_csv"].count("\n") - 1


def test_detect_recovers_planted_events(city):
    run = crowdlens.detect(city["calls_csv"], city["antennas_csv"])
    assert run["summary"]["unusual_events"] == len(run["events"])
    scored = crowdlens.score(json.dumps(run["events"]), json.dumps(city["ground_truth"]))
    assert scored["matched"] == 2
    assert scored["recall"] == pytest.approx(1.0)


def test_detect_rejects_invalid_params(city):
    with pytest.raises(crowdlens.Error, match="lifetime below 2"):
        crowdlens.detect(city["calls_csv"], city["antennas_csv"], crowdlens.Params(epsilon_lt=1))


def test_eval_counts_table():
    r = crowdlens.eval_counts(23, 23, 340, 25)
    assert r["precision"] == pytest.approx(0.0676, abs=5e-5)
    assert r["recall"] == pytest.approx(0.92)
    empty = crowdlens.eval_counts(0, 0, 0, 0)
    assert empty["precision"] is None and empty["recall"] is None

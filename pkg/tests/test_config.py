import json

import numpy as np
import pytest

from movnet.config import ExperimentConfig, fixture, initial_rng, trial_seed
from movnet.exceptions import ConfigError


def test_round_trip(default_config):
    again = ExperimentConfig.loads(default_config.dumps())
    assert again == default_config
    assert again.dumps() == default_config.dumps()


def test_round_trip_through_file(tmp_path, pair_config):
    path = tmp_path / "pair.json"
    path.write_text(pair_config.dumps())
    assert ExperimentConfig.load(path) == pair_config


def test_fixture_values(default_config, pair_config):
    assert (default_config.n, default_config.m) == (4, 5)
    assert default_config.linkage.delta == 3.0
    assert default_config.params().in_stable_range
    assert pair_config.pos0 == (0, 0)
    with pytest.raises(ConfigError):
        fixture("nope")


def test_bad_json_reports_line():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.loads('{\n  "graph": {\n    "m": 1,\n  }\n}')
    assert info.value.line == 4
    assert "line 4" in str(info.value)


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.pop("graph"), "graph"),
        (lambda d: d["graph"].update(m="5"), "graph.m"),
        (lambda d: d["graph"].update(weights=[1.0, 2.0]), "graph.weights"),
        (lambda d: d["linkage"].update(mode="sideways"), "linkage.mode"),
        (lambda d: d.update(epsilon=0.5), "epsilon"),
        (lambda d: d.pop("epsilon"), "epsilon"),
        (lambda d: d.update(t_max=0), "t_max"),
        (lambda d: d.update(x0=[1.0, 2.0]), "x0"),
        (lambda d: d.update(x0="normal(0,1)"), "x0"),
        (lambda d: d.update(pos0=[0, 0, 0, 9]), "pos0"),
        (lambda d: d.update(threshold=-1.0), "threshold"),
    ],
)
def test_errors_name_the_field(default_config, mutate, field):
    doc = default_config.to_dict()
    mutate(doc)
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(doc)
    assert info.value.field == field
    assert field in str(info.value)


def test_forced_epsilon_allowed(default_config):
    doc = default_config.to_dict()
    doc["epsilon"] = 0.5
    doc["overrides"]["force_epsilon"] = True
    cfg = ExperimentConfig.from_dict(doc)
    assert not cfg.params().in_stable_range


def test_unknown_key(default_config):
    doc = default_config.to_dict()
    doc["colour"] = "blue"
    with pytest.raises(ConfigError, match="colour"):
        ExperimentConfig.from_dict(doc)


def test_uniform_initial_states(default_config):
    cfg = default_config.with_overrides(x0="uniform(-2, 5)")
    x0, pos0 = cfg.initial_conditions(123)
    assert np.all((x0 >= -2) & (x0 < 5))
    x1, pos1 = cfg.initial_conditions(123)
    np.testing.assert_array_equal(x0, x1)
    np.testing.assert_array_equal(pos0, pos1)
    assert np.all((pos0 >= 0) & (pos0 < cfg.m))


def test_seed_derivation():
    s = trial_seed(42, 3)
    assert s == int(np.random.SeedSequence([42, 3]).generate_state(1, np.uint64)[0])
    assert len({trial_seed(42, i) for i in range(1000)}) == 1000
    assert initial_rng(s).random() == np.random.default_rng([s, 1]).random()


def test_json_is_plain(default_config):
    doc = json.loads(default_config.dumps())
    assert len(doc["graph"]["weights"]) == 25
    assert doc["linkage"]["mode"] == "symmetric"

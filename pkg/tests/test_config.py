import json

import pytest

from backscatter_ee import NetworkParams
from backscatter_ee.config import ExperimentConfig, Sweep, config_from_dict, load_config
from backscatter_ee.exceptions import ConfigError


class TestDefaults:
    def test_empty_object(self):
        cfg = config_from_dict({})
        n = cfg.network
        assert (n.target_pd, n.target_pf, n.prior_idle, n.prior_busy) == (0.9, 0.1, 0.75, 0.25)
        assert (n.bandwidth, n.pu_tx_power, n.backscatter_rate) == (6e6, 1.7e4, 5e4)
        assert (n.partial_throughput_factor, n.sensing_power, n.circuit_power) == (1.0, 1e-3, 1e-4)
        assert (n.harvested_power, n.interference_gain_ratio) == (0.25, 0.5e-3)
        assert (cfg.num_samples, cfg.snr_db, cfg.harvesting_efficiency) == (2000, -10.0, 0.6)
        assert cfg.sweep is None and cfg.per_hz and cfg.explicit == frozenset()
        assert n == NetworkParams()

    def test_file_roundtrip(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"num_samples": 1000, "bandwidth": 1e6}))
        cfg = load_config(p)
        assert cfg.num_samples == 1000 and cfg.network.bandwidth == 1e6
        assert cfg.explicit == frozenset({"num_samples", "bandwidth"})
        assert config_from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()

    def test_prior_complement(self):
        assert config_from_dict({"prior_idle": 0.6}).network.prior_busy == pytest.approx(0.4)
        assert config_from_dict({"prior_busy": 0.3}).network.prior_idle == pytest.approx(0.7)

    def test_sensing_property(self):
        s = config_from_dict({"snr_db": -20, "num_samples": 300}).sensing
        assert s.snr == pytest.approx(0.01) and s.num_samples == 300

    def test_explicit_overrides(self):
        cfg = config_from_dict({"num_samples": 800, "modes": ["hybrid"]})
        assert cfg.explicit_overrides() == {"num_samples": 800}


class TestSweep:
    def test_snr_sweep(self):
        cfg = config_from_dict({"sweep": {"axis": "snr_db", "values": list(range(-20, 1))}})
        assert cfg.sweep == Sweep("snr_db", tuple(float(v) for v in range(-20, 1)))

    @pytest.mark.parametrize("sweep,field", [
        ({"axis": "power", "values": [1]}, "sweep.axis"),
        ({"axis": "tau", "values": []}, "sweep.values"),
        ({"axis": "tau", "values": [0.2, 0.2]}, "sweep.values"),
        ({"axis": "tau", "values": [0.3, 0.2]}, "sweep.values"),
        ({"axis": "tau", "values": ["a"]}, "sweep.values"),
        ({"axis": "tau", "values": [0.1], "step": 2}, "sweep.step"),
        ([1, 2], "sweep"),
    ])
    def test_rejects(self, sweep, field):
        with pytest.raises(ConfigError) as info:
            config_from_dict({"sweep": sweep})
        assert info.value.field == field


class TestErrors:
    @pytest.mark.parametrize("data,field", [
        ({"bandwidth": -1.0}, "bandwidth"),
        ({"bandwidth": "wide"}, "bandwidth"),
        ({"num_samples": 10.5}, "num_samples"),
        ({"num_samples": True}, "num_samples"),
        ({"target_pd": 1.5}, "target_pd"),
        ({"harvesting_efficiency": 2.0}, "harvesting_efficiency"),
        ({"mu": 0.0}, "mu"),
        ({"modes": ["turbo"]}, "modes"),
        ({"per_hz": 1}, "per_hz"),
        ({"colour": "red"}, "colour"),
    ])
    def test_names_field(self, data, field):
        with pytest.raises(ConfigError) as info:
            config_from_dict(data)
        assert info.value.field == field
        assert str(info.value).startswith(f"{field}: ")
        assert not str(info.value).startswith(f"{field}: {field}:")

    def test_top_level_type(self):
        with pytest.raises(ConfigError):
            config_from_dict([1, 2])

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError) as info:
            load_config(p)
        assert info.value.field == "json"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_config(tmp_path / "absent.json")
        assert info.value.field == "path"


def test_defaults_match_dataclass():
    assert ExperimentConfig().to_dict() == config_from_dict({}).to_dict()

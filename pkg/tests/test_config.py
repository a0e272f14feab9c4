import pytest
import yaml

from ibrdiff.config import ConfigError, dump_defaults, load_study, study_from_dict, study_to_dict
from ibrdiff.network import OPEN
from ibrdiff.scenarios import StudyConfig


def write(tmp_path, text):
    p = tmp_path / "study.yaml"
    p.write_text(text)
    return p


def test_defaults_round_trip(tmp_path):
    study = load_study(write(tmp_path, dump_defaults()))
    assert study == StudyConfig()


def test_empty_file_gives_defaults(tmp_path):
    assert load_study(write(tmp_path, "")) == StudyConfig()


def test_partial_override(tmp_path):
    text = "relay:\n  k0_pickup: 0.2\nsystem:\n  cable_length_km: 30\nmatrix:\n  controls: [C2]\n"
    study = load_study(write(tmp_path, text))
    assert study.relay.k0_pickup == 0.2 and study.relay.k_slope == 0.5
    assert study.system.cable_length_km == 30.0
    assert study.matrix.controls == ("C2",)


def test_unknown_key_reports_path_and_line(tmp_path):
    text = "relay:\n  k_slope: 0.5\n  k_slop: 0.4\n"
    with pytest.raises(ConfigError, match=r"relay\.k_slop.*line 3"):
        load_study(write(tmp_path, text))


def test_unknown_section(tmp_path):
    with pytest.raises(ConfigError, match="unknown section"):
        load_study(write(tmp_path, "relays: {}\n"))


def test_bad_value_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_study(write(tmp_path, "relay:\n  k_slope: 2.0\n"))
    with pytest.raises(ConfigError):
        load_study(write(tmp_path, "relay:\n  k_slope: fast\n"))


def test_open_and_scalar_impedances():
    data = {"system": {"ommc": {"z": {"z1": 0.09, "z2": [0, 0.9], "z0": "open"}}}}
    study = study_from_dict(data)
    z = study.system.ommc.z
    assert z.z1 == 0.09 and z.z2 == 0.9j and z.z0 is OPEN
    assert study_to_dict(study)["system"]["ommc"]["z"]["z0"] == "open"


def test_force_mode():
    study = study_from_dict({"policies": {"ommc": {"force_neg_seq_mode": "C2"}}})
    assert study.ommc_mode("C1") == "C2"
    with pytest.raises(ConfigError):
        study_from_dict({"policies": {"ommc": {"force_neg_seq_mode": "C9"}}})


def test_role_is_not_configurable():
    with pytest.raises(ConfigError):
        study_from_dict({"policies": {"wind": {"role": "grid-forming"}}})


def test_missing_file():
    with pytest.raises(ConfigError):
        load_study("/nonexistent/study.yaml")


def test_dump_is_valid_yaml():
    data = yaml.safe_load(dump_defaults())
    assert set(data) == {"system", "relay", "policies", "matrix"}

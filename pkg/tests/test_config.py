"""
Tests for configuration loading and precedence.
"""

import pytest

from core.exceptions import ConfigError
from utils.config import env_max_states, load_config_file, parse_max_states, resolve_max_states
from utils.constants import MAX_STATES_ENV_VAR


class TestConfigFile:
    """Test YAML configuration files."""

    def test_valid_file(self, tmp_path):
        """Recognised keys are returned as read."""
        path = tmp_path / "psni.yaml"
        path.write_text("max_states: 500\nmethod: unwinding\nhigh: [h, k]\n", encoding="utf-8")
        assert load_config_file(path) == {"max_states": 500, "method": "unwinding", "high": ["h", "k"]}

    def test_empty_file(self, tmp_path):
        """An empty file means no options."""
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert load_config_file(path) == {}

    @pytest.mark.parametrize("content", [
        "max_states: [1\n",
        "- just\n- a list\n",
        "colour: blue\n",
    ])
    def test_rejected_files(self, tmp_path, content):
        """Bad YAML, non-mappings and unknown keys are refused."""
        path = tmp_path / "bad.yaml"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        """A missing file is a configuration error."""
        with pytest.raises(ConfigError):
            load_config_file(tmp_path / "absent.yaml")

    def test_unreadable_paths(self, tmp_path):
        """Directories and undecodable files are configuration errors."""
        with pytest.raises(ConfigError, match="cannot read"):
            load_config_file(tmp_path)
        path = tmp_path / "binary.yaml"
        path.write_bytes(b"max_states: \xff\xfe\n")
        with pytest.raises(ConfigError):
            load_config_file(path)


class TestMaxStates:
    """Test state limit parsing and precedence."""

    @pytest.mark.parametrize("value", [0, -3, "many", 2.5, True, None])
    def test_invalid_values(self, value):
        """Non-positive and non-integer limits are refused."""
        with pytest.raises(ConfigError):
            parse_max_states(value, "test")

    def test_valid_values(self):
        """Integral strings and floats are accepted."""
        assert parse_max_states("42", "test") == 42
        assert parse_max_states(7.0, "test") == 7

    def test_environment(self):
        """The environment variable is read and trimmed."""
        assert env_max_states({MAX_STATES_ENV_VAR: " 250 "}) == 250
        assert env_max_states({MAX_STATES_ENV_VAR: ""}) is None
        assert env_max_states({}) is None

    def test_precedence(self):
        """Flag beats environment beats file beats default."""
        environ = {MAX_STATES_ENV_VAR: "300"}
        file_config = {"max_states": 400}
        assert resolve_max_states(200, file_config, 100, environ) == 200
        assert resolve_max_states(None, file_config, 100, environ) == 300
        assert resolve_max_states(None, file_config, 100, {}) == 400
        assert resolve_max_states(None, {}, 100, {}) == 100

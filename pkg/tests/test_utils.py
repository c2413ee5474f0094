"""
Tests for helpers and the colour console
"""

import io

import allure
import numpy as np
import pytest

from src.utils.color_logger import ColorLogger
from src.utils.helpers import format_duration, get_version_info, load_json_safely, to_plain


@allure.feature("Utils")
@allure.story("Helpers")
class TestHelpers:

    @pytest.mark.parametrize("seconds, text", [(4.25, "4.2s"), (125, "2m 5s"), (7260, "2h 1m")])
    def test_format_duration(self, seconds, text):
        assert format_duration(seconds) == text

    def test_to_plain(self):
        value = to_plain({'a': np.float64(1.5), 'b': np.array([1, 2]), 'c': np.bool_(True),
                          'd': float('nan'), 'e': (np.int64(3), 1 + 2j)})
        assert value == {'a': 1.5, 'b': [1, 2], 'c': True, 'd': None, 'e': [3, [1.0, 2.0]]}
        assert isinstance(value['b'][0], int)

    def test_json_file(self, tmp_path):
        path = tmp_path / "data.json"
        path.write_text('{"x": 1.5}')
        assert load_json_safely(path) == {'x': 1.5}

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert load_json_safely(path) == {}

    def test_missing_json_file(self, tmp_path):
        assert load_json_safely(tmp_path / "absent.json") == {}

    def test_version_info(self):
        info = get_version_info()
        assert info['current_version'] == '1.0.0'
        assert info['schema_version'] == 1


@allure.feature("Utils")
@allure.story("Console")
class TestColorLogger:

    def test_plain_output_off_terminal(self):
        stream = io.StringIO()
        ColorLogger(stream=stream).fail_step("converse_chain failed")
        assert stream.getvalue() == "[CovertLink] [FAIL] converse_chain failed\n"

    def test_prefix_and_success(self):
        stream = io.StringIO()
        ColorLogger(stream=stream).success("All checks passed", prefix="SELFCHECK")
        assert stream.getvalue() == "[CovertLink] [SELFCHECK] [SUCCESS] All checks passed\n"

    def test_table_row_pads_and_truncates(self):
        stream = io.StringIO()
        ColorLogger(stream=stream).table_row(["abcdef", "x"], [4, 3])
        assert stream.getvalue() == "abcd | x  \n"

    def test_summary(self):
        stream = io.StringIO()
        ColorLogger(stream=stream).print_summary(passed=3, failed=1)
        assert "75.0%" in stream.getvalue()

"""
Tests for the selfcheck suite
"""

import io

import allure
import pytest

from config.numerics_config import FAULT_ENV_VAR
from src.automation.selfcheck import CheckResult, SelfCheckReport, SelfCheckSuite
from src.numerics.errors import UnstableFitError
from src.reports.json_reporter import JsonReporter
from src.utils.color_logger import ColorLogger


@pytest.fixture
def console():
    return ColorLogger(stream=io.StringIO(), use_colors=False)


@pytest.fixture
def suite(console):
    return SelfCheckSuite(color_logger=console, radiometer_trials=200)


@allure.feature("Selfcheck")
@allure.story("Records")
class TestRecords:

    def test_report_status(self):
        report = SelfCheckReport([CheckResult('a', True, 0.0, 1.0), CheckResult('b', False, 2.0, 1.0)])
        assert not report.passed
        assert report.failed_names == ['b']
        assert report.to_dict()['checks'][1]['status'] == 'failed'

    def test_empty_report_does_not_pass(self):
        assert not SelfCheckReport().passed


@allure.feature("Selfcheck")
@allure.story("Checks")
class TestChecks:

    @pytest.mark.parametrize("name", [
        'pinsker_random_pairs',
        'qre_additivity',
        'thermal_entropy_closed_form',
        'log_derivative_identity',
        'inverse_derivative_identity',
        'budget_algebra',
        'converse_chain',
        'holevo_slope',
    ])
    def test_fast_checks_pass(self, suite, name):
        check = dict(suite.checks)[name]
        result = suite._run_check(name, check)
        assert result.passed, result.message

    def test_fault_injection_breaks_the_second_derivative(self, suite, monkeypatch):
        check = dict(suite.checks)['qpsk_second_derivative']
        assert suite._run_check('qpsk_second_derivative', check).passed
        monkeypatch.setenv(FAULT_ENV_VAR, '1')
        assert not suite._run_check('qpsk_second_derivative', check).passed

    def test_library_errors_fail_the_check(self, suite):
        def unstable():
            raise UnstableFitError("noise floor reached")

        result = suite._run_check('broken', unstable)
        assert not result.passed
        assert 'UnstableFitError' in result.message

    def test_run_feeds_the_reporter(self, console):
        suite = SelfCheckSuite(color_logger=console)
        suite.checks = [('qre_additivity', suite.check_additivity)]
        reporter = JsonReporter(stream=io.StringIO())
        report = suite.run(reporter)
        assert report.passed
        assert reporter.checks[0]['name'] == 'qre_additivity'
        assert 'qre_additivity' in console.stream.getvalue()


@allure.feature("Selfcheck")
@allure.story("Full Suite")
@pytest.mark.slow
class TestFullSuite:

    def test_everything_passes(self, suite):
        report = suite.run()
        assert report.passed, report.failed_names
        assert report.to_dict()['total'] == len(suite.checks)

    def test_fault_is_reported(self, suite, monkeypatch):
        monkeypatch.setenv(FAULT_ENV_VAR, 'true')
        report = suite.run()
        assert report.failed_names == ['qpsk_second_derivative']

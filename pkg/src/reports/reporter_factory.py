#!/usr/bin/env python3
"""
Reporter Factory for CovertLink
Creates document writers from config/reporting_config.json and CLI flags
"""

import json
import logging
from pathlib import Path
from typing import Optional

from src.reports.allure_reporter import AllureReporter
from src.reports.base_reporter import BaseReporter
from src.reports.csv_reporter import CsvReporter
from src.reports.json_reporter import JsonReporter
from src.reports.multi_reporter import MultiReporter

logger = logging.getLogger(__name__)


class ReporterFactory:
    """Factory class for creating reporter instances based on configuration"""

    CONFIG_FILE = Path(__file__).resolve().parents[2] / "config" / "reporting_config.json"
    DEFAULT_FORMAT = "json"
    FORMATS = ("json", "csv")

    @staticmethod
    def default_config() -> dict:
        return {
            "default_format": ReporterFactory.DEFAULT_FORMAT,
            "reporters": {
                "json": {"enabled": True, "indent": 2},
                "csv": {"enabled": True, "float_format": "%.5e"},
                "allure": {"enabled": True, "output_dir": "reports/allure-results", "clean_results": True},
            },
            "selfcheck_allure": False,
        }

    @staticmethod
    def load_config(config_file: Optional[Path] = None) -> dict:
        """Load reporting configuration from JSON file"""
        config_path = Path(config_file or ReporterFactory.CONFIG_FILE)

        if not config_path.exists():
            logger.warning(f"Reporting config not found: {config_path}; using defaults")
            return ReporterFactory.default_config()

        try:
            with open(config_path, 'r') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading reporting config {config_path}: {e}; using defaults")
            return ReporterFactory.default_config()

    @staticmethod
    def create_reporter(fmt: Optional[str] = None, output_path: Optional[str] = None,
                        allure_dir: Optional[str] = None, config: Optional[dict] = None) -> BaseReporter:
        """
        Create a document writer, wrapped with an Allure writer when requested

        Args:
            fmt: 'json' or 'csv'; the configured default when None
            output_path: File to write instead of stdout
            allure_dir: Allure results directory (selfcheck only)
            config: Pre-loaded reporting config

        Returns:
            BaseReporter: a single reporter or a MultiReporter
        """
        config = config or ReporterFactory.load_config()
        fmt = fmt or config.get("default_format", ReporterFactory.DEFAULT_FORMAT)
        reporters_config = config.get("reporters", {})

        if fmt not in ReporterFactory.FORMATS:
            logger.warning(f"Unknown format '{fmt}', falling back to {ReporterFactory.DEFAULT_FORMAT}")
            fmt = ReporterFactory.DEFAULT_FORMAT
        if not reporters_config.get(fmt, {}).get("enabled", True):
            logger.warning(f"Reporter '{fmt}' is disabled, falling back to {ReporterFactory.DEFAULT_FORMAT}")
            fmt = ReporterFactory.DEFAULT_FORMAT

        if fmt == "csv":
            primary = CsvReporter(output_path=output_path,
                                  float_format=reporters_config.get("csv", {}).get("float_format", "%.5e"))
        else:
            primary = JsonReporter(output_path=output_path,
                                   indent=reporters_config.get("json", {}).get("indent", 2))

        if allure_dir is None:
            return primary

        allure_config = reporters_config.get("allure", {})
        if not allure_config.get("enabled", True):
            logger.warning("Allure reporter is disabled in the reporting config")
            return primary
        allure = AllureReporter(results_dir=allure_dir,
                                clean_results=allure_config.get("clean_results", True))
        return MultiReporter([primary, allure])

    @staticmethod
    def configured_allure_dir(config: Optional[dict] = None) -> Optional[str]:
        """Allure directory to use for selfcheck when the config asks for it by default"""
        config = config or ReporterFactory.load_config()
        if not config.get("selfcheck_allure", False):
            return None
        return config.get("reporters", {}).get("allure", {}).get("output_dir", "reports/allure-results")

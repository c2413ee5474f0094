#!/usr/bin/env python3
"""
Allure Reporter for CovertLink
Writes Allure result JSON files directly, one test case per selfcheck check
"""

import json
import logging
import time
import uuid
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.reports.base_reporter import BaseReporter
from src.utils.helpers import ensure_directory_exists

logger = logging.getLogger(__name__)

ALLURE_STATUSES = {'passed', 'failed', 'broken', 'skipped'}


class AllureReporter(BaseReporter):
    """Generate Allure results by creating result and container files directly"""

    def __init__(self, results_dir: str = "reports/allure-results", clean_results: bool = True):
        self.allure_results_dir = Path(results_dir)
        self.clean_results = clean_results
        self.command = "selfcheck"

        self.start_time = None
        self.end_time = None
        self.container_uuid = str(uuid.uuid4())
        self.results: List[Dict[str, Any]] = []

    def start_session(self, command: str):
        """Prepare the results directory and reset collected cases"""
        self.command = command
        ensure_directory_exists(self.allure_results_dir)
        if self.clean_results:
            self._cleanup_old_results()
        self.start_time = int(time.time() * 1000)
        self.results = []

    def _cleanup_old_results(self):
        """Remove result files left by a previous run"""
        removed = 0
        for file in self.allure_results_dir.glob('*.json'):
            try:
                file.unlink()
                removed += 1
            except OSError as e:
                logger.warning(f"Could not remove old Allure file {file}: {e}")
        if removed:
            logger.debug(f"Cleaned up {removed} old result files from {self.allure_results_dir}")

    def add_check(self, name: str, status: str, message: str = "",
                  duration: float = 0.0, parameters: Optional[Dict[str, Any]] = None):
        """Record one check as an Allure test case"""
        stop = int(time.time() * 1000)
        start = stop - int(duration * 1000)
        allure_status = status.lower() if status.lower() in ALLURE_STATUSES else 'broken'

        self.results.append({
            'uuid': str(uuid.uuid4()),
            'historyId': f'covertlink.{self.command}.{name}',
            'testCaseId': f'covertlink.{self.command}.{name}',
            'fullName': f'covertlink.{self.command}.{name}',
            'name': name,
            'labels': [
                {'name': 'suite', 'value': 'CovertLink'},
                {'name': 'feature', 'value': self.command},
                {'name': 'framework', 'value': 'CovertLink'},
                {'name': 'language', 'value': 'python'},
            ],
            'links': [],
            'status': allure_status,
            'statusDetails': {'message': message} if message else {},
            'stage': 'finished',
            'steps': [],
            'attachments': [],
            'parameters': [{'name': key, 'value': str(value)} for key, value in (parameters or {}).items()],
            'start': start,
            'stop': stop,
        })

    def end_session(self):
        """Write every collected case plus the suite container"""
        self.end_time = int(time.time() * 1000)
        ensure_directory_exists(self.allure_results_dir)

        for result in self.results:
            with open(self.allure_results_dir / f"{result['uuid']}-result.json", 'w') as f:
                json.dump(result, f, indent=2)

        container = {
            'uuid': self.container_uuid,
            'name': f'CovertLink Suite: {self.command}',
            'children': [result['uuid'] for result in self.results],
            'befores': [],
            'afters': [],
            'start': self.start_time,
            'stop': self.end_time,
        }
        with open(self.allure_results_dir / f'{self.container_uuid}-container.json', 'w') as f:
            json.dump(container, f, indent=2)

        logger.info(f"Allure results written to {self.allure_results_dir} ({len(self.results)} cases)")

    def write_document(self, document: Dict[str, Any]) -> str:
        """Allure output is the results directory; the document itself goes elsewhere"""
        return str(self.allure_results_dir)

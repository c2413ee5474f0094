#!/usr/bin/env python3
"""
CSV Reporter for CovertLink
Tables keep their documented column order; single records become one flattened row
"""

import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO

import pandas as pd

from src.reports.base_reporter import BaseReporter
from src.utils.helpers import ensure_directory_exists, to_plain


class CsvReporter(BaseReporter):
    """Write command documents as CSV to stdout or a file"""

    def __init__(self, output_path: Optional[str] = None, float_format: str = '%.5e',
                 stream: Optional[TextIO] = None):
        self.output_path = Path(output_path) if output_path else None
        self.float_format = float_format
        self.stream = stream
        self.checks: List[Dict[str, Any]] = []

    def start_session(self, command: str):
        self.checks = []

    def end_session(self):
        pass

    def add_check(self, name: str, status: str, message: str = "",
                  duration: float = 0.0, parameters: Optional[Dict[str, Any]] = None):
        self.checks.append({'name': name, 'status': status, 'message': message,
                            'duration_seconds': duration})

    def to_frame(self, document: Dict[str, Any]) -> pd.DataFrame:
        if 'rows' in document:
            return pd.DataFrame(document['rows'], columns=document.get('columns'))
        if self.checks or 'checks' in document:
            return pd.DataFrame(document.get('checks', self.checks))
        record = to_plain(document.get('result', {}))
        flat = pd.json_normalize(record, sep='.')
        # Lists (fit ratios, grids) have no single-cell form
        scalar_columns = [c for c in flat.columns if not isinstance(flat.at[0, c], list)]
        return flat[scalar_columns]

    def render(self, document: Dict[str, Any]) -> str:
        return self.to_frame(document).to_csv(index=False, float_format=self.float_format)

    def write_document(self, document: Dict[str, Any]) -> str:
        text = self.render(document)
        if self.output_path:
            if self.output_path.parent != Path('.'):
                ensure_directory_exists(self.output_path.parent)
            self.output_path.write_text(text)
            return str(self.output_path)
        (self.stream or sys.stdout).write(text)
        return '-'

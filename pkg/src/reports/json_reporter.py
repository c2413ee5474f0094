#!/usr/bin/env python3
"""
JSON Reporter for CovertLink
Full double precision; NaN/inf are written as null
"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO

from src.reports.base_reporter import BaseReporter
from src.utils.helpers import ensure_directory_exists, to_plain


class JsonReporter(BaseReporter):
    """Write command documents as JSON to stdout or a file"""

    def __init__(self, output_path: Optional[str] = None, indent: int = 2, stream: Optional[TextIO] = None):
        self.output_path = Path(output_path) if output_path else None
        self.indent = indent
        self.stream = stream
        self.command = None
        self.checks: List[Dict[str, Any]] = []

    def start_session(self, command: str):
        self.command = command
        self.checks = []

    def end_session(self):
        pass

    def add_check(self, name: str, status: str, message: str = "",
                  duration: float = 0.0, parameters: Optional[Dict[str, Any]] = None):
        self.checks.append({
            'name': name,
            'status': status,
            'message': message,
            'duration_seconds': round(duration, 3),
            'parameters': parameters or {},
        })

    def render(self, document: Dict[str, Any]) -> str:
        if self.checks and 'result' not in document:
            document = dict(document, checks=self.checks)
        return json.dumps(to_plain(document), indent=self.indent) + "\n"

    def write_document(self, document: Dict[str, Any]) -> str:
        text = self.render(document)
        if self.output_path:
            if self.output_path.parent != Path('.'):
                ensure_directory_exists(self.output_path.parent)
            self.output_path.write_text(text)
            return str(self.output_path)
        (self.stream or sys.stdout).write(text)
        return '-'

#!/usr/bin/env python3
"""
Multi Reporter for CovertLink
Wraps multiple reporters to write several formats at once
"""

import logging
from typing import Any, Dict, List, Optional

from src.reports.base_reporter import BaseReporter

logger = logging.getLogger(__name__)


class MultiReporter(BaseReporter):
    """Wrapper that delegates to multiple reporters simultaneously"""

    def __init__(self, reporters: List[BaseReporter]):
        """
        Initialize the multi-reporter with a list of reporters

        Args:
            reporters: Reporter instances; the first one's destination is returned by write_document
        """
        if not reporters:
            raise ValueError("MultiReporter requires at least one reporter")

        self.reporters = reporters
        self.primary_reporter = reporters[0]
        logger.debug(f"MultiReporter with {', '.join(type(r).__name__ for r in reporters)}")

    def _each(self, method: str, *args, **kwargs) -> List[Any]:
        outputs = []
        for reporter in self.reporters:
            try:
                outputs.append(getattr(reporter, method)(*args, **kwargs))
            except OSError as e:
                logger.error(f"{type(reporter).__name__}.{method} failed: {e}")
                outputs.append(None)
        return outputs

    def start_session(self, command: str):
        self._each('start_session', command)

    def end_session(self):
        self._each('end_session')

    def add_check(self, name: str, status: str, message: str = "",
                  duration: float = 0.0, parameters: Optional[Dict[str, Any]] = None):
        self._each('add_check', name, status, message=message, duration=duration, parameters=parameters)

    def write_document(self, document: Dict[str, Any]) -> str:
        """Write on all reporters and return the primary reporter's destination"""
        destinations = self._each('write_document', document)
        return destinations[0] or ""

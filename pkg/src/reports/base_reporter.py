#!/usr/bin/env python3
"""
Base Reporter Interface for CovertLink
Defines the contract that all document writers must follow
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

from src.utils.helpers import get_version_info


def build_document(command: str, result: Optional[Dict[str, Any]] = None,
                   rows: Optional[List[Dict[str, Any]]] = None,
                   columns: Optional[List[str]] = None) -> Dict[str, Any]:
    """
    Command output document

    Either a single 'result' record or a table of 'rows' (with a stable 'columns' order).
    """
    version = get_version_info()
    document = {
        'schema_version': version['schema_version'],
        'covertlink_version': version['current_version'],
        'command': command,
    }
    if result is not None:
        document['result'] = result
    if rows is not None:
        document['columns'] = list(columns) if columns else (list(rows[0]) if rows else [])
        document['rows'] = rows
    return document


class BaseReporter(ABC):
    """Abstract base class for all CovertLink reporters"""

    @abstractmethod
    def start_session(self, command: str):
        """Mark the start of a command run"""
        pass

    @abstractmethod
    def end_session(self):
        """Mark the end of a command run"""
        pass

    @abstractmethod
    def add_check(self, name: str, status: str, message: str = "",
                  duration: float = 0.0, parameters: Optional[Dict[str, Any]] = None):
        """Record one selfcheck outcome ('passed' or 'failed')"""
        pass

    @abstractmethod
    def write_document(self, document: Dict[str, Any]) -> str:
        """Write the document and return where it went ('-' for stdout)"""
        pass

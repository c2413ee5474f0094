#!/usr/bin/env python3
"""
Color Logger for CovertLink
Colour-coded human-facing diagnostics on stderr; stdout is reserved for documents
"""

import os
import sys
from datetime import datetime
from enum import Enum
from typing import List, Optional, TextIO


class Colors:
    """ANSI color codes for terminal output"""
    RESET = '\033[0m'

    RED = '\033[0;31m'
    GREEN = '\033[0;32m'
    BLUE = '\033[0;34m'
    PURPLE = '\033[0;35m'
    CYAN = '\033[0;36m'

    BOLD_RED = '\033[1;31m'
    BOLD_GREEN = '\033[1;32m'
    BOLD_CYAN = '\033[1;36m'

    HI_BLACK = '\033[0;90m'


class LogLevel(Enum):
    """Log levels with associated colors"""
    INFO = ("INFO", Colors.CYAN)
    SUCCESS = ("SUCCESS", Colors.GREEN)
    FAIL = ("FAIL", Colors.BOLD_RED)


class ColorLogger:
    """Color-coded logger for CovertLink command output"""

    def __init__(self, name: str = "CovertLink", show_timestamp: bool = False,
                 use_colors: bool = True, stream: Optional[TextIO] = None):
        """
        Initialize the color logger

        Args:
            name: Logger name prefix (default: "CovertLink")
            show_timestamp: Whether to show timestamps
            use_colors: Whether to use colors (auto-disabled for non-terminal)
            stream: Output stream, stderr unless given
        """
        self.name = name
        self.show_timestamp = show_timestamp
        self.stream = stream or sys.stderr

        # Auto-detect if output supports colors
        self.use_colors = use_colors and self._supports_colors()

    def _supports_colors(self) -> bool:
        """Check if the stream is a colour-capable terminal"""
        if not hasattr(self.stream, 'isatty') or not self.stream.isatty():
            return False

        if os.environ.get('NO_COLOR'):
            return False

        if os.environ.get('TERM') == 'dumb':
            return False

        return True

    def _paint(self, text: str, color: str) -> str:
        return f"{color}{text}{Colors.RESET}" if self.use_colors else text

    def _emit(self, line: str):
        print(line, file=self.stream)

    def _format_message(self, level: LogLevel, message: str, prefix: Optional[str] = None) -> str:
        """Format message with colors and metadata"""
        parts = [self._paint(f"[{self.name}]", Colors.CYAN)]

        if self.show_timestamp:
            parts.append(self._paint(f"[{datetime.now().strftime('%H:%M:%S')}]", Colors.BLUE))

        if prefix:
            parts.append(self._paint(f"[{prefix}]", Colors.PURPLE))

        level_name, color = level.value
        parts.append(self._paint(f"[{level_name}]", color))

        if level is LogLevel.INFO:
            parts.append(message)
        else:
            parts.append(self._paint(message, color))
        return " ".join(parts)

    def info(self, message: str, prefix: Optional[str] = None):
        self._emit(self._format_message(LogLevel.INFO, message, prefix))

    def success(self, message: str, prefix: Optional[str] = None):
        self._emit(self._format_message(LogLevel.SUCCESS, message, prefix))

    def fail_step(self, message: str, prefix: Optional[str] = None):
        self._emit(self._format_message(LogLevel.FAIL, message, prefix))

    def header(self, title: str, width: int = 60, char: str = "="):
        """Print a formatted header"""
        line = self._paint(char * width, Colors.CYAN)
        self._emit(line)
        self._emit(self._paint(title.center(width), Colors.BOLD_CYAN))
        self._emit(line)

    def separator(self, width: int = 60, char: str = "-"):
        self._emit(self._paint(char * width, Colors.HI_BLACK))

    def table_row(self, columns: list, widths: Optional[List[int]] = None, colors: Optional[List[str]] = None):
        """Print a formatted table row"""
        widths = widths or [20] * len(columns)
        colors = colors or [Colors.RESET] * len(columns)

        row = [self._paint(str(col)[:width].ljust(width), color)
               for col, width, color in zip(columns, widths, colors)]
        self._emit(" | ".join(row))

    def print_summary(self, passed: int, failed: int, total: Optional[int] = None):
        """Print check summary with colors"""
        if total is None:
            total = passed + failed

        self.separator()
        self.info("Selfcheck Summary", prefix="SUMMARY")
        self.separator()

        success_rate = (passed / total * 100) if total > 0 else 0
        self._emit(f"  {self._paint('Passed:', Colors.GREEN)}  {passed:3d}")
        self._emit(f"  {self._paint('Failed:', Colors.RED)}  {failed:3d}")
        self._emit(f"  {self._paint('Total:', Colors.CYAN)}   {total:3d}")

        rate_color = Colors.BOLD_GREEN if failed == 0 else Colors.BOLD_RED
        self._emit(f"\n  {self._paint('Success Rate:', Colors.BOLD_CYAN)} "
                   f"{self._paint(f'{success_rate:.1f}%', rate_color)}")
        self.separator()

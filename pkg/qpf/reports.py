"""Verification reports: a JSON document for machine diffing plus a plain-text twin."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import __version__
from .errors import ValidationError
from .utils import ensure_directory, get_logger

logger = get_logger(__name__)

REPORT_FORMAT = 'qpf-report/1'
STATUSES = ('pass', 'fail')


@dataclass(frozen=True)
class ReportItem:
    name: str
    status: str
    residual: float
    phase: complex | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValidationError(f"status must be one of {STATUSES}, got {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == 'pass'

    def to_dict(self) -> dict:
        phase = None
        if self.phase is not None:
            phase = {'re': float(self.phase.real), 'im': float(self.phase.imag)}
        return {
            'name': self.name,
            'status': self.status,
            'residual': float(self.residual),
            'phase': phase,
            'notes': self.notes,
        }


@dataclass
class Report:
    command: str
    items: list[ReportItem] = field(default_factory=list)
    seed: int | None = None
    tol: float | None = None
    tool_version: str = __version__
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def add(self, item: ReportItem) -> None:
        self.items.append(item)

    def extend(self, items) -> None:
        self.items.extend(items)

    @property
    def summary(self) -> dict:
        passed = sum(1 for item in self.items if item.passed)
        return {'pass': passed, 'fail': len(self.items) - passed}

    @property
    def exit_status(self) -> int:
        return 0 if all(item.passed for item in self.items) else 1

    def to_dict(self, include_timestamp: bool = True) -> dict:
        data = {
            'format': REPORT_FORMAT,
            'command': self.command,
            'tool_version': self.tool_version,
            'seed': self.seed,
            'tol': self.tol,
            'summary': self.summary,
            'items': [item.to_dict() for item in self.items],
        }
        if include_timestamp:
            data['created_at'] = self.created_at
        return data

    def to_json(self, include_timestamp: bool = True) -> str:
        return json.dumps(self.to_dict(include_timestamp), indent=2, sort_keys=True) + '\n'

    def to_text(self) -> str:
        lines = [f"{self.command} (qpf {self.tool_version}, seed={self.seed}, tol={self.tol})"]
        width = max((len(item.name) for item in self.items), default=4)
        for item in self.items:
            phase = '-' if item.phase is None else f"{item.phase.real:+.12f}{item.phase.imag:+.12f}j"
            lines.append(f"  {item.status.upper():4}  {item.name:<{width}}  residual={item.residual:.3e}  phase={phase}")
        summary = self.summary
        lines.append(f"{summary['pass']} passed, {summary['fail']} failed")
        return '\n'.join(lines) + '\n'

    def write(self, directory: str, stem: str | None = None) -> tuple[str, str]:
        """Write ``<stem>.json`` and ``<stem>.txt`` under ``directory``."""
        ensure_directory(directory)
        stem = stem or self.command.replace(' ', '-')
        json_path = os.path.join(directory, f"{stem}.json")
        text_path = os.path.join(directory, f"{stem}.txt")
        with open(json_path, 'w', encoding='utf-8') as handle:
            handle.write(self.to_json())
        with open(text_path, 'w', encoding='utf-8') as handle:
            handle.write(self.to_text())
        logger.info(f"Report written to {json_path}")
        return json_path, text_path

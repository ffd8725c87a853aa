"""
Run Ledger - Timestamped experiment events, exported next to experiment artifacts
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Union

logger = logging.getLogger(__name__)


class RunLedger:
    """Log experiment lifecycle events; timestamps stay here and never enter data rows."""

    def __init__(self, command: str, config: Dict[str, Any]):
        """Initialize the ledger with the resolved configuration."""
        self.command = command
        self.config = dict(config)
        self.logs: List[Dict[str, Any]] = []
        self.log_event("start", {"command": command})

    def log_event(self, event_type: str, details: Dict[str, Any]) -> None:
        """Log an event."""
        self.logs.append(
            {
                "timestamp": datetime.now().isoformat(),
                "event_type": event_type,
                "details": details,
            }
        )
        logger.debug(f"{self.command}: {event_type} {details}")

    def generate_report(self) -> str:
        """Plain-text summary of the logged events."""
        report = f"RUN LEDGER: {self.command}\n" + "=" * 50 + "\n"
        report += f"Total Events Logged: {len(self.logs)}\n"
        for i, log in enumerate(self.logs, 1):
            report += f"\n[{i}] {log['event_type']} ({log['timestamp']})\n"
            for key, value in log["details"].items():
                report += f"    {key}: {value}\n"
        return report

    def export_logs_json(self) -> str:
        """Export config and events as JSON."""
        return json.dumps({"command": self.command, "config": self.config, "events": self.logs}, indent=2, default=str)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.export_logs_json())
        logger.info(f"Run ledger written to {path}")
        return path
